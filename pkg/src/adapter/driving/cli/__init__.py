"""Command-line driving adapter."""
