"""Service implementations package."""
