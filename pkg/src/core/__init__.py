"""Core domain and business logic package."""
