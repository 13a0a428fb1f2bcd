"""Domain entities and business rules package."""
