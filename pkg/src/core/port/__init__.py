"""Port interfaces package."""
