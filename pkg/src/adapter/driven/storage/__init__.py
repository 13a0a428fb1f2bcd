"""Result storage adapters."""
