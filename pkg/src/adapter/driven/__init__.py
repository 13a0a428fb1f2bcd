"""Driven adapters package."""
