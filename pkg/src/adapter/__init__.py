"""Adapter implementations for external systems package."""
