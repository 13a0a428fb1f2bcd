"""Driving adapters package."""
