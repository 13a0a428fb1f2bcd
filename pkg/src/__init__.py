"""Coupled-waves package."""
