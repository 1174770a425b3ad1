"""Shipped scenario presets (YAML package data)."""
