"""Bundled scenario presets (JSON files loaded via importlib.resources)."""
