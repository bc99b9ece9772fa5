"""Portable geospatial layer-deck projects.

Authoring CLI, project-folder format with deep validation and zip
sharing, a deterministic alpha compositor, and a presenter service that
keeps a touchscreen controller and a projection display in sync.
"""

__version__ = "0.1.0"
