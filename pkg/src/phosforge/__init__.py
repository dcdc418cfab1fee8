"""End-point phosphorus prediction for scrap-based EAF steelmaking."""

__version__ = "0.1.0"
