"""Certified Hofer-distance bounds for diameters of the disk."""
__version__ = "0.1.0"
