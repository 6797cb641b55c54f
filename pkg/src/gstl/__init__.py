"""Graph-based spatial temporal logic: evaluation, mining, planning, verification."""

__version__ = "0.1.0"
