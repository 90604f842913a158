"""Coverage, outage and energy-efficiency analysis of a satellite-fed aerial relay."""

__version__ = "0.1.0"
