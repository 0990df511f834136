"""Semi-implicit hybrid finite-volume / finite-element solver for viscous resistive MHD."""

__version__ = "0.1.0"
