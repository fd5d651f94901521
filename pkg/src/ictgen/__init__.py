"""Mobility-free contact-trace generator with an epidemic-routing replay engine."""

__version__ = "0.1.0"
