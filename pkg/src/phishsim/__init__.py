"""Desk-scale lab for delayed-rendering evasion attacks on visual phishing detectors."""

__version__ = "0.1.0"
