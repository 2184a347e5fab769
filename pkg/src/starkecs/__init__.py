"""Stark resonance parameters by exterior complex scaling on a finite-element basis."""

__version__ = "0.1.0"
