"""Composition operators between p-Bloch spaces on the unit polydisc."""

__version__ = "0.1.0"
