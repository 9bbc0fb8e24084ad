"""Luthar-Passi (HeLP) verification of the Zassenhaus conjecture from character tables."""

__version__ = "0.1.0"
