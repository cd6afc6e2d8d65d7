"""Weighted domino tilings of Aztec rectangles with defects: exact values, arctic curves, sampling."""

__version__ = "0.1.0"
