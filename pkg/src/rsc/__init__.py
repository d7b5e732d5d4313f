"""Random sequential covering: exact combinatorics, series, and event-driven simulation."""

__version__ = "0.1.0"
