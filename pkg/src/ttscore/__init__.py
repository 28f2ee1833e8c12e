"""Scores of forwarding schemes in time-triggered networks under crashes and omissions."""

__version__ = "0.1.0"
