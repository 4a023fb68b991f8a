"""Stationary measures of geometric LPP and the log-gamma polymer on a strip."""

__version__ = "0.1.0"
