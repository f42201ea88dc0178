"""Greedy and stochastic-greedy k-space line selection for dynamic MRI."""

__version__ = "0.1.0"
