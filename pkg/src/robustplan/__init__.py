"""Robust planning under model ambiguity: DROP, interval prediction and IRC."""

__version__ = "0.1.0"
