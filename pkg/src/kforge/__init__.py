"""Collaborative, version-controlled knowledge base backed by a code forge."""

__version__ = "0.1.0"
