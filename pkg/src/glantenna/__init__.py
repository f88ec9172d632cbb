"""Graphene-liquid microfluidic antenna simulation toolkit."""

__version__ = "0.1.0"
