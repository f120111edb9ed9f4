"""Superhedging prices and pricing systems on finite scenario trees, solved as exact LPs."""

__version__ = "0.1.0"
