"""Exact computations with unstable coalgebras over the mod 2 Steenrod algebra and over Q."""

__version__ = "0.1.0"
