"""tabletalk: language-grounded pick-and-place on a simulated tabletop."""

__version__ = "0.1.0"
