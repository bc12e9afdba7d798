"""Private states, bound-entangled key and the bounds around them."""

__version__ = "0.1.0"
