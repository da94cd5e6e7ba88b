"""Fully character-level neural machine translation, from scratch on numpy."""
__version__ = "0.1.0"
