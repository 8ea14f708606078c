"""Guided security crawler and staged taint inference for GSL applications."""

__version__ = "0.1.0"
