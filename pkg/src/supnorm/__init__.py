"""Verification toolkit for local and global bounds in a sup-norm argument."""

__version__ = "0.1.0"
