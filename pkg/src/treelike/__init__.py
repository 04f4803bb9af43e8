"""Executable checks for treelike order structures and group actions on them."""
__version__ = "0.1.0"
