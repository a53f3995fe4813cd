"""Diversity-based visual token pruning."""

from ._core import DivPruneError, __version__, greedy_select, prune

__all__ = ["DivPruneError", "__version__", "greedy_select", "prune"]
