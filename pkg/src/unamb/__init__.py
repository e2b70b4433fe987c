"""Universality, inclusion, and coin-flip measures for unambiguous
grammars and finite automata, driven by exact convolution-recursive
sequence arithmetic."""

__version__ = "0.1.0"
