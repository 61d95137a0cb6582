"""Synthesis of deterministic top-down tree transducers from tree-automatic
specifications, via safety games with bounded or unbounded output delay."""

__version__ = "0.1.0"
