"""Entropy, chaos and logical-depth probes for automorphisms of the noncommutative torus."""

__version__ = "0.1.0"
