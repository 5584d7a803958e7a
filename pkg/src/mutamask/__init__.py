"""mutamask: natural-mutant generation for MiniJ via masked-token prediction."""

__version__ = "0.1.0"
