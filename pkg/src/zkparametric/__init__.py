"""Sonic-style zk-SNARKs with restricted and batched KZG commitments, applied
to privacy-preserving parametric bushfire insurance."""

__version__ = "0.1.0"
