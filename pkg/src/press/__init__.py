"""Compression of road-network-constrained trajectories with queries on the compressed form."""

from __future__ import annotations

__version__ = "0.1.0"
