"""Whole-trajectory compression: spatial codec plus bounded temporal codec."""

from __future__ import annotations

from dataclasses import dataclass

from .network import RoadNetwork, SPIndex
from .spatial import CompressedSpatial, FstModel, hsc_compress, hsc_decompress
from .temporal import BtcConfig, btc_compress
from .trajectory import Trajectory, validate


@dataclass(frozen=True)
class CompressedTrajectory:
    id: str
    spatial: CompressedSpatial
    temporal: tuple


def compress_trajectory(traj: Trajectory, index: SPIndex, model: FstModel,
                        cfg: BtcConfig = BtcConfig(), net: RoadNetwork | None = None) -> CompressedTrajectory:
    if net is not None:
        validate(traj, net).raise_if_invalid(f"trajectory {traj.id}: ")
    return CompressedTrajectory(
        traj.id, hsc_compress(traj.path, index, model), btc_compress(traj.times, cfg)
    )


def decompress_trajectory(ct: CompressedTrajectory, index: SPIndex, model: FstModel) -> Trajectory:
    """Exact spatial path; the temporal part is stored as-is."""
    return Trajectory(ct.id, hsc_decompress(ct.spatial, index, model), ct.temporal)
