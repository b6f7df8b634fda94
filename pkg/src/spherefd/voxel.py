"""Point-cloud approximation of the sphere-union surface and voxel box counting."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .dimension import BoxCountSeries
from .neighbors import NeighborList
from .structure import Structure
from .surface import InnerSideTester, SurfaceFlags

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def fibonacci_sphere(n: int) -> np.ndarray:
    """`n` near-uniform unit vectors on the golden-angle spiral, shape (n, 3)."""
    if n < 1:
        raise ValueError(f"number of points must be >= 1, got {n}")
    k = np.arange(n, dtype=float)
    z = 1.0 - (2.0 * k + 1.0) / n
    r = np.sqrt(1.0 - z * z)
    phi = k * GOLDEN_ANGLE
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    owner_atom: np.ndarray

    def __len__(self):
        return len(self.points)


def overlap_partners(structure: Structure) -> list[np.ndarray]:
    """For each atom, the other atoms whose spheres intersect its own."""
    pos, rad = structure.positions, structure.radii
    tree = cKDTree(pos)
    cand = tree.query_ball_point(pos, rad + structure.r_max)
    out = []
    for i, c in enumerate(cand):
        c = np.array(sorted(c), dtype=np.int64)
        c = c[c != i]
        d = np.linalg.norm(pos[c] - pos[i], axis=1)
        out.append(c[d < rad[c] + rad[i]])
    return out


def _atom_points(i, dirs, structure, partners, tester):
    c = structure.positions[i]
    pts = c + structure.radii[i] * dirs
    keep = np.ones(len(pts), dtype=bool)
    for k in partners[i]:
        diff = pts - structure.positions[k]
        keep &= np.einsum("ij,ij->i", diff, diff) >= structure.radii[k] ** 2
    pts = pts[keep]
    if tester is not None and len(pts):
        pts = pts[~tester(pts, i)]
    return pts


def gen_surface_points(structure: Structure, neighbor_list: NeighborList,
                       surface_flags: SurfaceFlags, num_points: int = 10000,
                       rm_in_surf: bool = True, num_cpus: int = 1) -> PointCloud:
    """Sample the exposed sphere patches of the surface atoms.

    Each surface atom receives `num_points` Fibonacci points on its sphere.
    Points strictly inside another sphere are dropped, and with `rm_in_surf`
    so are points on the inner side of the atom.
    """
    if num_points < 1:
        raise ValueError("num_points must be >= 1")
    dirs = fibonacci_sphere(num_points)
    partners = overlap_partners(structure)
    tester = InnerSideTester(structure, neighbor_list, surface_flags) if rm_in_surf else None
    atoms = surface_flags.indices

    def work(i):
        return _atom_points(i, dirs, structure, partners, tester)

    if num_cpus > 1 and len(atoms) > 1:
        with ThreadPoolExecutor(max_workers=num_cpus) as pool:
            chunks = list(pool.map(work, atoms))
    else:
        chunks = [work(i) for i in atoms]
    if not chunks:
        return PointCloud(np.empty((0, 3)), np.empty(0, dtype=np.int64))
    owners = np.concatenate([np.full(len(p), i, dtype=np.int64) for i, p in zip(atoms, chunks)])
    return PointCloud(np.concatenate(chunks), owners)


# -- bit-packed occupancy grid ------------------------------------------------

_POPCOUNT = np.array([bin(b).count("1") for b in range(256)], dtype=np.int64)
# byte -> nibble holding the OR of each adjacent bit pair
_PAIR_OR = np.array([sum((((b >> (2 * k)) | (b >> (2 * k + 1))) & 1) << k for k in range(4))
                     for b in range(256)], dtype=np.uint8)


@dataclass(frozen=True, eq=False)
class BinaryGrid:
    """Cubic occupancy grid, one bit per voxel packed along the last axis.

    `packed` has shape (n, n, ceil(n / 8)); bit ``z % 8`` (little-endian) of
    byte ``z // 8`` holds voxel z. Padding bits are always zero.
    """

    resolution: int
    packed: np.ndarray
    physical_edge: float = 1.0
    origin: np.ndarray = None

    def __post_init__(self):
        n = self.resolution
        if n < 1:
            raise ValueError("grid resolution must be positive")
        if self.packed.shape != (n, n, (n + 7) // 8) or self.packed.dtype != np.uint8:
            raise ValueError(f"packed occupancy has shape {self.packed.shape}, "
                             f"expected {(n, n, (n + 7) // 8)} uint8")
        if self.origin is None:
            object.__setattr__(self, "origin", np.zeros(3))

    @property
    def voxel_edge(self) -> float:
        return self.physical_edge / self.resolution

    @classmethod
    def empty(cls, resolution, physical_edge=1.0, origin=None):
        packed = np.zeros((resolution, resolution, (resolution + 7) // 8), dtype=np.uint8)
        return cls(resolution, packed, physical_edge, origin)

    @classmethod
    def from_dense(cls, dense, physical_edge=1.0, origin=None):
        dense = np.asarray(dense, dtype=bool)
        n = dense.shape[0]
        if dense.shape != (n, n, n):
            raise ValueError("dense occupancy must be cubic")
        return cls(n, np.packbits(dense, axis=2, bitorder="little"), physical_edge, origin)

    @classmethod
    def from_indices(cls, idx, resolution, physical_edge=1.0, origin=None):
        grid = cls.empty(resolution, physical_edge, origin)
        idx = np.asarray(idx, dtype=np.int64).reshape(-1, 3)
        if len(idx):
            nb = grid.packed.shape[2]
            flat = grid.packed.reshape(-1)
            byte = (idx[:, 0] * resolution + idx[:, 1]) * nb + idx[:, 2] // 8
            bit = np.left_shift(1, idx[:, 2] % 8).astype(np.uint8)
            np.bitwise_or.at(flat, byte, bit)
        return grid

    def to_dense(self) -> np.ndarray:
        return np.unpackbits(self.packed, axis=2, bitorder="little")[:, :, :self.resolution].astype(bool)

    def count(self) -> int:
        return int(_POPCOUNT[self.packed].sum())

    def occupied_indices(self) -> np.ndarray:
        return np.argwhere(self.to_dense())

    def occupied_centres(self) -> np.ndarray:
        return self.origin + (self.occupied_indices() + 0.5) * self.voxel_edge


def grid_frame(structure: Structure, pad: bool = True):
    """Origin and edge of the cubic voxel frame.

    Padded frames enclose every sphere (centre extent plus the largest
    radius on each side); unpadded frames span the centres' bounding cube.
    """
    if not pad:
        return structure.min_xyz.copy(), structure.max_range
    extent = float((structure.max_xyz - structure.min_xyz).max())
    return structure.min_xyz - structure.r_max, extent + 2.0 * structure.r_max


def voxelise(points, grid_num: int, origin, edge: float) -> BinaryGrid:
    """Map points into a ``grid_num``^3 occupancy grid over a cube.

    Voxel index per axis is ``floor((x - origin) / edge * grid_num)``
    clamped to ``[0, grid_num - 1]``.
    """
    if grid_num < 2:
        raise ValueError("grid_num must be >= 2")
    if isinstance(points, PointCloud):
        points = points.points
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    origin = np.asarray(origin, dtype=float)
    idx = np.floor((points - origin) / edge * grid_num).astype(np.int64)
    np.clip(idx, 0, grid_num - 1, out=idx)
    return BinaryGrid.from_indices(idx, grid_num, float(edge), origin)


def _halve_packed(packed, n):
    """OR-reduce 2x2x2 blocks; returns (packed, n // 2)."""
    p = packed[0::2] | packed[1::2]
    p = p[:, 0::2] | p[:, 1::2]
    half = n // 2
    if n % 16 == 0:
        out = _PAIR_OR[p[:, :, 0::2]] | (_PAIR_OR[p[:, :, 1::2]] << 4)
        return np.ascontiguousarray(out), half
    dense = np.unpackbits(p, axis=2, bitorder="little")[:, :, :n].astype(bool)
    dense = dense[:, :, 0::2] | dense[:, :, 1::2]
    return np.packbits(dense, axis=2, bitorder="little"), half


def _block_count(grid: BinaryGrid, s: int) -> int:
    n = grid.resolution
    m = n // s
    total = 0
    for x0 in range(0, n, s):
        slab = np.unpackbits(grid.packed[x0:x0 + s], axis=2, bitorder="little")[:, :, :n]
        total += int(slab.reshape(s, m, s, m, s).any(axis=(0, 2, 4)).sum())
    return total


def default_scales(resolution: int) -> list[int]:
    scales, s = [], 1
    while s <= resolution // 2:
        scales.append(s)
        s *= 2
    return scales


def count_boxes_grid(grid: BinaryGrid, scales=None) -> BoxCountSeries:
    """Number of occupied aligned s^3 blocks for each scale s.

    Power-of-two scales are read off an OR-reduction pyramid; any other
    divisor of the resolution is counted by a direct block scan. Lengths
    in the returned series are physical, ``s * voxel_edge``.
    """
    n = grid.resolution
    scales = default_scales(n) if scales is None else [int(s) for s in scales]
    if not scales:
        raise ValueError("no scales to count")
    for s in scales:
        if s < 1 or n % s:
            raise ValueError(f"scale {s} does not divide grid resolution {n}")
    wanted = sorted(set(scales))
    counts = {}
    pow2 = [s for s in wanted if s & (s - 1) == 0]
    if pow2:
        packed, size, s = grid.packed, n, 1
        while True:
            if s in pow2:
                counts[s] = int(_POPCOUNT[packed].sum())
            if s >= pow2[-1]:
                break
            packed, size = _halve_packed(packed, size)
            s *= 2
    for s in wanted:
        if s not in counts:
            counts[s] = _block_count(grid, s)
    desc = sorted(wanted, reverse=True)
    return BoxCountSeries(np.array([s * grid.voxel_edge for s in desc]),
                          np.array([counts[s] for s in desc], dtype=np.int64))
