"""Box counting on the exact sphere-union surface."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import ceil

import numpy as np

from .dimension import BoxCountSeries
from .errors import NumericError
from .neighbors import NeighborList
from .structure import Structure
from .surface import InnerSideTester, SurfaceFlags
from .voxel import overlap_partners

# box index triples are packed into one int64, 21 bits per axis
_BITS = 21
_OFFSET = 1 << (_BITS - 1)
_MASK = (1 << _BITS) - 1


def near_far_coord(o: float, b_min: float, b_max: float, l: float) -> tuple[float, float]:
    """Nearest and farthest coordinate of the box [b_min, b_max] from `o` on one axis."""
    if o < b_min:
        return b_min, b_max
    if o > b_max:
        return b_max, b_min
    return o, (b_min if b_max - o < l / 2 else b_max)


def near_far_coords(o, b_min, b_max, l):
    """Array version of :func:`near_far_coord`."""
    o, b_min, b_max = np.broadcast_arrays(np.asarray(o, dtype=float),
                                          np.asarray(b_min, dtype=float),
                                          np.asarray(b_max, dtype=float))
    left = o < b_min
    right = o > b_max
    near = np.where(left, b_min, np.where(right, b_max, o))
    inside_far = np.where(b_max - o < l / 2, b_min, b_max)
    far = np.where(left, b_max, np.where(right, b_min, inside_far))
    return near, far


def encode_boxes(idx) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64).reshape(-1, 3)
    if len(idx) and (idx.min() < -_OFFSET or idx.max() >= _OFFSET):
        raise NumericError("box index out of range; box length too small for this structure")
    s = idx + _OFFSET
    return (s[:, 0] << (2 * _BITS)) | (s[:, 1] << _BITS) | s[:, 2]


def decode_boxes(codes) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    return np.column_stack([(codes >> (2 * _BITS)) & _MASK,
                            (codes >> _BITS) & _MASK,
                            codes & _MASK]) - _OFFSET


@dataclass(frozen=True, eq=False)
class BoxGridSpec:
    origin: np.ndarray
    box_len: float

    def __post_init__(self):
        if not self.box_len > 0:
            raise ValueError(f"box length must be positive, got {self.box_len}")
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))

    def index_of(self, xyz) -> np.ndarray:
        return np.floor((np.asarray(xyz) - self.origin) / self.box_len).astype(np.int64)

    def lower(self, idx) -> np.ndarray:
        return self.origin + np.asarray(idx) * self.box_len

    def centres(self, idx) -> np.ndarray:
        return self.origin + (np.asarray(idx) + 0.5) * self.box_len


@dataclass(frozen=True, eq=False)
class BoxClassification:
    """Outcome of exact box counting at one box length.

    `surface` holds the counted boxes (S after subtracting B). `bulk` holds
    the interior boxes found: every one when collected in full, otherwise
    only those that cancelled a surface candidate. `rejected` holds
    surface candidates that were not counted.
    """

    grid: BoxGridSpec
    surface: np.ndarray
    bulk: np.ndarray
    rejected: np.ndarray

    @property
    def count(self) -> int:
        return len(self.surface)


def _window_index(js, offsets):
    return np.column_stack([js[0, offsets[:, 0]], js[1, offsets[:, 1]],
                            js[2, offsets[:, 2]]]).astype(np.int64)


class _ExactCounter:
    def __init__(self, structure, neighbor_list, surface_flags, rm_in_surf):
        self.structure = structure
        self.rm_in_surf = rm_in_surf
        n = len(structure)
        if rm_in_surf:
            self.flags = np.asarray(surface_flags.flags, dtype=bool)
            self.tester = InnerSideTester(structure, neighbor_list, self.flags)
        else:
            self.flags = np.ones(n, dtype=bool)
            self.tester = None
        partners = overlap_partners(structure)
        self.partners = [p[self.flags[p]] for p in partners]

    def atom(self, i, grid: BoxGridSpec, collect_bulk):
        pos, rad = self.structure.positions, self.structure.radii
        c, r, l = pos[i], rad[i], grid.box_len
        home = grid.index_of(c)
        n_scan = ceil((r + l) / l)
        offs = np.arange(-n_scan, n_scan + 1)
        js = home[:, None] + offs[None, :]
        b_min = grid.origin[:, None] + js * l
        near, far = near_far_coords(c[:, None], b_min, b_min + l, l)
        dn = (near - c[:, None]) ** 2
        df = (far - c[:, None]) ** 2

        w = len(offs)
        step = max(1, 4_000_000 // (w * w))
        surf, bulk = [], []
        for x0 in range(0, w, step):
            d_near = np.sqrt(dn[0, x0:x0 + step, None, None] + dn[1, None, :, None] + dn[2, None, None, :])
            d_far = np.sqrt(df[0, x0:x0 + step, None, None] + df[1, None, :, None] + df[2, None, None, :])
            hit = np.argwhere((d_near < r) & (r < d_far))
            hit[:, 0] += x0
            surf.append(hit)
            if collect_bulk:
                inside = np.argwhere(d_far < r)
                inside[:, 0] += x0
                bulk.append(inside)
        surf = _window_index(js, np.concatenate(surf))
        if collect_bulk:
            bulk = _window_index(js, np.concatenate(bulk))
            if self.tester is not None and len(bulk):
                bulk = bulk[~self.tester(grid.centres(bulk), i)]
        else:
            bulk = np.empty((0, 3), dtype=np.int64)

        if self.tester is not None and len(surf):
            inner = self.tester(grid.centres(surf), i)
            rejected = [surf[inner]]
            surf = surf[~inner]
        else:
            rejected = []

        # boxes lying wholly inside another (non-inner-side) surface sphere
        covered = np.zeros(len(surf), dtype=bool)
        if len(surf):
            lo = grid.lower(surf)
            for k in self.partners[i]:
                _, fk = near_far_coords(pos[k], lo, lo + l, l)
                hit = np.linalg.norm(fk - pos[k], axis=1) < rad[k]
                hit &= ~covered
                if self.tester is not None and hit.any():
                    sel = np.flatnonzero(hit)
                    hit[sel[self.tester(grid.centres(surf[sel]), k)]] = False
                covered |= hit
        rejected.append(surf[covered])
        return surf[~covered], surf[covered], np.concatenate(rejected), bulk


def exact_box_count(structure: Structure, neighbor_list: NeighborList,
                    surface_flags: SurfaceFlags | None, box_len: float,
                    rm_in_surf: bool = True, num_cpus: int = 1, origin=None,
                    collect_bulk: bool = False, _counter=None) -> BoxClassification:
    """Classify the boxes of edge `box_len` that cover the outer surface.

    Around each surface atom, boxes within ``ceil((R + l) / l)`` indices of
    the atom's own box are examined. A box whose nearest point is inside the
    sphere and farthest point outside is a surface box; one wholly inside
    is a bulk box; bulk boxes are subtracted from the surface set. With
    `rm_in_surf`, boxes whose centre lies on an atom's inner side are
    skipped for that atom; without it every atom counts as a surface atom.
    The grid is anchored at the structure's minimum corner by default.
    """
    if not box_len > 0:
        raise ValueError(f"box length must be positive, got {box_len}")
    if rm_in_surf and surface_flags is None:
        raise ValueError("surface flags are required when removing inner surfaces")
    grid = BoxGridSpec(structure.min_xyz if origin is None else origin, float(box_len))
    counter = _counter or _ExactCounter(structure, neighbor_list, surface_flags, rm_in_surf)
    atoms = np.flatnonzero(counter.flags)

    def work(i):
        return counter.atom(i, grid, collect_bulk)

    if num_cpus > 1 and len(atoms) > 1:
        with ThreadPoolExecutor(max_workers=num_cpus) as pool:
            parts = list(pool.map(work, atoms))
    else:
        parts = [work(i) for i in atoms]

    def merged(k):
        arrays = [p[k] for p in parts if len(p[k])]
        if not arrays:
            return np.empty(0, dtype=np.int64)
        return np.unique(encode_boxes(np.concatenate(arrays)))

    surf = merged(0)
    bulk = np.union1d(merged(1), merged(3))
    surf = np.setdiff1d(surf, bulk, assume_unique=True)
    rejected = np.setdiff1d(merged(2), surf, assume_unique=True)
    return BoxClassification(grid, decode_boxes(surf), decode_boxes(bulk), decode_boxes(rejected))


def length_schedule(structure: Structure, min_len_mult: float = 0.25,
                    max_len_mult: float = 1.0, num_box_len: int = 10) -> np.ndarray:
    """Geometrically spaced box lengths, descending from max_len_mult * R_max
    to min_len_mult * R_min."""
    if not min_len_mult > 0:
        raise ValueError("min_len_mult must be positive")
    if num_box_len < 2:
        raise ValueError("num_box_len must be >= 2")
    lo = min_len_mult * structure.r_min
    hi = max_len_mult * structure.r_max
    if lo >= hi:
        raise ValueError(f"minimum box length {lo:g} is not below maximum {hi:g}")
    return np.geomspace(hi, lo, num_box_len)


def exact_box_counts(structure: Structure, neighbor_list: NeighborList,
                     surface_flags: SurfaceFlags | None, lengths, rm_in_surf: bool = True,
                     num_cpus: int = 1, keep_boxes: bool = False):
    """Box counts for every length; returns the series and, optionally, the
    per-length classifications."""
    counter = _ExactCounter(structure, neighbor_list, surface_flags, rm_in_surf)
    results = [exact_box_count(structure, neighbor_list, surface_flags, l, rm_in_surf,
                               num_cpus, _counter=counter) for l in lengths]
    counts = np.array([r.count for r in results], dtype=np.int64)
    if np.any(counts == 0):
        raise NumericError("no surface boxes found at some box length")
    series = BoxCountSeries(np.asarray(lengths, dtype=float), counts)
    return (series, results) if keep_boxes else series
