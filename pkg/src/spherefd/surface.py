"""Surface atom identification and inner/outer side classification."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, QhullError

from .errors import DegenerateGeometryError
from .neighbors import NeighborList
from .structure import Structure


class SurfaceAlgorithm(str, Enum):
    ALPHA_SHAPE = "alphaShape"
    CONVEX_HULL = "convexHull"
    NUM_NEIGH = "numNeigh"


@dataclass(frozen=True, eq=False)
class SurfaceFlags:
    flags: np.ndarray
    algorithm: SurfaceAlgorithm
    alpha_mult: float = 2.0
    num_neigh_threshold: int = 12
    alpha: float | None = None

    def __len__(self):
        return len(self.flags)

    def __getitem__(self, i):
        return bool(self.flags[i])

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.flags)

    @classmethod
    def all_surface(cls, n_atoms: int) -> "SurfaceFlags":
        """Every atom flagged; used when inner surfaces are kept."""
        return cls(np.ones(n_atoms, dtype=bool), SurfaceAlgorithm.NUM_NEIGH,
                   num_neigh_threshold=np.iinfo(np.int64).max)


# Relative size of the deterministic perturbation applied before triangulating.
# Lattice inputs are massively cospherical; the jitter breaks ties without
# moving any point by more than a rounding-level amount.
_JITTER = 1e-8
_JITTER_SEED = 20240917


def _check_non_degenerate(points):
    if len(points) < 4:
        raise DegenerateGeometryError(
            f"alpha shape needs at least 4 atoms, got {len(points)}; "
            "use the convexHull or numNeigh algorithm instead")
    centred = points - points.mean(axis=0)
    sv = np.linalg.svd(centred, compute_uv=False)
    if sv[2] <= 1e-10 * max(sv[0], 1e-300):
        raise DegenerateGeometryError(
            "atom centres are coplanar or collinear; alpha shape is undefined, "
            "use the convexHull or numNeigh algorithm instead")


def tetra_circumradii(points, simplices) -> np.ndarray:
    """Circumradius of each tetrahedron; flat tetrahedra get +inf."""
    a = points[simplices[:, 0]]
    u = points[simplices[:, 1]] - a
    v = points[simplices[:, 2]] - a
    w = points[simplices[:, 3]] - a
    vw = np.cross(v, w)
    wu = np.cross(w, u)
    uv = np.cross(u, v)
    det = 2.0 * np.einsum("ij,ij->i", u, vw)
    num = ((u * u).sum(1)[:, None] * vw + (v * v).sum(1)[:, None] * wu
           + (w * w).sum(1)[:, None] * uv)
    scale = np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1) * np.linalg.norm(w, axis=1)
    flat = np.abs(det) <= 1e-14 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.linalg.norm(num, axis=1) / np.abs(det)
    r[flat] = np.inf
    return r


def _triangulate(points):
    span = float(np.ptp(points, axis=0).max()) or 1.0
    rng = np.random.default_rng(_JITTER_SEED)
    jittered = points + rng.uniform(-1.0, 1.0, points.shape) * (_JITTER * span)
    return jittered, Delaunay(jittered)


def alpha_shape_flags(points, alpha: float) -> np.ndarray:
    """Atoms on the boundary of the alpha complex.

    Delaunay tetrahedra with circumradius below `alpha` are retained; atoms
    on faces bounding the retained region, and atoms belonging to no
    retained tetrahedron, are flagged.
    """
    points = np.asarray(points, dtype=float)
    _check_non_degenerate(points)
    jittered, tri = _triangulate(points)
    simplices = tri.simplices
    kept = simplices[tetra_circumradii(jittered, simplices) < alpha]

    flags = np.ones(len(points), dtype=bool)
    if len(kept):
        faces = np.sort(np.concatenate([kept[:, [0, 1, 2]], kept[:, [0, 1, 3]],
                                        kept[:, [0, 2, 3]], kept[:, [1, 2, 3]]]), axis=1)
        uniq, counts = np.unique(faces, axis=0, return_counts=True)
        covered = np.zeros(len(points), dtype=bool)
        covered[kept.ravel()] = True
        on_boundary = np.zeros(len(points), dtype=bool)
        on_boundary[uniq[counts == 1].ravel()] = True
        flags = on_boundary | ~covered
    # points Qhull merged away (coincident atoms) inherit their partner's flag
    if len(tri.coplanar):
        flags[tri.coplanar[:, 0]] = flags[tri.coplanar[:, 2]]
    return flags


def convex_hull_flags(points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    flags = np.zeros(len(points), dtype=bool)
    try:
        _check_non_degenerate(points)
        hull = ConvexHull(points)
    except (DegenerateGeometryError, QhullError):
        # every point of a flat or tiny set lies on its hull
        flags[:] = True
        return flags
    flags[hull.vertices] = True
    return flags


def num_neigh_flags(neighbor_list: NeighborList, threshold: int) -> np.ndarray:
    return neighbor_list.coordination() < threshold


def find_surface_atoms(structure: Structure, neighbor_list: NeighborList,
                       algorithm: SurfaceAlgorithm | str = SurfaceAlgorithm.ALPHA_SHAPE,
                       alpha_mult: float = 2.0, num_neigh_threshold: int = 12) -> SurfaceFlags:
    """Flag surface atoms using the alpha shape, convex hull or coordination count.

    For the alpha shape, alpha is ``alpha_mult * R_min``; the default of 2
    makes it the smallest atomic diameter.
    """
    algorithm = SurfaceAlgorithm(algorithm)
    alpha = None
    if algorithm is SurfaceAlgorithm.ALPHA_SHAPE:
        if not alpha_mult > 0:
            raise ValueError("alpha_mult must be positive")
        alpha = alpha_mult * structure.r_min
        flags = alpha_shape_flags(structure.positions, alpha)
    elif algorithm is SurfaceAlgorithm.CONVEX_HULL:
        flags = convex_hull_flags(structure.positions)
    else:
        flags = num_neigh_flags(neighbor_list, num_neigh_threshold)
    return SurfaceFlags(flags, algorithm, alpha_mult, num_neigh_threshold, alpha)


class InnerSideTester:
    """Vectorised inner/outer side test around surface atoms.

    Per-atom neighbour classification is computed once and cached, so the
    test can be applied to many points (surface samples or box centres).
    """

    def __init__(self, structure: Structure, neighbor_list: NeighborList,
                 surface_flags: SurfaceFlags | np.ndarray):
        self.positions = structure.positions
        self.neighbor_list = neighbor_list
        flags = surface_flags.flags if isinstance(surface_flags, SurfaceFlags) else surface_flags
        self.flags = np.asarray(flags, dtype=bool)
        self._cache = {}

    def _atom_data(self, i):
        data = self._cache.get(i)
        if data is not None:
            return data
        neigh = self.neighbor_list.neighbors[i]
        surf = neigh[self.flags[neigh]]
        inner = neigh[~self.flags[neigh]]
        if len(inner) == 0 or len(surf) < 2:
            data = None
        else:
            q_inner = self.positions[inner].mean(axis=0)
            pairs = [(a, b) for a, b in combinations(range(len(surf)), 2)
                     if np.any(self.neighbor_list.neighbors[surf[a]] == surf[b])]
            if not pairs:
                pairs = list(combinations(range(len(surf)), 2))
            data = (self.positions[surf], np.array(pairs, dtype=np.int64), q_inner)
        self._cache[i] = data
        return data

    def __call__(self, points, atom_index: int) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        points = points.reshape(-1, 3)
        data = self._atom_data(int(atom_index))
        if data is None:
            out = np.zeros(len(points), dtype=bool)
            return bool(out[0]) if single else out

        surf_pos, pairs, q_inner = data
        q = self.positions[atom_index]
        v1 = q_inner - q
        out = np.empty(len(points), dtype=bool)
        step = max(1, 2_000_000 // max(len(pairs), len(surf_pos)))
        for start in range(0, len(points), step):
            p = points[start:start + step]
            dist = np.linalg.norm(p[:, None, :] - surf_pos[None, :, :], axis=2)
            best = np.argmin(dist[:, pairs[:, 0]] + dist[:, pairs[:, 1]], axis=1)
            a = surf_pos[pairs[best, 0]] - q
            b = surf_pos[pairs[best, 1]] - q
            normal = np.cross(a, b)
            nlen = np.linalg.norm(normal, axis=1)
            collinear = nlen <= 1e-12 * np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
            s1 = normal @ v1
            s2 = np.einsum("ij,ij->i", normal, p - q)
            out[start:start + step] = ~(s1 * s2 < 0) & ~collinear
        return bool(out[0]) if single else out


def is_inner_side(p, atom_index: int, structure: Structure, neighbor_list: NeighborList,
                  surface_flags: SurfaceFlags) -> bool:
    """Whether point `p` lies on the inner side of surface atom `atom_index`.

    The plane through the atom and its two closest mutually-bonded surface
    neighbours splits space; `p` is inner when it falls on the same side as
    the mean of the atom's inner (non-surface) neighbours. Atoms without
    inner neighbours or without a usable plane report False.
    """
    return InnerSideTester(structure, neighbor_list, surface_flags)(p, atom_index)
