"""Deterministic validation structures: FCC nanoparticles and Menger sponges."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .radii import RadType, get_radius
from .structure import Structure
from .voxel import BinaryGrid

PD_LATTICE_CONSTANT = 3.89


class ShapeKind(str, Enum):
    SINGLE_ATOM = "singleAtom"
    FCC_OCTAHEDRON = "fccOctahedron"
    FCC_CUBE = "fccCube"
    FCC_TETRAHEDRON = "fccTetrahedron"


@dataclass(frozen=True)
class ShapeSpec:
    """What to build.

    `order` is the number of atoms along an edge for octahedra and
    tetrahedra, and the number of conventional cells along an edge for
    cubes. It is ignored for a single atom.
    """

    kind: ShapeKind
    element: str = "Pd"
    lattice_constant: float = PD_LATTICE_CONSTANT
    order: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ShapeKind(self.kind))
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not self.lattice_constant > 0:
            raise ValueError("lattice constant must be positive")

    @property
    def label(self) -> str:
        if self.kind is ShapeKind.SINGLE_ATOM:
            return f"{self.element}_single"
        return f"{self.element}_{self.kind.value}_{self.order}"


def _lattice_points(lo, hi, parity):
    r = np.arange(lo, hi + 1)
    ijk = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
    return ijk[(ijk.sum(axis=1) % 2) == parity]


def fcc_indices(spec: ShapeSpec) -> np.ndarray:
    """Integer FCC coordinates in units of half the lattice constant,
    sorted lexicographically."""
    m = spec.order
    if spec.kind is ShapeKind.SINGLE_ATOM:
        ijk = np.zeros((1, 3), dtype=np.int64)
    elif spec.kind is ShapeKind.FCC_OCTAHEDRON:
        s = m - 1
        ijk = _lattice_points(-s, s, s % 2)
        ijk = ijk[np.abs(ijk).sum(axis=1) <= s]
    elif spec.kind is ShapeKind.FCC_CUBE:
        ijk = _lattice_points(0, 2 * m, 0)
    else:
        s = m - 1
        ijk = _lattice_points(0, 2 * s, 0)
        x, y, z = ijk.T
        keep = ((x - y - z <= 0) & (-x + y - z <= 0) & (-x - y + z <= 0)
                & (x + y + z <= 2 * s))
        ijk = ijk[keep]
    order = np.lexsort((ijk[:, 2], ijk[:, 1], ijk[:, 0]))
    return ijk[order]


def generate_structure(spec: ShapeSpec, rad_type: RadType | str = RadType.ATOMIC) -> Structure:
    # fail on unknown elements before building anything
    get_radius(spec.element, rad_type)
    ijk = fcc_indices(spec)
    positions = ijk * (spec.lattice_constant / 2.0)
    return Structure.from_elements([spec.element] * len(ijk), positions, rad_type)


def menger_sponge_grid(level: int) -> BinaryGrid:
    """Menger sponge of the given level on a 3**level grid."""
    if not 0 <= level <= 5:
        raise ValueError(f"Menger level must be in [0, 5], got {level}")
    n = 3 ** level
    idx = np.indices((n, n, n)).reshape(3, -1)
    keep = np.ones(idx.shape[1], dtype=bool)
    for _ in range(level):
        holes = (idx % 3 == 1).sum(axis=0) >= 2
        keep &= ~holes
        idx //= 3
    return BinaryGrid.from_dense(keep.reshape(n, n, n), physical_edge=float(n))
