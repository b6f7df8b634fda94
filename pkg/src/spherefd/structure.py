"""Atoms, structures and XYZ coordinate files."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, XyzParseError
from .radii import RadType, get_radius, normalise_symbol


@dataclass(frozen=True)
class Atom:
    element: str
    position: tuple[float, float, float]
    radius: float
    is_surface: bool = False

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"atom radius must be positive, got {self.radius}")
        if not all(np.isfinite(self.position)):
            raise ValueError(f"atom position must be finite, got {self.position}")


def bounding_box(positions, radii=None):
    """Componentwise extrema of atom centres and the largest box extent.

    When every centre coincides (e.g. a single atom) the extent is zero and
    the largest atomic diameter is used instead, so downstream grids never
    collapse to zero size.

    Returns
    -------
    min_xyz, max_xyz : (3,) arrays
    max_range : float
    """
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    if len(positions) == 0:
        raise InputError("bounding box of an empty atom set is undefined")
    min_xyz = positions.min(axis=0)
    max_xyz = positions.max(axis=0)
    max_range = float((max_xyz - min_xyz).max())
    if max_range == 0.0:
        if radii is None:
            raise InputError("degenerate bounding box needs atom radii")
        max_range = 2.0 * float(np.max(radii))
    return min_xyz, max_xyz, max_range


@dataclass(frozen=True, eq=False)
class Structure:
    """Ordered atoms stored column-wise.

    `positions` is (N, 3) in angstrom, `radii` is (N,). The bounding box
    fields are derived at construction.
    """

    elements: tuple[str, ...]
    positions: np.ndarray
    radii: np.ndarray
    min_xyz: np.ndarray = field(init=False)
    max_xyz: np.ndarray = field(init=False)
    max_range: float = field(init=False)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float).reshape(-1, 3)
        rad = np.array(self.radii, dtype=float).reshape(-1)
        if len(pos) == 0:
            raise InputError("a structure needs at least one atom")
        if len(pos) != len(rad) or len(pos) != len(self.elements):
            raise InputError("elements, positions and radii differ in length")
        if not np.all(np.isfinite(pos)):
            raise InputError("non-finite atom position")
        if not np.all(rad > 0):
            raise InputError("atom radii must be positive")
        pos.setflags(write=False)
        rad.setflags(write=False)
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "radii", rad)
        lo, hi, span = bounding_box(pos, rad)
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "min_xyz", lo)
        object.__setattr__(self, "max_xyz", hi)
        object.__setattr__(self, "max_range", span)

    @classmethod
    def from_elements(cls, elements: Sequence[str], positions,
                      rad_type: RadType | str = RadType.ATOMIC) -> "Structure":
        radii = [get_radius(e, rad_type) for e in elements]
        return cls(tuple(normalise_symbol(e) for e in elements), positions, radii)

    def __len__(self):
        return len(self.elements)

    @property
    def atoms(self) -> list[Atom]:
        return [Atom(e, tuple(p), float(r))
                for e, p, r in zip(self.elements, self.positions.tolist(), self.radii)]

    @property
    def r_min(self) -> float:
        return float(self.radii.min())

    @property
    def r_max(self) -> float:
        return float(self.radii.max())


def load_xyz(path, rad_type: RadType | str = RadType.ATOMIC) -> Structure:
    """Read a single-frame XYZ file.

    The first line holds the atom count, the second is a free comment, then
    one ``element x y z`` line per atom. Extra columns are ignored and atom
    order is preserved.
    """
    rad_type = RadType(rad_type)
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise XyzParseError("empty file", 1)
    try:
        count = int(lines[0].split()[0])
    except (ValueError, IndexError):
        raise XyzParseError(f"expected atom count, got {lines[0]!r}", 1) from None
    if count < 1:
        raise XyzParseError(f"atom count must be positive, got {count}", 1)

    body = lines[2:]
    # trailing blank lines are tolerated, anything else past `count` is not
    while len(body) > count and not body[-1].strip():
        body.pop()
    if len(body) != count:
        raise XyzParseError(
            f"header declares {count} atoms but {len(body)} coordinate lines follow",
            len(lines) if len(body) < count else 3 + count)

    elements = []
    positions = np.empty((count, 3))
    for i, line in enumerate(body):
        lineno = i + 3
        words = line.split()
        if len(words) < 4:
            raise XyzParseError(f"expected 'element x y z', got {line!r}", lineno)
        try:
            positions[i] = [float(w) for w in words[1:4]]
        except ValueError:
            raise XyzParseError(f"bad coordinate in {line!r}", lineno) from None
        if not np.all(np.isfinite(positions[i])):
            raise XyzParseError(f"non-finite coordinate in {line!r}", lineno)
        elements.append(words[0])
    return Structure.from_elements(elements, positions, rad_type)


def format_xyz(elements: Iterable[str], positions, comment: str = "") -> str:
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    elements = list(elements)
    out = [str(len(positions)), comment.replace("\n", " ")]
    for e, (x, y, z) in zip(elements, positions):
        out.append(f"{e:<3s} {x:.10f} {y:.10f} {z:.10f}")
    return "\n".join(out) + "\n"


def write_xyz(path, elements, positions, comment: str = "") -> Path:
    path = Path(path)
    path.write_text(format_xyz(elements, positions, comment))
    return path


def save_structure(structure: Structure, path, comment: str = "") -> Path:
    return write_xyz(path, structure.elements, structure.positions, comment)
