"""Atomic and metallic radii tables, in angstrom.

Atomic radii are the calculated values of Clementi, Raimondi and Reinhardt
(J. Chem. Phys. 47, 1300, 1967). Metallic radii are the 12-coordinate values
tabulated by Greenwood and Earnshaw (Chemistry of the Elements, 2nd ed.);
only metals have an entry there.
"""

from __future__ import annotations

from enum import Enum

from .errors import UnknownElementError


class RadType(str, Enum):
    ATOMIC = "atomic"
    METALLIC = "metallic"


ATOMIC_RADII = {
    "H": 0.53, "He": 0.31,
    "Li": 1.67, "Be": 1.12, "B": 0.87, "C": 0.67, "N": 0.56, "O": 0.48,
    "F": 0.42, "Ne": 0.38,
    "Na": 1.90, "Mg": 1.45, "Al": 1.18, "Si": 1.11, "P": 0.98, "S": 0.88,
    "Cl": 0.79, "Ar": 0.71,
    "K": 2.43, "Ca": 1.94, "Sc": 1.84, "Ti": 1.76, "V": 1.71, "Cr": 1.66,
    "Mn": 1.61, "Fe": 1.56, "Co": 1.52, "Ni": 1.49, "Cu": 1.45, "Zn": 1.42,
    "Ga": 1.36, "Ge": 1.25, "As": 1.14, "Se": 1.03, "Br": 0.94, "Kr": 0.88,
    "Rb": 2.65, "Sr": 2.19, "Y": 2.12, "Zr": 2.06, "Nb": 1.98, "Mo": 1.90,
    "Tc": 1.83, "Ru": 1.78, "Rh": 1.73, "Pd": 1.69, "Ag": 1.65, "Cd": 1.61,
    "In": 1.56, "Sn": 1.45, "Sb": 1.33, "Te": 1.23, "I": 1.15, "Xe": 1.08,
    "Cs": 2.98, "Ba": 2.53,
    "Hf": 2.08, "Ta": 2.00, "W": 1.93, "Re": 1.88, "Os": 1.85, "Ir": 1.80,
    "Pt": 1.77, "Au": 1.74, "Hg": 1.71, "Tl": 1.56, "Pb": 1.54, "Bi": 1.43,
    "Po": 1.35, "At": 1.27, "Rn": 1.20,
}

METALLIC_RADII = {
    "Li": 1.52, "Be": 1.12, "Na": 1.86, "Mg": 1.60, "Al": 1.43,
    "K": 2.27, "Ca": 1.97, "Sc": 1.62, "Ti": 1.47, "V": 1.34, "Cr": 1.28,
    "Mn": 1.27, "Fe": 1.26, "Co": 1.25, "Ni": 1.24, "Cu": 1.28, "Zn": 1.34,
    "Ga": 1.35,
    "Rb": 2.48, "Sr": 2.15, "Y": 1.80, "Zr": 1.60, "Nb": 1.46, "Mo": 1.39,
    "Tc": 1.36, "Ru": 1.34, "Rh": 1.34, "Pd": 1.37, "Ag": 1.44, "Cd": 1.51,
    "In": 1.67, "Sn": 1.58,
    "Cs": 2.65, "Ba": 2.22,
    "Hf": 1.59, "Ta": 1.46, "W": 1.39, "Re": 1.37, "Os": 1.35, "Ir": 1.36,
    "Pt": 1.39, "Au": 1.44, "Hg": 1.51, "Tl": 1.70, "Pb": 1.75, "Bi": 1.82,
}

_TABLES = {RadType.ATOMIC: ATOMIC_RADII, RadType.METALLIC: METALLIC_RADII}


def normalise_symbol(symbol: str) -> str:
    symbol = symbol.strip()
    return symbol[:1].upper() + symbol[1:].lower()


def get_radius(symbol: str, rad_type: RadType | str = RadType.ATOMIC) -> float:
    """Radius of `symbol` from the requested table.

    Absent elements raise UnknownElementError; there is no fallback value.
    """
    rad_type = RadType(rad_type)
    key = normalise_symbol(symbol)
    try:
        return _TABLES[rad_type][key]
    except KeyError:
        raise UnknownElementError(symbol, rad_type.value) from None
