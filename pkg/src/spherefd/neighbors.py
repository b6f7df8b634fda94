"""Radius-scaled neighbour lists built with a cell list."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .structure import Structure


@dataclass(frozen=True, eq=False)
class NeighborList:
    """Per-atom neighbour indices (ascending) and matching centre distances."""

    neighbors: tuple[np.ndarray, ...]
    bond_lengths: tuple[np.ndarray, ...]
    rad_mult: float

    def __len__(self):
        return len(self.neighbors)

    def __getitem__(self, i):
        return self.neighbors[i]

    def pairs(self) -> np.ndarray:
        """All (i, j) pairs with i < j, sorted, as an (M, 2) int array."""
        rows = [np.column_stack([np.full(np.count_nonzero(n > i), i), n[n > i]])
                for i, n in enumerate(self.neighbors)]
        if not rows:
            return np.empty((0, 2), dtype=np.int64)
        return np.concatenate(rows).astype(np.int64)

    def coordination(self) -> np.ndarray:
        return np.array([len(n) for n in self.neighbors], dtype=np.int64)


def _from_pairs(n_atoms, i, j, dist, rad_mult) -> NeighborList:
    # symmetrise, then group by first index with ascending second index
    a = np.concatenate([i, j])
    b = np.concatenate([j, i])
    d = np.concatenate([dist, dist])
    order = np.lexsort((b, a))
    a, b, d = a[order], b[order], d[order]
    bounds = np.searchsorted(a, np.arange(n_atoms + 1))
    neigh = tuple(b[bounds[k]:bounds[k + 1]].copy() for k in range(n_atoms))
    lens = tuple(d[bounds[k]:bounds[k + 1]].copy() for k in range(n_atoms))
    return NeighborList(neigh, lens, float(rad_mult))


def _check_mult(rad_mult):
    if not rad_mult > 0:
        raise ValueError(f"rad_mult must be positive, got {rad_mult}")


def build_neighbor_list(structure: Structure, rad_mult: float = 1.2) -> NeighborList:
    """Neighbour pairs satisfying |r_i - r_j| <= (R_i + R_j) * rad_mult.

    Atoms are binned into cubic cells whose edge is the largest possible
    cutoff, so candidates only come from the 27 surrounding cells.
    """
    _check_mult(rad_mult)
    pos = structure.positions
    rad = structure.radii
    n = len(pos)
    if n < 2:
        return _from_pairs(n, *(np.empty(0, dtype=np.int64),) * 2, np.empty(0), rad_mult)

    edge = 2.0 * rad.max() * rad_mult
    cells = np.floor((pos - structure.min_xyz) / edge).astype(np.int64)
    dims = cells.max(axis=0) + 1
    keys = (cells[:, 0] * dims[1] + cells[:, 1]) * dims[2] + cells[:, 2]
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    uniq, starts = np.unique(sorted_keys, return_index=True)
    ends = np.append(starts[1:], len(order))
    lookup = {int(k): order[s:e] for k, s, e in zip(uniq, starts, ends)}

    out_i, out_j, out_d = [], [], []
    # half of the 27 offsets plus the home cell visits each cell pair once
    offsets = [o for o in product((-1, 0, 1), repeat=3) if o > (0, 0, 0)]
    for key in uniq:
        key = int(key)
        home = lookup[key]
        cz = key % dims[2]
        cy = (key // dims[2]) % dims[1]
        cx = key // (dims[1] * dims[2])
        # pairs inside the home cell
        if len(home) > 1:
            ii, jj = np.triu_indices(len(home), k=1)
            _collect(pos, rad, rad_mult, home[ii], home[jj], out_i, out_j, out_d)
        for dx, dy, dz in offsets:
            x, y, z = cx + dx, cy + dy, cz + dz
            if not (0 <= x < dims[0] and 0 <= y < dims[1] and 0 <= z < dims[2]):
                continue
            other = lookup.get(int((x * dims[1] + y) * dims[2] + z))
            if other is None:
                continue
            ii = np.repeat(home, len(other))
            jj = np.tile(other, len(home))
            _collect(pos, rad, rad_mult, ii, jj, out_i, out_j, out_d)

    if out_i:
        i = np.concatenate(out_i)
        j = np.concatenate(out_j)
        d = np.concatenate(out_d)
    else:
        i = j = np.empty(0, dtype=np.int64)
        d = np.empty(0)
    return _from_pairs(n, i, j, d, rad_mult)


def _collect(pos, rad, rad_mult, ii, jj, out_i, out_j, out_d):
    dist = np.linalg.norm(pos[ii] - pos[jj], axis=1)
    keep = dist <= (rad[ii] + rad[jj]) * rad_mult
    keep &= ii != jj
    out_i.append(ii[keep])
    out_j.append(jj[keep])
    out_d.append(dist[keep])


def brute_force_neighbor_list(structure: Structure, rad_mult: float = 1.2) -> NeighborList:
    """All-pairs O(N^2) reference with the same cutoff predicate."""
    _check_mult(rad_mult)
    pos = structure.positions
    rad = structure.radii
    ii, jj = np.triu_indices(len(pos), k=1)
    dist = np.linalg.norm(pos[ii] - pos[jj], axis=1)
    keep = dist <= (rad[ii] + rad[jj]) * rad_mult
    return _from_pairs(len(pos), ii[keep], jj[keep], dist[keep], rad_mult)
