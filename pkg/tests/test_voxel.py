import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import cKDTree

from oracles import naive_block_count, reshape_block_count
from spherefd.neighbors import build_neighbor_list
from spherefd.structure import Structure
from spherefd.surface import SurfaceFlags, find_surface_atoms
from spherefd.synth import menger_sponge_grid
from spherefd.voxel import (BinaryGrid, count_boxes_grid, default_scales, fibonacci_sphere,
                            gen_surface_points, grid_frame, voxelise)


def random_dense(rng, n, density):
    return rng.random((n, n, n)) < density


class TestFibonacci:
    @pytest.mark.parametrize("n", [1, 2, 300, 10000])
    def test_unit_vectors(self, n):
        d = fibonacci_sphere(n)
        assert d.shape == (n, 3)
        np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0, atol=1e-12)

    @pytest.mark.parametrize("n", [300, 10000])
    def test_spread(self, n):
        d = fibonacci_sphere(n)
        dist, _ = cKDTree(d).query(d, k=2)
        assert dist[:, 1].min() > 0.5 * np.sqrt(4 * np.pi / n)
        assert abs(d.mean(axis=0)).max() < 1e-2

    def test_invalid(self):
        with pytest.raises(ValueError):
            fibonacci_sphere(0)


class TestSurfacePoints:
    def test_single_atom_keeps_all(self):
        s = Structure.from_elements(["Pd"], [[1, 2, 3]])
        flags = SurfaceFlags.all_surface(1)
        cloud = gen_surface_points(s, build_neighbor_list(s), flags, 10000, rm_in_surf=False)
        assert len(cloud) == 10000
        np.testing.assert_allclose(np.linalg.norm(cloud.points - [1, 2, 3], axis=1), 1.69)

    def test_two_atoms_cap_fraction(self):
        r = 1.69
        s = Structure.from_elements(["Pd", "Pd"], [[0, 0, 0], [r, 0, 0]])
        cloud = gen_surface_points(s, build_neighbor_list(s), SurfaceFlags.all_surface(2),
                                   10000, rm_in_surf=False)
        for i in (0, 1):
            kept = np.count_nonzero(cloud.owner_atom == i)
            assert kept == pytest.approx(7500, rel=0.02)

    def test_invariants_on_cluster(self, pd_octahedron):
        s = pd_octahedron
        nl = build_neighbor_list(s)
        flags = find_surface_atoms(s, nl)
        cloud = gen_surface_points(s, nl, flags, 500)
        own = cloud.owner_atom
        assert flags.flags[own].all()
        np.testing.assert_allclose(np.linalg.norm(cloud.points - s.positions[own], axis=1),
                                   s.radii[own], rtol=1e-9)
        d = np.linalg.norm(cloud.points[:, None] - s.positions[None], axis=2)
        assert (d >= s.radii[None] * (1 - 1e-9)).all()

    def test_inner_removal_only_removes(self, pd_octahedron):
        s = pd_octahedron
        nl = build_neighbor_list(s)
        flags = find_surface_atoms(s, nl)
        kept = gen_surface_points(s, nl, flags, 400, rm_in_surf=True)
        full = gen_surface_points(s, nl, flags, 400, rm_in_surf=False)
        a = {tuple(p) for p in kept.points}
        assert a <= {tuple(p) for p in full.points}
        assert len(kept) < len(full)

    def test_threads_identical(self, pd_octahedron):
        s = pd_octahedron
        nl = build_neighbor_list(s)
        flags = find_surface_atoms(s, nl)
        a = gen_surface_points(s, nl, flags, 300, num_cpus=1)
        b = gen_surface_points(s, nl, flags, 300, num_cpus=4)
        assert a.points.tobytes() == b.points.tobytes()
        assert (a.owner_atom == b.owner_atom).all()


class TestVoxelise:
    def test_lower_corner(self):
        g = voxelise([[1.0, 2.0, 3.0]], 16, [1.0, 2.0, 3.0], 4.0)
        assert g.count() == 1
        assert g.occupied_indices().tolist() == [[0, 0, 0]]

    def test_upper_corner_clamped(self):
        g = voxelise([[5.0, 6.0, 7.0]], 16, [1.0, 2.0, 3.0], 4.0)
        assert g.occupied_indices().tolist() == [[15, 15, 15]]

    def test_random_cloud_matches_mapping(self):
        rng = np.random.default_rng(8)
        pts = rng.uniform(-3, 5, (5000, 3))
        origin, edge, n = np.array([-3.0, -3.0, -3.0]), 8.0, 64
        g = voxelise(pts, n, origin, edge)
        ref = set()
        for p in pts:
            ref.add(tuple(min(n - 1, max(0, int(np.floor((p[a] - origin[a]) / edge * n))))
                          for a in range(3)))
        assert {tuple(map(int, v)) for v in g.occupied_indices()} == ref

    def test_padded_frame_encloses_spheres(self, pd_octahedron):
        origin, edge = grid_frame(pd_octahedron)
        s = pd_octahedron
        assert (s.positions - s.radii[:, None] >= origin - 1e-12).all()
        assert (s.positions + s.radii[:, None] <= origin + edge + 1e-12).all()


class TestGrid:
    def test_dense_roundtrip(self):
        rng = np.random.default_rng(0)
        for n in (1, 3, 8, 13, 64):
            dense = random_dense(rng, n, 0.3)
            g = BinaryGrid.from_dense(dense)
            assert (g.to_dense() == dense).all()
            assert g.count() == dense.sum()

    def test_single_voxel(self):
        dense = np.zeros((8, 8, 8), bool)
        dense[5, 2, 7] = True
        s = count_boxes_grid(BinaryGrid.from_dense(dense), [1, 2, 4, 8])
        assert s.counts.tolist() == [1, 1, 1, 1]

    def test_full_grid(self):
        s = count_boxes_grid(BinaryGrid.from_dense(np.ones((8, 8, 8), bool)), [1, 2, 4, 8])
        assert s.counts.tolist() == [1, 8, 64, 512]
        assert s.lengths.tolist() == [1.0, 0.5, 0.25, 0.125]

    def test_menger(self):
        s = count_boxes_grid(menger_sponge_grid(4), [1, 3, 9, 27])
        assert s.counts.tolist() == [20, 400, 8000, 160000]

    def test_scale_must_divide(self):
        g = BinaryGrid.empty(12)
        with pytest.raises(ValueError):
            count_boxes_grid(g, [5])

    def test_default_scales(self):
        assert default_scales(1024) == [1, 2, 4, 8, 16, 32, 64, 128, 256, 512]

    @pytest.mark.parametrize("n", [16, 24, 48, 36, 20])
    def test_pyramid_matches_naive(self, n):
        rng = np.random.default_rng(n)
        for density in (0.001, 0.02, 0.3):
            dense = random_dense(rng, n, density)
            if not dense.any():
                dense[0, 0, 0] = True
            scales = [s for s in range(1, n + 1) if n % s == 0]
            series = count_boxes_grid(BinaryGrid.from_dense(dense), scales)
            got = dict(zip(np.rint(series.lengths * n).astype(int), series.counts))
            for s in scales:
                assert got[s] == reshape_block_count(dense, s)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([8, 16, 32]), st.floats(0.001, 0.5))
def test_nesting_monotone(seed, n, density):
    dense = random_dense(np.random.default_rng(seed), n, density)
    dense[0, 0, 0] = True
    c = count_boxes_grid(BinaryGrid.from_dense(dense), default_scales(n) + [n]).counts
    # counts are ordered from the largest scale down
    for big, small in zip(c[:-1], c[1:]):
        assert big <= small <= 8 * big


def test_naive_oracles_agree():
    dense = random_dense(np.random.default_rng(1), 12, 0.05)
    for s in (1, 2, 3, 4, 6, 12):
        assert naive_block_count(dense, s) == reshape_block_count(dense, s)
