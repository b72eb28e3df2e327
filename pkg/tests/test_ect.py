import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_bits
from oracles import curve_oracle, distance_sq_oracle
from voxect import (
    BinaryVolume,
    GridCurveEngine,
    SplitMix64,
    cell_counts,
    compute_ect,
    ect_distance,
    ect_distance_sq,
    euler_characteristic,
    euler_curve,
    resolve_threads,
    sample_directions,
    vertex_height,
)

shapes = st.tuples(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
seeds = st.integers(0, 200)


def _unit(seed):
    return SplitMix64(seed).unit_vector()


class TestSplitMix:
    def test_known_stream_for_seed_zero(self):
        # reference stream of the standard splitmix64 algorithm
        rng = SplitMix64(0)
        assert [rng.next_u64() for _ in range(3)] == [
            0xE220A8397B1DCDAF,
            0x6E789E6AA1B965F4,
            0x06C45D188009454F,
        ]

    def test_uniform_in_half_open_unit(self):
        rng = SplitMix64(12345)
        draws = [rng.uniform() for _ in range(2000)]
        assert all(0.0 < u <= 1.0 for u in draws)

    def test_unit_vectors_are_unit(self):
        rng = SplitMix64(7)
        for _ in range(100):
            v = rng.unit_vector()
            assert abs(math.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2) - 1.0) < 1e-12


class TestDirections:
    def test_random_mode_reproducible(self):
        a = sample_directions(32, seed=9)
        b = sample_directions(32, seed=9)
        assert a == b
        assert a.directions.tobytes() == b.directions.tobytes()

    def test_seeds_differ(self):
        assert sample_directions(8, seed=0) != sample_directions(8, seed=1)

    def test_rows_are_unit(self):
        d = sample_directions(64, seed=3).directions
        norms = np.sqrt((d * d).sum(axis=1))
        assert np.abs(norms - 1.0).max() < 1e-12

    def test_fibonacci_is_seedless_and_spread(self):
        a = sample_directions(50, seed=1, mode="fibonacci")
        b = sample_directions(50, seed=2, mode="fibonacci")
        assert a.seed is None and a == b
        # no two directions nearly parallel
        dots = a.directions @ a.directions.T
        np.fill_diagonal(dots, -1.0)
        assert dots.max() < 0.999

    def test_bad_count(self):
        with pytest.raises(ValueError):
            sample_directions(0)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            sample_directions(4, mode="spiral")


class TestVertexHeight:
    def test_axis_directions_pick_coordinates(self):
        assert vertex_height((3, 5, 7), (1.0, 0.0, 0.0)) == 3.0
        assert vertex_height((3, 5, 7), (0.0, 0.0, 1.0)) == 7.0

    @given(seeds)
    def test_matches_left_associated_formula(self, seed):
        u = _unit(seed)
        v = (2, 4, 1)
        expected = (2.0 * u[0] + 4.0 * u[1]) + 1.0 * u[2]
        assert vertex_height(v, u) == expected


class TestEulerCurve:
    def test_two_voxel_column(self):
        bits = np.zeros((1, 1, 3), dtype=bool)
        bits[0, 0, 0] = True
        bits[0, 0, 2] = True
        c = euler_curve(BinaryVolume(bits), (0.0, 0.0, 1.0), 4, "grid")
        assert c.samples.tolist() == [1, 1, 1, 1, 2]
        assert (c.h_min, c.h_max) == (0.0, 2.0)

    def test_empty_volume_grid_range_is_all_zero(self):
        b = BinaryVolume(np.zeros((2, 3, 2), dtype=bool))
        c = euler_curve(b, (0.0, 0.0, 1.0), 30, "grid")
        assert c.samples.tolist() == [0] * 31

    def test_empty_volume_complex_range_rejected(self):
        b = BinaryVolume(np.zeros((2, 2, 2), dtype=bool))
        with pytest.raises(ValueError):
            euler_curve(b, (0.0, 0.0, 1.0), 4, "complex")

    def test_bad_steps(self):
        b = BinaryVolume(np.ones((1, 1, 1), dtype=bool))
        with pytest.raises(ValueError):
            euler_curve(b, (0.0, 0.0, 1.0), 0)

    @given(seeds, shapes, st.integers(1, 16), st.sampled_from(["grid", "complex"]))
    def test_matches_oracle_random_directions(self, seed, shape, steps, range_mode):
        bits = random_bits(seed, shape)
        if not bits.any():
            bits[0, 0, 0] = True
        u = _unit(seed + 1)
        c = euler_curve(BinaryVolume(bits), u, steps, range_mode)
        assert c.samples.tolist() == curve_oracle(bits, u, steps, range_mode)

    @given(seeds, shapes, st.sampled_from([
        (1.0, 0.0, 0.0), (0.0, -1.0, 0.0), (0.0, 0.0, 1.0),
    ]))
    def test_matches_oracle_axis_directions(self, seed, shape, u):
        # axis directions maximize height ties between cells
        bits = random_bits(seed, shape)
        if not bits.any():
            bits[0, 0, 0] = True
        c = euler_curve(BinaryVolume(bits), u, 8, "complex")
        assert c.samples.tolist() == curve_oracle(bits, u, 8, "complex")

    @given(seeds, shapes)
    def test_final_sample_is_total_chi(self, seed, shape):
        bits = random_bits(seed, shape)
        b = BinaryVolume(bits)
        u = _unit(seed)
        c = euler_curve(b, u, 7, "grid")
        assert c.samples[-1] == euler_characteristic(cell_counts(b))

    @given(seeds, shapes)
    def test_first_sample_nonzero_in_complex_mode(self, seed, shape):
        bits = random_bits(seed, shape)
        if not bits.any():
            bits[0, 0, 0] = True
        c = euler_curve(BinaryVolume(bits), _unit(seed), 5, "complex")
        # the lowest vertex enters exactly at h_min
        assert c.samples[0] >= 1

    @given(seeds, shapes, st.integers(1, 8))
    def test_doubling_steps_preserves_shared_samples(self, seed, shape, steps):
        bits = random_bits(seed, shape)
        if not bits.any():
            bits[0, 0, 0] = True
        b = BinaryVolume(bits)
        u = _unit(seed + 5)
        coarse = euler_curve(b, u, steps, "complex")
        fine = euler_curve(b, u, 2 * steps, "complex")
        assert fine.samples[::2].tolist() == coarse.samples.tolist()
        assert fine.sample_heights()[::2].tolist() == coarse.sample_heights().tolist()

    def test_sample_heights_end_exactly_at_h_max(self):
        bits = np.ones((3, 2, 4), dtype=bool)
        c = euler_curve(BinaryVolume(bits), _unit(11), 13, "grid")
        hs = c.sample_heights()
        assert hs[0] == c.h_min
        assert hs[-1] == c.h_max
        assert np.all(np.diff(hs) >= 0)


class TestComputeEct:
    def test_rows_match_single_curves(self):
        b = BinaryVolume(random_bits(3, (3, 3, 3)))
        dirs = sample_directions(16, seed=4)
        m = compute_ect(b, dirs, 9, "grid")
        for i in range(16):
            single = euler_curve(b, tuple(dirs.directions[i]), 9, "grid")
            assert m.curves[i].tolist() == single.samples.tolist()
            assert m.h_mins[i] == single.h_min
            assert m.h_maxs[i] == single.h_max

    def test_full_block_rows_end_at_one(self):
        b = BinaryVolume(np.ones((2, 2, 2), dtype=bool))
        m = compute_ect(b, sample_directions(50, seed=0), 30, "grid")
        assert np.all(m.curves[:, -1] == 1)

    def test_thread_counts_agree_bitwise(self):
        b = BinaryVolume(random_bits(8, (4, 4, 4)))
        dirs = sample_directions(24, seed=2)
        m1 = compute_ect(b, dirs, 12, "grid", threads=1)
        m4 = compute_ect(b, dirs, 12, "grid", threads=4)
        assert m1.curves.tobytes() == m4.curves.tobytes()
        assert m1.h_mins.tobytes() == m4.h_mins.tobytes()
        assert m1.h_maxs.tobytes() == m4.h_maxs.tobytes()


class TestDistance:
    def test_single_voxel_disagreement_is_one(self):
        a = BinaryVolume(np.ones((1, 1, 1), dtype=bool))
        z = BinaryVolume(np.zeros((1, 1, 1), dtype=bool))
        dirs = sample_directions(5, seed=3)
        A = compute_ect(a, dirs, 6, "grid")
        Z = compute_ect(z, dirs, 6, "grid")
        assert ect_distance_sq(A, Z) == 1.0

    def test_self_distance_zero(self):
        b = BinaryVolume(random_bits(1, (3, 3, 3)))
        dirs = sample_directions(10, seed=1)
        M = compute_ect(b, dirs, 8, "grid")
        assert ect_distance_sq(M, M) == 0.0

    @given(seeds)
    def test_symmetry_exact(self, seed):
        a = BinaryVolume(random_bits(seed, (3, 3, 3)))
        b = BinaryVolume(random_bits(seed + 999, (3, 3, 3)))
        dirs = sample_directions(8, seed=0)
        A = compute_ect(a, dirs, 6, "grid")
        B = compute_ect(b, dirs, 6, "grid")
        assert ect_distance_sq(A, B) == ect_distance_sq(B, A)

    @given(st.integers(0, 60))
    def test_triangle_inequality(self, seed):
        dirs = sample_directions(8, seed=5)
        vols = [BinaryVolume(random_bits(seed * 3 + i, (4, 4, 4))) for i in range(3)]
        A, B, C = (compute_ect(v, dirs, 8, "grid") for v in vols)
        ab, bc, ac = ect_distance(A, B), ect_distance(B, C), ect_distance(A, C)
        assert ac <= ab + bc + 1e-9

    @given(seeds)
    def test_matches_plain_double_loop(self, seed):
        a = BinaryVolume(random_bits(seed, (4, 3, 4)))
        b = BinaryVolume(random_bits(seed + 47, (4, 3, 4)))
        dirs = sample_directions(12, seed=6)
        A = compute_ect(a, dirs, 10, "grid")
        B = compute_ect(b, dirs, 10, "grid")
        ref = distance_sq_oracle(
            A.curves.tolist(), B.curves.tolist(),
            A.h_mins.tolist(), A.h_maxs.tolist(), 10,
        )
        assert ect_distance_sq(A, B) == pytest.approx(ref, rel=1e-12)

    def test_incompatible_matrices_rejected(self):
        a = BinaryVolume(random_bits(0, (2, 2, 2)))
        b = BinaryVolume(random_bits(1, (2, 2, 3)))
        dirs = sample_directions(4, seed=0)
        A = compute_ect(a, dirs, 5, "grid")
        with pytest.raises(ValueError):
            ect_distance_sq(A, compute_ect(b, dirs, 5, "grid"))
        with pytest.raises(ValueError):
            ect_distance_sq(A, compute_ect(a, dirs, 5, "complex"))
        with pytest.raises(ValueError):
            ect_distance_sq(A, compute_ect(a, sample_directions(4, seed=1), 5, "grid"))


class TestGridEngine:
    @given(st.integers(0, 120))
    @settings(max_examples=120)
    def test_gap_matches_composed_path_bitwise(self, seed):
        shape = (4, 4, 4)
        a = BinaryVolume(random_bits(seed, shape))
        b = BinaryVolume(random_bits(seed + 5000, shape))
        dirs = sample_directions(10, seed=seed % 7)
        steps = 6 + seed % 5
        engine = GridCurveEngine(shape, dirs, steps)
        fast = engine.curve_gap_sq(a, b)
        A = compute_ect(a, dirs, steps, "grid")
        B = compute_ect(b, dirs, steps, "grid")
        assert fast == ect_distance_sq(A, B)

    def test_engine_reusable_across_pairs(self):
        shape = (3, 3, 3)
        dirs = sample_directions(6, seed=0)
        engine = GridCurveEngine(shape, dirs, 5)
        for seed in range(5):
            a = BinaryVolume(random_bits(seed, shape))
            b = BinaryVolume(random_bits(seed + 50, shape))
            A = compute_ect(a, dirs, 5, "grid")
            B = compute_ect(b, dirs, 5, "grid")
            assert engine.curve_gap_sq(a, b) == ect_distance_sq(A, B)


class TestResolveThreads:
    def test_explicit_argument_wins(self, monkeypatch):
        monkeypatch.setenv("ECT_THREADS", "2")
        assert resolve_threads(5) == 5

    def test_environment_fallback(self, monkeypatch):
        monkeypatch.setenv("ECT_THREADS", "3")
        assert resolve_threads(None) == 3

    def test_default_at_least_one(self, monkeypatch):
        monkeypatch.delenv("ECT_THREADS", raising=False)
        assert resolve_threads(None) >= 1

    def test_garbage_env_rejected(self, monkeypatch):
        monkeypatch.setenv("ECT_THREADS", "lots")
        with pytest.raises(ValueError):
            resolve_threads(None)
