from itertools import combinations

import numpy as np
import pytest

from sadmm.losses import LossKind, LossObjective
from sadmm.vr import BatchSampler, Snapshot, delta_b, variance_bound_rhs, vr_gradient

from helpers import QuadraticObjective, tiny_dataset


def make_objective(n=6, dim=4, seed=0, kind=None):
    data = tiny_dataset(n=n, dim=dim, seed=seed)
    return LossObjective(kind or LossKind.logistic(), data)


class TestDeltaB:
    def test_single_sample_batch(self):
        assert delta_b(5, 1) == 1.0

    def test_full_batch(self):
        assert delta_b(5, 5) == 0.0

    def test_direct_formula(self):
        assert delta_b(3, 2) == pytest.approx(0.25)

    def test_n_one_convention(self):
        assert delta_b(1, 1) == 0.0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            delta_b(5, 0)
        with pytest.raises(ValueError):
            delta_b(5, 6)

    def test_monotone_nonincreasing_in_b(self):
        for n in range(2, 12):
            vals = [delta_b(n, b) for b in range(1, n + 1)]
            assert all(a >= b for a, b in zip(vals, vals[1:]))
            assert all(0.0 <= v <= 1.0 for v in vals)


class TestSampler:
    def test_draw_shape_and_distinct(self):
        s = BatchSampler(10, 4, seed=1)
        idx = s.draw(2, 5)
        assert len(idx) == 4 == len(set(idx.tolist()))
        assert np.all(np.diff(idx) > 0)  # sorted

    def test_replayable(self):
        a = BatchSampler(20, 5, seed=7).draw(3, 11)
        b = BatchSampler(20, 5, seed=7).draw(3, 11)
        assert np.array_equal(a, b)

    def test_distinct_draws_differ(self):
        s = BatchSampler(50, 5, seed=7)
        assert not np.array_equal(s.draw(1, 1), s.draw(1, 2))

    def test_full_batch_is_arange(self):
        s = BatchSampler(6, 6, seed=3)
        assert np.array_equal(s.draw(1, 1), np.arange(6))

    def test_bad_batch_size(self):
        with pytest.raises(ValueError):
            BatchSampler(4, 5, seed=0)

    def test_uniform_pairs(self):
        # every 2-subset of 5 within 5 sigma of its expected frequency
        n, b, draws = 5, 2, 100_000
        s = BatchSampler(n, b, seed=123)
        counts = {}
        for k in range(draws):
            idx = tuple(s.draw(0, k))
            counts[idx] = counts.get(idx, 0) + 1
        n_pairs = 10
        p = 1.0 / n_pairs
        sigma = np.sqrt(draws * p * (1 - p))
        assert len(counts) == n_pairs
        for pair, c in counts.items():
            assert abs(c - draws * p) <= 5 * sigma, (pair, c)


class TestVRGradient:
    def test_at_snapshot_returns_full_grad(self):
        f = make_objective()
        x0 = np.full(f.dim, 0.3)
        snap = Snapshot(x0, f.full_grad(x0))
        g = vr_gradient(snap, f, x0, [2, 4])
        assert np.allclose(g, snap.full_grad, atol=1e-15)

    def test_full_batch_telescopes(self):
        f = make_objective()
        snap = Snapshot(np.zeros(f.dim), f.full_grad(np.zeros(f.dim)))
        x = np.random.default_rng(1).standard_normal(f.dim)
        g = vr_gradient(snap, f, x, np.arange(f.n))
        assert np.allclose(g, f.full_grad(x), atol=1e-12)

    def test_unbiased_by_enumeration(self):
        # averaging over all singleton batches reproduces the full gradient
        f = make_objective(n=3, dim=3, seed=5)
        x0 = np.full(3, -0.1)
        snap = Snapshot(x0, f.full_grad(x0))
        x = np.random.default_rng(2).standard_normal(3)
        est = np.mean([vr_gradient(snap, f, x, [i]) for i in range(3)], axis=0)
        true = f.full_grad(x)
        assert np.linalg.norm(est - true) <= 1e-12 * max(1.0, np.linalg.norm(true))

    def test_unbiased_all_sizes(self):
        for n in (4, 6, 8):
            f = make_objective(n=n, dim=4, seed=n)
            x0 = np.random.default_rng(n).standard_normal(4) * 0.5
            snap = Snapshot(x0, f.full_grad(x0))
            x = np.random.default_rng(n + 1).standard_normal(4)
            true = f.full_grad(x)
            for b in range(1, n + 1):
                est = np.mean(
                    [vr_gradient(snap, f, x, list(c)) for c in combinations(range(n), b)],
                    axis=0,
                )
                assert np.linalg.norm(est - true) <= 1e-12 * max(1.0, np.linalg.norm(true))

    def test_rejects_duplicates(self):
        f = make_objective()
        snap = Snapshot(np.zeros(f.dim), f.full_grad(np.zeros(f.dim)))
        with pytest.raises(ValueError):
            vr_gradient(snap, f, np.zeros(f.dim), [1, 1])

    def test_stale_snapshot_dimension(self):
        f = make_objective(dim=4)
        snap = Snapshot(np.zeros(3), np.zeros(3))
        with pytest.raises(Exception):
            vr_gradient(snap, f, np.zeros(4), [0])


def exhaustive_second_moment(snap, f, x, b):
    """E ||g - grad f(x)||^2 over all size-b batches, exactly."""
    true = f.full_grad(x)
    sq = [
        float(np.sum((vr_gradient(snap, f, x, list(c)) - true) ** 2))
        for c in combinations(range(f.n), b)
    ]
    return float(np.mean(sq))


class TestVarianceBound:
    def test_zero_at_snapshot(self):
        f = make_objective()
        x0 = np.full(f.dim, 0.2)
        snap = Snapshot(x0, f.full_grad(x0))
        assert variance_bound_rhs(snap, f, x0, f.smoothness, 2) == pytest.approx(0.0, abs=1e-12)

    def test_zero_at_full_batch(self):
        f = make_objective()
        snap = Snapshot(np.zeros(f.dim), f.full_grad(np.zeros(f.dim)))
        x = np.random.default_rng(3).standard_normal(f.dim)
        assert variance_bound_rhs(snap, f, x, f.smoothness, f.n) == 0.0

    def test_direct_recomputation(self):
        f = make_objective(n=5, dim=3, seed=8)
        x0 = np.random.default_rng(4).standard_normal(3) * 0.3
        snap = Snapshot(x0, f.full_grad(x0))
        x = np.random.default_rng(5).standard_normal(3)
        L, b = f.smoothness, 2
        expected = (
            2.0
            * L
            * delta_b(5, 2)
            * (f.value(x0) - f.value(x) + float((x - x0) @ f.full_grad(x)))
        )
        assert variance_bound_rhs(snap, f, x, L, b) == pytest.approx(max(expected, 0.0))

    @pytest.mark.parametrize("n", [4, 6, 8])
    def test_bound_dominates_exact_expectation(self, n):
        f = make_objective(n=n, dim=4, seed=n + 20)
        L = f.smoothness
        rng = np.random.default_rng(n)
        for trial in range(25):
            x0 = rng.standard_normal(4)
            x = rng.standard_normal(4)
            snap = Snapshot(x0, f.full_grad(x0))
            for b in {1, 2, n - 1, n}:
                lhs = exhaustive_second_moment(snap, f, x, b)
                rhs = variance_bound_rhs(snap, f, x, L, b)
                assert lhs <= rhs + 1e-10, (trial, b)

    def test_variance_zero_cases(self):
        f = make_objective(n=5, dim=3, seed=31)
        rng = np.random.default_rng(32)
        x0 = rng.standard_normal(3)
        snap = Snapshot(x0, f.full_grad(x0))
        assert exhaustive_second_moment(snap, f, x0, 2) == pytest.approx(0.0, abs=1e-25)
        x = rng.standard_normal(3)
        assert exhaustive_second_moment(snap, f, x, 5) == pytest.approx(0.0, abs=1e-25)


def test_works_with_quadratic_oracle():
    centers = np.random.default_rng(9).standard_normal((6, 3))
    f = QuadraticObjective(centers, q=2.0)
    x0 = np.zeros(3)
    snap = Snapshot(x0, f.full_grad(x0))
    x = np.array([1.0, -1.0, 0.5])
    est = np.mean([vr_gradient(snap, f, x, [i]) for i in range(6)], axis=0)
    assert np.allclose(est, f.full_grad(x), atol=1e-14)
