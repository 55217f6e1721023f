import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from framelab import (
    COMPLEX,
    REAL,
    Frame,
    VectorPair,
    a0_denominator,
    basis_frame,
    diluted_tight_frame,
    estimate_a0,
    estimate_stability_constant,
    frame_bounds_l2,
    grid_a0_2d,
    grid_certified_stability_2d,
    l4_stability_from_a0,
    magnitude_gap,
    random_gaussian_frame,
    stability_ratio,
)
from framelab.stability import (
    SearchConfig,
    a0_denominator_nuclear,
    a0_numerator,
    batch_ratios,
    sample_min_ratio,
    sample_orthogonal_pair,
)

seeds = st.integers(0, 2**32 - 1)

# Frozen from two independent methods (certified branch-and-bound on the
# orthogonal parametrization and batched multistart on the sphere), which
# agreed to 1e-8 for k in {1, 4, 16, 64} and across ten seeds.
DILUTED_C2 = 1.14907669


def _cplx(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def test_denominator_identity_on_many_pairs():
    rng = np.random.default_rng(0)
    n, N = 4, 100_000
    X = rng.standard_normal((N, n)) + 1j * rng.standard_normal((N, n))
    Y = rng.standard_normal((N, n)) + 1j * rng.standard_normal((N, n))
    ip = np.sum(X * Y.conj(), axis=1)
    direct = (np.sum(np.abs(X - Y) ** 2, 1) * np.sum(np.abs(X + Y) ** 2, 1)
              - 4 * ip.imag ** 2)
    nuclear = (np.sum(np.abs(X) ** 2, 1) + np.sum(np.abs(Y) ** 2, 1)) ** 2 - 4 * np.abs(ip) ** 2
    scale = (np.sum(np.abs(X) ** 2, 1) + np.sum(np.abs(Y) ** 2, 1)) ** 2
    assert np.max(np.abs(direct - nuclear) / scale) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 4))
def test_denominator_is_squared_nuclear_norm(seed, n):
    rng = np.random.default_rng(seed)
    pair = VectorPair(_cplx(rng, n), _cplx(rng, n))
    M = np.outer(pair.x, pair.x.conj()) - np.outer(pair.y, pair.y.conj())
    nuc = np.sum(np.linalg.svd(M, compute_uv=False))
    assert a0_denominator(pair) == pytest.approx(nuc ** 2, rel=1e-9, abs=1e-12)
    assert a0_denominator_nuclear(pair) == pytest.approx(nuc ** 2, rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(2, 4), theta=st.floats(0, 6.3), t=st.floats(0.1, 10))
def test_ratio_invariant_under_phase_and_scale(seed, n, theta, t):
    rng = np.random.default_rng(seed)
    f = random_gaussian_frame(n, 3 * n, COMPLEX, rng)
    pair = VectorPair(_cplx(rng, n), _cplx(rng, n))
    r = stability_ratio(f, pair, 3)
    moved = VectorPair(t * np.exp(1j * theta) * pair.x, t * pair.y)
    assert stability_ratio(f, moved, 3) == pytest.approx(r, rel=1e-8)


def test_ratio_undefined_for_equivalent_pair():
    f = diluted_tight_frame(1)
    x = np.array([1.0, 2j])
    with pytest.raises(ValueError):
        stability_ratio(f, VectorPair(x, 1j * x))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 5), s=st.floats(0, 1), real=st.booleans())
def test_sampled_orthogonal_pair_shape(seed, n, s, real):
    pair = sample_orthogonal_pair(n, REAL if real else COMPLEX, s, np.random.default_rng(seed))
    assert abs(pair.inner) < 1e-12
    assert np.linalg.norm(pair.x) ** 2 + np.linalg.norm(pair.y) ** 2 == pytest.approx(1.0)
    if real:
        assert np.all(pair.x.imag == 0) and np.all(pair.y.imag == 0)


def test_batch_ratios_match_scalar():
    rng = np.random.default_rng(3)
    f = random_gaussian_frame(3, 9, COMPLEX, rng)
    X = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    Y = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    got = batch_ratios(f, X, Y, 4)
    want = [stability_ratio(f, VectorPair(x, y), 4) for x, y in zip(X, Y)]
    assert np.allclose(got, want, rtol=1e-12)


@pytest.mark.parametrize("k", [1, 4, 16, 64])
def test_grid_c2_of_diluted_frame(k):
    rep = grid_certified_stability_2d(diluted_tight_frame(k), 2.0, 1e-3, 0.02)
    assert rep.certified and rep.method == "grid2d"
    assert rep.c_estimate == pytest.approx(DILUTED_C2, rel=1e-6)
    assert rep.c_estimate <= rep.c_upper <= rep.c_estimate * 1.02 + 1e-12
    assert rep.witness.is_orthogonal(1e-9)
    # the reported ratio is attained by the witness
    assert stability_ratio(diluted_tight_frame(k), rep.witness) == pytest.approx(
        rep.min_ratio, rel=1e-9)


def test_multistart_agrees_with_grid():
    f = diluted_tight_frame(4)
    rep = estimate_stability_constant(f, 2.0, SearchConfig(restarts=64, seed=5))
    assert rep.c_estimate == pytest.approx(DILUTED_C2, rel=1e-4)
    assert rep.c_estimate >= frame_bounds_l2(f).lower ** -0.5


def test_multistart_is_deterministic():
    f = random_gaussian_frame(3, 10, COMPLEX, np.random.default_rng(1))
    a = estimate_stability_constant(f, 2.0, SearchConfig(restarts=16, seed=3))
    b = estimate_stability_constant(f, 2.0, SearchConfig(restarts=16, seed=3))
    assert a.min_ratio == b.min_ratio
    assert np.array_equal(a.witness.x, b.witness.x)


@pytest.mark.parametrize("seed", [0, 1])
def test_grid_and_multistart_on_random_frames(seed):
    f = random_gaussian_frame(2, 8, COMPLEX, np.random.default_rng(seed))
    g = grid_certified_stability_2d(f, 2.0)
    s = estimate_stability_constant(f, 2.0, SearchConfig(restarts=64, seed=seed))
    # the certified interval must contain the search estimate
    assert g.lower_ratio <= s.min_ratio * (1 + 1e-9)
    assert s.min_ratio == pytest.approx(g.min_ratio, rel=1e-3)


def test_grid_c4_of_diluted_frame_beats_witness_bound():
    rep = grid_certified_stability_2d(diluted_tight_frame(16), 4.0, 1e-3, 0.05)
    assert rep.c_estimate >= 32 ** 0.25 - 1e-3


def test_real_basis_fails_phase_retrieval():
    f = basis_frame(2, REAL)
    rep = estimate_stability_constant(f, 2.0, SearchConfig(restarts=16, seed=0))
    assert rep.fails and rep.c_estimate == math.inf
    assert rep.to_dict()["c_estimate"] == "inf"
    g = grid_certified_stability_2d(f, 2.0)
    assert g.fails
    assert magnitude_gap(f, g.witness) < 1e-9


def test_grid_needs_dimension_two():
    with pytest.raises(ValueError):
        grid_certified_stability_2d(basis_frame(3), 2.0)


@pytest.mark.parametrize("k", [1, 4, 16])
def test_a0_of_diluted_frame(k):
    # derived by hand: the minimizing orthogonal pair is ((1,0)/sqrt2, (0,1)/sqrt2),
    # giving sum of squared differences 2/(4k) over denominator 1
    f = diluted_tight_frame(k)
    assert estimate_a0(f, SearchConfig(restarts=64, seed=0)).a0_estimate == pytest.approx(
        0.5 / k, rel=1e-6)
    assert grid_a0_2d(f).a0_estimate == pytest.approx(0.5 / k, rel=1e-6)


def test_a0_witness_attains_estimate():
    f = random_gaussian_frame(3, 9, COMPLEX, np.random.default_rng(2))
    rep = estimate_a0(f, SearchConfig(restarts=32, seed=1))
    w = rep.witness
    assert a0_numerator(f, w) / a0_denominator(w) == pytest.approx(rep.a0_estimate, rel=1e-8)


def test_a0_sanity_cases():
    assert estimate_a0(Frame(COMPLEX, np.ones((1, 1)))).a0_estimate == pytest.approx(1.0, abs=1e-6)
    rep = estimate_a0(basis_frame(2, REAL))
    assert rep.a0_estimate < 1e-8
    assert magnitude_gap(basis_frame(2, REAL), rep.witness) < 1e-8


def test_a0_bounded_by_sampled_pairs():
    rng = np.random.default_rng(4)
    f = random_gaussian_frame(2, 6, COMPLEX, rng)
    a0 = grid_a0_2d(f).a0_estimate
    for _ in range(2000):
        pair = VectorPair(_cplx(rng, 2), _cplx(rng, 2))
        assert a0 <= a0_numerator(f, pair) / a0_denominator(pair) * (1 + 1e-9)


def test_l4_constant():
    assert l4_stability_from_a0(2.0, 1.0) == 1.0
    assert l4_stability_from_a0(0.5, 2.0) == pytest.approx(2.0 * math.sqrt(2))
    with pytest.raises(ValueError):
        l4_stability_from_a0(0.0, 1.0)


def test_sampled_orthogonal_min_dominates_grid():
    f = random_gaussian_frame(2, 8, COMPLEX, np.random.default_rng(0))
    g = grid_certified_stability_2d(f, 2.0)
    for orth in (True, False):
        r, _ = sample_min_ratio(f, 2.0, 5000, np.random.default_rng(1), orthogonal=orth)
        assert r >= g.lower_ratio * (1 - 1e-9)
