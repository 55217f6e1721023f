import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from framelab import (
    COMPLEX,
    REAL,
    Frame,
    FrameFormatError,
    VectorPair,
    analyze,
    basis_frame,
    diluted_tight_frame,
    frame_bounds_l2,
    frame_operator,
    magnitude_gap,
    min_phase_distance,
    p_frame_bounds,
    parse_frame,
    serialize_frame,
)
from framelab.frame import FrameBounds, load_frame, save_frame, upper_p_bound_estimate
from framelab.stability import SearchConfig


def _frame(seed, n, m, field=COMPLEX):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((m, n))
    if field == COMPLEX:
        v = v + 1j * rng.standard_normal((m, n))
    return Frame(field, v)


seeds = st.integers(0, 2**32 - 1)


def test_frame_is_read_only():
    f = diluted_tight_frame(2)
    with pytest.raises(ValueError):
        f.vectors[0, 0] = 3


def test_real_frame_rejects_imaginary_parts():
    with pytest.raises(ValueError):
        Frame(REAL, np.array([[1j, 0]]))


def test_frame_rejects_nonfinite():
    with pytest.raises(ValueError):
        Frame(COMPLEX, np.array([[np.nan, 1.0]]))


def test_analysis_uses_conjugate_of_frame_vector():
    f = Frame(COMPLEX, np.array([[1j, 0.0]]))
    assert analyze(f, np.array([1.0, 0.0]))[0] == -1j


def test_frame_operator_matches_sum_of_outer_products():
    f = _frame(3, 3, 7)
    S = sum(np.outer(v, v.conj()) for v in f.vectors)
    assert np.allclose(frame_operator(f), S, atol=1e-12)


def test_basis_bounds_are_one():
    b = frame_bounds_l2(basis_frame(4))
    assert (b.lower, b.upper) == (1.0, 1.0)


def test_rank_deficient_family_has_zero_lower_bound():
    f = Frame(REAL, np.array([[1.0, 0.0], [2.0, 0.0]]))
    b = frame_bounds_l2(f)
    assert b.lower == 0.0 and not b.is_frame


def test_bounds_type_invariants():
    with pytest.raises(ValueError):
        FrameBounds(2.0, 2.0, 1.0, "exact-eigen")
    with pytest.raises(ValueError):
        FrameBounds(3.0, 1.0, 2.0, "exact-eigen")


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 4), extra=st.integers(0, 6))
def test_l2_sandwich(seed, n, extra):
    f = _frame(seed, n, n + extra)
    b = frame_bounds_l2(f)
    rng = np.random.default_rng(seed + 1)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    energy = np.sum(np.abs(analyze(f, x)) ** 2)
    nx = np.linalg.norm(x) ** 2
    assert b.lower * nx * (1 - 1e-10) <= energy <= b.upper * nx * (1 + 1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 5))
def test_phase_distance_matches_dense_unimodular_grid(seed, n):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    lam = np.exp(2j * np.pi * np.arange(4096) / 4096)
    brute = np.min(np.linalg.norm(x[None, :] - lam[:, None] * y[None, :], axis=1))
    d = min_phase_distance(VectorPair(x, y))
    assert d <= brute + 1e-12
    # the grid spacing bounds how far the brute-force minimum can overshoot
    assert brute - d <= np.linalg.norm(y) * np.pi / 4096 * 1.01 + 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 5))
def test_real_phase_distance(seed, n):
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal(n), rng.standard_normal(n)
    d = min_phase_distance(VectorPair(x, y), REAL)
    assert d == pytest.approx(min(np.linalg.norm(x - y), np.linalg.norm(x + y)), abs=1e-14)
    assert d >= min_phase_distance(VectorPair(x, y), COMPLEX) - 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 4), theta=st.floats(0, 2 * math.pi))
def test_magnitude_gap_phase_invariant(seed, n, theta):
    f = _frame(seed, n, 2 * n + 1)
    rng = np.random.default_rng(seed + 7)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    g = magnitude_gap(f, VectorPair(x, y), 3)
    g2 = magnitude_gap(f, VectorPair(np.exp(1j * theta) * x, y), 3)
    assert g2 == pytest.approx(g, rel=1e-10, abs=1e-12)


def test_magnitude_gap_rejects_small_p():
    f = basis_frame(2)
    with pytest.raises(ValueError):
        magnitude_gap(f, VectorPair([1, 0], [0, 1]), 0.5)


def test_p2_search_bounds_are_square_roots_of_eigenvalues():
    f = _frame(11, 3, 8)
    b = frame_bounds_l2(f)
    fb = p_frame_bounds(f, 2, SearchConfig(restarts=32, seed=1))
    assert fb.lower == pytest.approx(math.sqrt(b.lower), rel=1e-6)
    assert fb.upper == pytest.approx(math.sqrt(b.upper), rel=1e-6)


def test_p_bounds_on_basis():
    fb = p_frame_bounds(basis_frame(2, REAL), 4, SearchConfig(restarts=16, seed=0))
    # ||x||_4 over the unit circle runs from 2^(1/4 - 1/2) to 1
    assert fb.lower == pytest.approx(2 ** -0.25, rel=1e-6)
    assert fb.upper == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_p_bounds_monotone_in_p(seed):
    f = _frame(seed, 2, 6)
    cfg = SearchConfig(restarts=32, seed=seed)
    b2 = p_frame_bounds(f, 2, cfg)
    b4 = p_frame_bounds(f, 4, cfg)
    b6 = p_frame_bounds(f, 6, cfg)
    assert b2.upper >= b4.upper - 1e-9 >= b6.upper - 2e-9
    assert b2.lower >= b4.lower - 1e-6 >= b6.lower - 2e-6


def test_p_bound_witnesses_attain_reported_values():
    f = _frame(5, 3, 9)
    fb = p_frame_bounds(f, 3, SearchConfig(restarts=32, seed=0))
    for w, val in ((fb.lower_witness, fb.lower), (fb.upper_witness, fb.upper)):
        assert np.linalg.norm(w) == pytest.approx(1.0, rel=1e-12)
        assert np.sum(np.abs(analyze(f, w)) ** 3) ** (1 / 3) == pytest.approx(val, rel=1e-9)


def test_upper_p_bound_estimate():
    assert upper_p_bound_estimate(4.0, 10, 4) == pytest.approx(2.0)


# --- file format


def test_round_trip_is_exact():
    f = _frame(1, 3, 5)
    g = parse_frame(serialize_frame(f))
    assert np.array_equal(f.vectors, g.vectors) and g.field == COMPLEX


def test_round_trip_real_with_label(tmp_path):
    f = Frame(REAL, np.array([[0.1, 1 / 3], [2.0, -7.25]]), label="demo")
    path = tmp_path / "f.json"
    save_frame(f, path)
    text = path.read_text()
    assert '    [0.1, 0.3333333333333333],' in text
    g = load_frame(path)
    assert g.label == "demo" and np.array_equal(f.vectors, g.vectors)
    assert serialize_frame(g) == text


def test_serialized_text_is_valid_json():
    obj = json.loads(serialize_frame(diluted_tight_frame(1)))
    assert obj["vectors"][-1] == [[1.0, 0.0], [0.0, -1.0]]


@pytest.mark.parametrize("text, match", [
    ("not json", "malformed"),
    ("[]", "object"),
    ('{"field": "quaternion", "dim": 1, "vectors": [[1]]}', "field"),
    ('{"field": "real", "dim": 2, "vectors": [[1, 0], [1]]}', "dimension mismatch"),
    ('{"field": "real", "dim": 1, "vectors": [[[1, 2]]]}', "imaginary"),
    ('{"field": "real", "dim": 1, "vectors": []}', "nonempty"),
    ('{"field": "real", "dim": 1, "vectors": [[true]]}', "boolean"),
    ('{"field": "real", "dim": 1, "vectors": [[1]], "extra": 0}', "unknown"),
    ('{"field": "complex", "dim": 1, "vectors": [[[1, 2, 3]]]}', "invalid entry"),
])
def test_parse_errors(text, match):
    with pytest.raises(FrameFormatError, match=match):
        parse_frame(text)
