"""Finite frames: representation, file format, analysis and frame bounds.

Inner products are linear in the first argument and conjugate-linear in the
second, ``<u, v> = sum_i u_i * conj(v_i)``.  Every quantity computed in this
package depends only on magnitudes of inner products, so the choice never
changes a result; it is fixed here so that coefficient vectors are
reproducible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

REAL = "real"
COMPLEX = "complex"
FIELDS = (REAL, COMPLEX)

# lower l2 bound at or below this value means "not a frame"
FRAME_TOL = 1e-12


class FrameFormatError(ValueError):
    """Raised when frame-file text cannot be decoded into a Frame."""


def inner(u, v) -> complex:
    """``<u, v>`` with conjugation on the second argument."""
    return complex(np.vdot(np.asarray(v), np.asarray(u)))


def _as_vector(x, dim: Optional[int] = None) -> np.ndarray:
    arr = np.asarray(x, dtype=complex).reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.shape[0]}")
    return arr


@dataclass(frozen=True, eq=False)
class Frame:
    """An ordered family of ``m`` vectors in ``R^n`` or ``C^n``.

    The family need not span; ``frame_bounds_l2(f).lower > 0`` decides that.
    ``vectors`` is stored as a read-only ``(m, n)`` complex array.
    """

    field: str
    vectors: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        if self.field not in FIELDS:
            raise ValueError(f"field must be one of {FIELDS}, got {self.field!r}")
        vecs = np.array(self.vectors, dtype=complex, copy=True)
        if vecs.ndim != 2:
            raise ValueError("vectors must be a 2-d array of shape (m, n)")
        if vecs.shape[0] < 1 or vecs.shape[1] < 1:
            raise ValueError("a frame needs at least one vector of positive dimension")
        if not np.all(np.isfinite(vecs)):
            raise ValueError("frame entries must be finite")
        if self.field == REAL and np.any(vecs.imag != 0):
            raise ValueError("nonzero imaginary part in a real frame")
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def is_real(self) -> bool:
        return self.field == REAL

    def __len__(self):
        return self.m

    def __repr__(self):
        tag = f", label={self.label!r}" if self.label else ""
        return f"Frame(field={self.field!r}, n={self.dim}, m={self.m}{tag})"

    def with_vectors(self, vectors, label: Optional[str] = None) -> "Frame":
        return Frame(self.field, vectors, label if label is not None else self.label)


@dataclass(frozen=True)
class FrameBounds:
    """Lower/upper ``p``-frame bounds of a frame.

    For ``p == 2`` and ``method == "exact-eigen"`` these are the extreme
    eigenvalues of the frame operator (the squared norm form).  For the search
    methods they are bounds on ``||Theta x||_p`` for unit ``x``; the returned
    lower value is an upper estimate of the true infimum and the returned upper
    value a lower estimate of the true supremum.
    """

    p: float
    lower: float
    upper: float
    method: str
    restarts: int = 0
    resolution: Optional[float] = None
    lower_witness: Optional[np.ndarray] = field(default=None, compare=False)
    upper_witness: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.method not in ("exact-eigen", "grid", "multistart"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "exact-eigen" and self.p != 2:
            raise ValueError("exact-eigen bounds exist only for p = 2")
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")

    @property
    def is_frame(self) -> bool:
        return self.lower > FRAME_TOL

    def to_dict(self) -> dict:
        out = {
            "p": self.p,
            "lower": self.lower,
            "upper": self.upper,
            "method": self.method,
            "is_frame": self.is_frame,
        }
        if self.method != "exact-eigen":
            out["restarts"] = self.restarts
            out["resolution"] = self.resolution
        return out


@dataclass(frozen=True, eq=False)
class VectorPair:
    """Two vectors of equal length with their cached inner product."""

    x: np.ndarray
    y: np.ndarray
    inner: complex = field(init=False)

    def __post_init__(self):
        x = _as_vector(self.x)
        y = _as_vector(self.y, x.shape[0])
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "inner", inner(x, y))

    @property
    def dim(self) -> int:
        return self.x.shape[0]

    def is_orthogonal(self, rtol: float = 1e-10) -> bool:
        scale = np.linalg.norm(self.x) * np.linalg.norm(self.y)
        return abs(self.inner) <= rtol * scale

    def to_dict(self, field: str = COMPLEX) -> dict:
        return {"x": _encode_vector(self.x, field), "y": _encode_vector(self.y, field)}


# ---------------------------------------------------------------------------
# frame file format


def _decode_entry(entry, field: str) -> complex:
    if isinstance(entry, bool):
        raise FrameFormatError("booleans are not valid frame entries")
    if isinstance(entry, (int, float)):
        return complex(float(entry), 0.0)
    if isinstance(entry, list) and len(entry) == 2 and all(
        isinstance(c, (int, float)) and not isinstance(c, bool) for c in entry
    ):
        re, im = float(entry[0]), float(entry[1])
        if field == REAL and im != 0.0:
            raise FrameFormatError("nonzero imaginary entry in a real frame")
        return complex(re, im)
    raise FrameFormatError(f"invalid entry {entry!r}: expected a number or [re, im]")


def parse_frame(text: str) -> Frame:
    """Decode frame-file text (JSON object with field/dim/label/vectors)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FrameFormatError(f"malformed frame file: {exc}") from exc
    if not isinstance(obj, dict):
        raise FrameFormatError("frame file must contain a JSON object")
    unknown = set(obj) - {"field", "dim", "label", "vectors"}
    if unknown:
        raise FrameFormatError(f"unknown keys: {sorted(unknown)}")
    fld = obj.get("field")
    if fld not in FIELDS:
        raise FrameFormatError(f"field must be 'real' or 'complex', got {fld!r}")
    dim = obj.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise FrameFormatError(f"dim must be a positive integer, got {dim!r}")
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise FrameFormatError("label must be a string")
    vectors = obj.get("vectors")
    if not isinstance(vectors, list) or len(vectors) == 0:
        raise FrameFormatError("vectors must be a nonempty list")
    rows = []
    for j, vec in enumerate(vectors):
        if not isinstance(vec, list):
            raise FrameFormatError(f"vector {j} is not a list")
        if len(vec) != dim:
            raise FrameFormatError(
                f"dimension mismatch: vector {j} has length {len(vec)}, dim is {dim}"
            )
        rows.append([_decode_entry(e, fld) for e in vec])
    arr = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise FrameFormatError("frame entries must be finite")
    return Frame(fld, arr, label)


def _fmt(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("cannot serialize a non-finite number")
    return repr(x)


def _encode_vector(vec: np.ndarray, field: str) -> list:
    if field == REAL:
        return [float(v.real) for v in vec]
    return [[float(v.real), float(v.imag)] for v in vec]


def _format_vector(vec: np.ndarray, field: str) -> str:
    if field == REAL:
        return "[" + ", ".join(_fmt(v.real) for v in vec) + "]"
    return "[" + ", ".join(f"[{_fmt(v.real)}, {_fmt(v.imag)}]" for v in vec) + "]"


def serialize_frame(frame: Frame) -> str:
    """Canonical frame-file text; one vector per line, shortest round-trip floats."""
    lines = ["{", f'  "field": {json.dumps(frame.field)},', f'  "dim": {frame.dim},']
    if frame.label is not None:
        lines.append(f'  "label": {json.dumps(frame.label)},')
    lines.append('  "vectors": [')
    rows = [_format_vector(v, frame.field) for v in frame.vectors]
    lines.extend("    " + r + ("," if i < len(rows) - 1 else "") for i, r in enumerate(rows))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_frame(path) -> Frame:
    with open(path, encoding="utf-8") as fh:
        return parse_frame(fh.read())


def save_frame(frame: Frame, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_frame(frame))


# ---------------------------------------------------------------------------
# analysis and bounds


def analyze(frame: Frame, x) -> np.ndarray:
    """Frame coefficients ``(<x, x_j>)_j`` of ``x``, length ``m``."""
    x = _as_vector(x, frame.dim)
    return frame.vectors.conj() @ x


def frame_operator(frame: Frame) -> np.ndarray:
    """``S = sum_j x_j x_j^*`` as an ``n x n`` Hermitian matrix."""
    F = frame.vectors
    S = F.T @ F.conj()
    return 0.5 * (S + S.conj().T)


def frame_bounds_l2(frame: Frame) -> FrameBounds:
    """Optimal l2 frame bounds: extreme eigenvalues of the frame operator.

    A rank-deficient family is reported with ``lower == 0`` rather than raising.
    """
    evals = np.linalg.eigvalsh(frame_operator(frame))
    lower = max(float(evals[0]), 0.0)
    upper = max(float(evals[-1]), lower)
    if lower <= FRAME_TOL:
        lower = 0.0
    return FrameBounds(2.0, lower, upper, "exact-eigen")


def require_frame(frame: Frame, tol: float = FRAME_TOL) -> FrameBounds:
    """Return the l2 bounds, raising if the family does not span."""
    bounds = frame_bounds_l2(frame)
    if bounds.lower <= tol:
        raise ValueError(f"{frame!r} is not a frame (lower l2 bound {bounds.lower!r})")
    return bounds


def min_phase_distance(pair: VectorPair, field: str = COMPLEX) -> float:
    """``min ||x - lam*y||`` over unimodular scalars ``lam`` of the given field."""
    x, y = pair.x, pair.y
    if field == REAL:
        return float(min(np.linalg.norm(x - y), np.linalg.norm(x + y)))
    sq = np.vdot(x, x).real + np.vdot(y, y).real - 2.0 * abs(pair.inner)
    return math.sqrt(max(sq, 0.0))


def _check_p(p: float) -> float:
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"p must be >= 1, got {p!r}")
    return p


def magnitude_gap(frame: Frame, pair: VectorPair, p: float = 2.0) -> float:
    """``|| |Theta x| - |Theta y| ||_p`` for the pair ``(x, y)``."""
    p = _check_p(p)
    if pair.dim != frame.dim:
        raise ValueError(f"dimension mismatch: pair has {pair.dim}, frame has {frame.dim}")
    d = np.abs(np.abs(analyze(frame, pair.x)) - np.abs(analyze(frame, pair.y)))
    return _pnorm(d, p)


def _pnorm(d: np.ndarray, p: float) -> float:
    scale = float(np.max(d)) if d.size else 0.0
    if scale == 0.0:
        return 0.0
    return scale * float(np.sum((d / scale) ** p)) ** (1.0 / p)


def pnorm_rows(d: np.ndarray, p: float) -> np.ndarray:
    """Row-wise l_p norm of a nonnegative 2-d array."""
    if p == 2.0:
        return np.sqrt(np.einsum("ij,ij->i", d, d))
    scale = d.max(axis=1)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * np.sum((d / safe[:, None]) ** p, axis=1) ** (1.0 / p)


def upper_p_bound_estimate(upper_l2: float, m: int, p: float) -> float:
    """A guaranteed upper p-frame bound derived from the l2 upper bound.

    For ``p >= 2`` the l_p norm is dominated by the l2 norm; for ``p < 2`` the
    norm comparison on ``R^m`` costs a factor ``m^(1/p - 1/2)``.
    """
    base = math.sqrt(upper_l2)
    if p >= 2.0:
        return base
    return base * m ** (1.0 / p - 0.5)


# ---------------------------------------------------------------------------
# p-frame bounds by search


def _pframe_value(coeffs: np.ndarray, p: float) -> np.ndarray:
    return np.sum(np.abs(coeffs) ** p, axis=1)


def _pframe_descent(F: np.ndarray, X: np.ndarray, p: float, sign: float,
                    iterations: int, real: bool) -> np.ndarray:
    """Monotone projected gradient steps on the unit sphere, batched over rows.

    ``sign = +1`` minimizes ``sum |<x, f_j>|^p``, ``-1`` maximizes it.
    """
    Fc = F.conj()
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    val = sign * _pframe_value(X @ Fc.T, p)
    step = np.full(X.shape[0], 0.1)
    for _ in range(iterations):
        a = X @ Fc.T
        mag = np.abs(a)
        if p < 2:
            w = np.where(mag > 0, p * np.where(mag > 0, mag, 1.0) ** (p - 2.0), 0.0)
        else:
            w = p * mag ** (p - 2.0)
        G = sign * ((w * a) @ F)
        if real:
            G = G.real.astype(complex)
        # tangent component only
        G = G - np.sum(G * X.conj(), axis=1, keepdims=True).real * X
        gnorm = np.linalg.norm(G, axis=1)
        if np.all(gnorm < 1e-15):
            break
        scale = np.divide(step, gnorm, out=np.zeros_like(step), where=gnorm > 0)
        trial = X - scale[:, None] * G
        trial /= np.linalg.norm(trial, axis=1, keepdims=True)
        tval = sign * _pframe_value(trial @ Fc.T, p)
        ok = tval <= val
        X = np.where(ok[:, None], trial, X)
        val = np.where(ok, tval, val)
        step = np.where(ok, step * 1.5, step * 0.5)
        if np.all(step < 1e-14):
            break
    return X


def _random_unit(rng: np.random.Generator, count: int, n: int, real: bool) -> np.ndarray:
    X = rng.standard_normal((count, n)).astype(complex)
    if not real:
        X = X + 1j * rng.standard_normal((count, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def _sphere_grid_2d(real: bool, resolution: float, chunk: int = 64):
    """Yield batches of unit vectors covering the 2-d sphere up to phase."""
    if real:
        theta = np.arange(0.0, math.pi, resolution)
        yield np.stack([np.cos(theta), np.sin(theta)], axis=1).astype(complex)
        return
    alphas = np.linspace(0.0, math.pi / 2, int(math.ceil((math.pi / 2) / resolution)) + 1)
    phis = np.arange(0.0, 2 * math.pi, resolution)
    eip = np.exp(1j * phis)
    for start in range(0, alphas.size, chunk):
        a = alphas[start:start + chunk]
        first = np.repeat(np.cos(a), phis.size).astype(complex)
        second = (np.sin(a)[:, None] * eip[None, :]).reshape(-1)
        yield np.stack([first, second], axis=1)


def p_frame_bounds(frame: Frame, p: float, search=None) -> FrameBounds:
    """Lower and upper ``p``-frame bounds of ``frame`` by search over unit vectors.

    Multistart projected gradient (random starts plus the eigenvectors of the
    frame operator) is combined with an exhaustive grid when ``n == 2``.
    """
    from .stability import SearchConfig

    p = _check_p(p)
    cfg = search if search is not None else SearchConfig(restarts=64)
    rng = np.random.default_rng(cfg.seed)
    F = frame.vectors
    n, real = frame.dim, frame.is_real

    _, evecs = np.linalg.eigh(frame_operator(frame))
    starts = np.vstack([evecs.T.astype(complex), _random_unit(rng, cfg.restarts, n, real)])
    if n == 1:
        starts = np.ones((1, 1), dtype=complex)
    Fc = F.conj()

    candidates_min = [_pframe_descent(F, starts, p, +1.0, cfg.polish_iterations, real)]
    candidates_max = [_pframe_descent(F, starts, p, -1.0, cfg.polish_iterations, real)]
    method = "multistart"
    if n == 2:
        method = "grid"
        best_lo, best_hi = None, None
        for batch in _sphere_grid_2d(real, cfg.grid_resolution):
            vals = _pframe_value(batch @ Fc.T, p)
            i, j = int(np.argmin(vals)), int(np.argmax(vals))
            if best_lo is None or vals[i] < best_lo[0]:
                best_lo = (vals[i], batch[i])
            if best_hi is None or vals[j] > best_hi[0]:
                best_hi = (vals[j], batch[j])
        candidates_min.append(_pframe_descent(F, best_lo[1][None, :], p, +1.0,
                                              cfg.polish_iterations, real))
        candidates_max.append(_pframe_descent(F, best_hi[1][None, :], p, -1.0,
                                              cfg.polish_iterations, real))
        candidates_min.append(best_lo[1][None, :])
        candidates_max.append(best_hi[1][None, :])

    Xmin = np.vstack(candidates_min)
    Xmax = np.vstack(candidates_max)
    vmin = _pframe_value(Xmin @ Fc.T, p)
    vmax = _pframe_value(Xmax @ Fc.T, p)
    i, j = int(np.argmin(vmin)), int(np.argmax(vmax))
    lower = float(vmin[i]) ** (1.0 / p)
    upper = float(vmax[j]) ** (1.0 / p)
    return FrameBounds(
        p, lower, max(upper, lower), method,
        restarts=cfg.restarts,
        resolution=cfg.grid_resolution if n == 2 else None,
        lower_witness=Xmin[i].copy(),
        upper_witness=Xmax[j].copy(),
    )
