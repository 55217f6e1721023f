"""Stability constants for phase retrieval and the quartic constant ``a0``.

The stability ratio of a pair ``(x, y)`` is

    || |Theta x| - |Theta y| ||_p  /  min_{|lam|=1} ||x - lam y||

and a frame does ``C``-stable phase retrieval in ``l_p`` exactly when the
infimum of the ratio is at least ``1/C``.  The infimum may be taken over
orthogonal pairs only, which is what every search here does: pairs are kept
on the manifold ``<x, y> = 0, ||x||^2 + ||y||^2 = 1`` where the denominator is
identically one.

The ``a0`` quotient is handled the same way.  Its denominator
``||x-y||^2 ||x+y||^2 - 4 Im<x,y>^2`` equals ``(||x||^2+||y||^2)^2 - 4|<x,y>|^2``,
the squared nuclear norm of ``xx* - yy*``.  Any such difference has an
orthogonal eigen-decomposition ``s uu* - (1-s) vv*``, so orthogonal normalized
pairs again cover every value of the quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .frame import (
    COMPLEX,
    REAL,
    Frame,
    VectorPair,
    frame_operator,
    magnitude_gap,
    min_phase_distance,
    pnorm_rows,
    require_frame,
    upper_p_bound_estimate,
)

# min_ratio below this means the frame numerically fails phase retrieval
FAIL_RATIO = 1e-10
# pairs closer than this in the quotient metric are skipped by samplers
MIN_DISTANCE = 1e-10
# a0 denominators below this are excluded
MIN_DENOMINATOR = 1e-14
# multistart candidates handed to the derivative-free finish
REFINE_CANDIDATES = 4


@dataclass(frozen=True)
class SearchConfig:
    """Knobs shared by every randomized or grid search.

    ``step`` is the constant ``c`` in the ``c / sqrt(t)`` subgradient schedule.
    ``grid_resolution`` is the grid spacing (radians) of the dimension-2 grids
    and the smallest cell width of the certified branch-and-bound.
    ``rel_tol`` is the relative gap on ``C`` at which the certified search stops.
    """

    restarts: int = 128
    max_iterations: int = 200
    polish_iterations: int = 400
    step: float = 0.3
    grid_resolution: float = 1e-3
    rel_tol: float = 0.02
    max_cells: int = 2_000_000
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.grid_resolution > 0:
            raise ValueError("grid_resolution must be > 0")
        if self.max_iterations < 0 or self.polish_iterations < 0:
            raise ValueError("iteration counts must be >= 0")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")

    def with_seed(self, seed: int) -> "SearchConfig":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        return {
            "restarts": self.restarts,
            "max_iterations": self.max_iterations,
            "polish_iterations": self.polish_iterations,
            "step": self.step,
            "grid_resolution": self.grid_resolution,
            "rel_tol": self.rel_tol,
            "max_cells": self.max_cells,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of a stability-constant search.

    ``c_estimate`` is ``1 / min_ratio`` (``math.inf`` when ``min_ratio`` is
    below ``FAIL_RATIO``) and never exceeds the true constant.  Certified grid
    reports also carry ``lower_ratio``, a proven lower bound on the infimum, so
    ``c_upper = 1 / lower_ratio`` is a valid stability constant.
    """

    p: float
    min_ratio: float
    witness: VectorPair = field(compare=False)
    method: str
    field: str = COMPLEX
    seed: Optional[int] = None
    restarts: int = 0
    grid_resolution: Optional[float] = None
    certified: bool = False
    lower_ratio: Optional[float] = None

    @property
    def fails(self) -> bool:
        return self.min_ratio < FAIL_RATIO

    @property
    def c_estimate(self) -> float:
        return math.inf if self.fails else 1.0 / self.min_ratio

    @property
    def c_upper(self) -> Optional[float]:
        if self.lower_ratio is None:
            return None
        return math.inf if self.lower_ratio <= 0 else 1.0 / self.lower_ratio

    @property
    def grid_error(self) -> Optional[float]:
        """Relative width ``c_upper / c_estimate - 1`` of the certified interval."""
        if self.lower_ratio is None:
            return None
        if self.lower_ratio <= 0 or self.fails:
            return math.inf
        return self.min_ratio / self.lower_ratio - 1.0

    @property
    def degenerate_witness(self) -> bool:
        # dimension one admits only (x, 0) pairs
        return self.witness.dim == 1

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "c_estimate": _num(self.c_estimate),
            "min_ratio": self.min_ratio,
            "phase_retrieval_fails": self.fails,
            "method": self.method,
            "certified": self.certified,
            "lower_ratio": self.lower_ratio,
            "c_upper": _num(self.c_upper),
            "grid_error": _num(self.grid_error),
            "seed": self.seed,
            "restarts": self.restarts,
            "grid_resolution": self.grid_resolution,
            "witness": self.witness.to_dict(self.field),
        }


@dataclass(frozen=True)
class A0Report:
    """Outcome of an ``a0`` search; ``a0_estimate`` is an upper estimate of ``a0``."""

    a0_estimate: float
    witness: VectorPair = field(compare=False)
    method: str
    field: str = COMPLEX
    seed: Optional[int] = None
    restarts: int = 0
    grid_resolution: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "a0_estimate": self.a0_estimate,
            "method": self.method,
            "seed": self.seed,
            "restarts": self.restarts,
            "grid_resolution": self.grid_resolution,
            "witness": self.witness.to_dict(self.field),
        }


def _num(x):
    if x is None:
        return None
    if math.isinf(x):
        return "inf"
    return x


# ---------------------------------------------------------------------------
# pair sampling and ratios


def _gaussian(rng: np.random.Generator, shape, real: bool) -> np.ndarray:
    z = rng.standard_normal(shape).astype(complex)
    if not real:
        z = z + 1j * rng.standard_normal(shape)
    return z


def _retract(X: np.ndarray, Y: np.ndarray):
    """Project batched pairs onto ``<x,y> = 0`` and ``||x||^2 + ||y||^2 = 1``."""
    xx = np.sum(np.abs(X) ** 2, axis=1)
    bad = xx < 1e-300
    if np.any(bad):
        X = X.copy()
        Y = Y.copy()
        X[bad], Y[bad] = Y[bad], X[bad]
        xx = np.sum(np.abs(X) ** 2, axis=1)
    coef = np.sum(Y * X.conj(), axis=1) / np.maximum(xx, 1e-300)
    Y = Y - coef[:, None] * X
    # one more pass keeps |<x,y>| at rounding level
    coef = np.sum(Y * X.conj(), axis=1) / np.maximum(xx, 1e-300)
    Y = Y - coef[:, None] * X
    total = np.sqrt(xx + np.sum(np.abs(Y) ** 2, axis=1))
    return X / total[:, None], Y / total[:, None]


def sample_orthogonal_pair(dim: int, field: str, scale_split: float,
                           rng: np.random.Generator) -> VectorPair:
    """Random orthogonal pair with ``||x||^2 = scale_split`` and ``||y||^2 = 1 - scale_split``.

    In dimension one the only vector orthogonal to ``x`` is zero, so ``y = 0``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if not 0.0 <= scale_split <= 1.0:
        raise ValueError("scale_split must lie in [0, 1]")
    real = field == REAL
    x = _gaussian(rng, dim, real)
    x /= np.linalg.norm(x)
    if dim == 1:
        return VectorPair(x, np.zeros(1, dtype=complex))
    y = _gaussian(rng, dim, real)
    y = y - np.vdot(x, y) * x
    y = y - np.vdot(x, y) * x
    y /= np.linalg.norm(y)
    return VectorPair(math.sqrt(scale_split) * x, math.sqrt(1.0 - scale_split) * y)


def stability_ratio(frame: Frame, pair: VectorPair, p: float = 2.0) -> float:
    """``magnitude_gap / min_phase_distance``; undefined when the pair is equivalent."""
    dist = min_phase_distance(pair, frame.field)
    if dist <= 0.0:
        raise ValueError("pair is equivalent up to a unimodular scalar; ratio undefined")
    return magnitude_gap(frame, pair, p) / dist


def a0_numerator(frame: Frame, pair: VectorPair) -> float:
    a = np.abs(frame.vectors.conj() @ pair.x) ** 2
    b = np.abs(frame.vectors.conj() @ pair.y) ** 2
    return float(np.sum((a - b) ** 2))


def a0_denominator(pair: VectorPair) -> float:
    """``||x-y||^2 ||x+y||^2 - 4 Im<x,y>^2`` in its direct form."""
    x, y = pair.x, pair.y
    dm = np.vdot(x - y, x - y).real
    dp = np.vdot(x + y, x + y).real
    return float(dm * dp - 4.0 * pair.inner.imag ** 2)


def a0_denominator_nuclear(pair: VectorPair) -> float:
    """Equivalent form ``(||x||^2 + ||y||^2)^2 - 4 |<x,y>|^2``."""
    s = np.vdot(pair.x, pair.x).real + np.vdot(pair.y, pair.y).real
    return float(s * s - 4.0 * abs(pair.inner) ** 2)


def a0_ratio(frame: Frame, pair: VectorPair) -> float:
    d = a0_denominator_nuclear(pair)
    if d <= MIN_DENOMINATOR:
        raise ValueError("a0 denominator vanishes for this pair")
    return a0_numerator(frame, pair) / d


def l4_stability_from_a0(a0: float, B: float) -> float:
    """``(2 B / a0)^(1/2)``: an l4 stability constant implied by ``a0`` and the upper bound ``B``."""
    if not a0 > 0:
        raise ValueError("a0 must be > 0; phase retrieval is not guaranteed")
    if not B > 0:
        raise ValueError("B must be > 0")
    return math.sqrt(2.0 * B / a0)


# ---------------------------------------------------------------------------
# batched objectives on orthogonal normalized pairs


def _coeffs(F: np.ndarray, X: np.ndarray) -> np.ndarray:
    return X @ F.conj().T


def _gap_objective(F, X, Y, p):
    d = np.abs(_coeffs(F, X)) - np.abs(_coeffs(F, Y))
    return np.sum(np.abs(d) ** p, axis=1)


def _gap_gradient(F, X, Y, p):
    """Value and (sub)gradient of ``sum_j | |<x,f_j>| - |<y,f_j>| |^p``."""
    a, b = _coeffs(F, X), _coeffs(F, Y)
    ma, mb = np.abs(a), np.abs(b)
    d = ma - mb
    ad = np.abs(d)
    val = np.sum(ad ** p, axis=1)
    if p == 1.0:
        w = np.sign(d)
    else:
        w = p * ad ** (p - 1.0) * np.sign(d)
    ua = np.divide(a, ma, out=np.zeros_like(a), where=ma > 0)
    ub = np.divide(b, mb, out=np.zeros_like(b), where=mb > 0)
    GX = (w * ua) @ F
    GY = -(w * ub) @ F
    return val, GX, GY


def _a0_objective(F, X, Y):
    a = np.abs(_coeffs(F, X)) ** 2
    b = np.abs(_coeffs(F, Y)) ** 2
    return np.sum((a - b) ** 2, axis=1)


def _a0_gradient(F, X, Y):
    cx, cy = _coeffs(F, X), _coeffs(F, Y)
    d = np.abs(cx) ** 2 - np.abs(cy) ** 2
    val = np.sum(d ** 2, axis=1)
    GX = (4.0 * d * cx) @ F
    GY = -(4.0 * d * cy) @ F
    return val, GX, GY


def _subgradient_phase(grad, X, Y, iterations, c, real):
    """Normalized subgradient steps with size ``c / sqrt(t)``; returns best iterates."""
    best_val, _, _ = grad(X, Y)
    best_X, best_Y = X.copy(), Y.copy()
    for t in range(1, iterations + 1):
        val, GX, GY = grad(X, Y)
        better = val < best_val
        best_val = np.where(better, val, best_val)
        best_X[better], best_Y[better] = X[better], Y[better]
        if real:
            GX, GY = GX.real.astype(complex), GY.real.astype(complex)
        gn = np.sqrt(np.sum(np.abs(GX) ** 2 + np.abs(GY) ** 2, axis=1))
        gn = np.where(gn > 0, gn, 1.0)
        eta = c / math.sqrt(t)
        X, Y = _retract(X - (eta / gn)[:, None] * GX, Y - (eta / gn)[:, None] * GY)
    val, _, _ = grad(X, Y)
    better = val < best_val
    best_X[better], best_Y[better] = X[better], Y[better]
    return best_X, best_Y


def _polish_phase(grad, objective, X, Y, iterations, real):
    """Monotone gradient steps with a per-row adaptive step size."""
    val = objective(X, Y)
    step = np.full(X.shape[0], 0.05)
    for _ in range(iterations):
        _, GX, GY = grad(X, Y)
        if real:
            GX, GY = GX.real.astype(complex), GY.real.astype(complex)
        gn = np.sqrt(np.sum(np.abs(GX) ** 2 + np.abs(GY) ** 2, axis=1))
        active = (gn > 0) & (step > 1e-16)
        if not np.any(active):
            break
        gn = np.where(gn > 0, gn, 1.0)
        TX, TY = _retract(X - (step / gn)[:, None] * GX, Y - (step / gn)[:, None] * GY)
        tval = objective(TX, TY)
        ok = (tval <= val) & active
        X = np.where(ok[:, None], TX, X)
        Y = np.where(ok[:, None], TY, Y)
        val = np.where(ok, tval, val)
        step = np.where(ok, np.minimum(step * 1.5, 1.0), step * 0.5)
    return X, Y, val


def _initial_pairs(frame: Frame, config: SearchConfig, rng: np.random.Generator,
                   extra: Sequence[VectorPair] = ()):
    n, real = frame.dim, frame.is_real
    R = config.restarts
    X = _gaussian(rng, (R, n), real)
    Y = _gaussian(rng, (R, n), real)
    s = rng.uniform(0.0, 1.0, R)
    X, Y = _retract(X, Y)
    # re-weight to the sampled split
    nx = np.linalg.norm(X, axis=1)
    ny = np.linalg.norm(Y, axis=1)
    X = X * (np.sqrt(s) / np.where(nx > 0, nx, 1.0))[:, None]
    Y = Y * (np.sqrt(1 - s) / np.where(ny > 0, ny, 1.0))[:, None]
    # eigenvectors of the frame operator with y = 0 (norm-recovery pairs)
    _, evecs = np.linalg.eigh(frame_operator(frame))
    EX = evecs.T.astype(complex)
    EY = np.zeros_like(EX)
    parts_x, parts_y = [EX, X], [EY, Y]
    for pair in extra:
        parts_x.append(pair.x[None, :])
        parts_y.append(pair.y[None, :])
    X, Y = _retract(np.vstack(parts_x), np.vstack(parts_y))
    return X, Y


def estimate_stability_constant(frame: Frame, p: float = 2.0,
                                config: Optional[SearchConfig] = None,
                                starts: Sequence[VectorPair] = ()) -> StabilityReport:
    """Multistart search for the smallest stability ratio over orthogonal pairs.

    The result is a lower estimate of the optimal stability constant: a found
    pair can only certify that no smaller constant works.
    """
    require_frame(frame)
    if not p >= 1:
        raise ValueError("p must be >= 1")
    cfg = config if config is not None else SearchConfig()
    rng = np.random.default_rng(cfg.seed)
    F = frame.vectors
    real = frame.is_real

    X, Y = _initial_pairs(frame, cfg, rng, starts)

    def grad(A, B):
        return _gap_gradient(F, A, B, p)

    def objective(A, B):
        return _gap_objective(F, A, B, p)

    X, Y = _subgradient_phase(grad, X, Y, cfg.max_iterations, cfg.step, real)
    X, Y, val = _polish_phase(grad, objective, X, Y, cfg.polish_iterations, real)
    # gradient steps stall at kinks of the gap; finish the best few derivative-free
    witness, ratio = None, math.inf
    for i in np.argsort(val)[:REFINE_CANDIDATES]:
        pair, r = _refine_orthogonal_pair(frame, p, VectorPair(X[i], Y[i]))
        if r < ratio:
            witness, ratio = pair, r
    return StabilityReport(p, ratio, witness, "multistart", frame.field,
                           seed=cfg.seed, restarts=cfg.restarts)


def _refine_orthogonal_pair(frame: Frame, p: float, pair: VectorPair, rounds: int = 3):
    """Nelder-Mead on the retracted pair ``(x + dx, y + dy)``; never returns a worse pair."""
    F = frame.vectors
    n, real = frame.dim, frame.is_real
    x0, y0 = _retract(pair.x[None, :], pair.y[None, :])

    def unpack(z):
        if real:
            dx, dy = z[:n], z[n:]
        else:
            dx, dy = z[:n] + 1j * z[n:2 * n], z[2 * n:3 * n] + 1j * z[3 * n:]
        return _retract(x0 + dx[None, :], y0 + dy[None, :])

    def fun(z):
        X, Y = unpack(z)
        return float(_gap_objective(F, X, Y, p)[0])

    z = np.zeros(2 * n if real else 4 * n)
    best = fun(z)
    scale = 1e-2
    for _ in range(rounds):
        cand, val = _local_refine(fun, z, scale)
        if val < best:
            z, best = cand, val
        scale *= 0.1
    X, Y = unpack(z)
    refined = VectorPair(X[0], Y[0])
    r_new = stability_ratio(frame, refined, p)
    r_old = stability_ratio(frame, VectorPair(x0[0], y0[0]), p)
    if r_new <= r_old:
        return refined, r_new
    return VectorPair(x0[0], y0[0]), r_old


# ---------------------------------------------------------------------------
# certified search in dimension two


def _uv(alpha: np.ndarray, phi: np.ndarray):
    """Unit ``u = (cos a, e^{i phi} sin a)`` and its orthogonal complement ``v``."""
    ca, sa = np.cos(alpha), np.sin(alpha)
    e = np.exp(1j * phi)
    U = np.stack([ca + 0j, e * sa], axis=-1)
    V = np.stack([-np.conj(e) * sa, ca + 0j], axis=-1)
    return U, V


def _angles_of(u: np.ndarray):
    """Parameters ``(alpha, phi)`` of a unit vector in C^2 up to phase."""
    u = u / np.linalg.norm(u)
    r0, r1 = abs(u[0]), abs(u[1])
    alpha = math.atan2(r1, r0)
    phi = (np.angle(u[1]) - np.angle(u[0])) % (2 * math.pi) if r0 > 0 and r1 > 0 else 0.0
    return alpha, float(phi)


class _RatioLandscape:
    """Stability ratio of orthogonal pairs in C^2 / R^2 as a function of angles.

    Coordinates are ``(alpha[, phi][, t])``: ``phi`` is absent for real frames,
    and ``t`` (the split ``x = cos t u``, ``y = sin t v``) is absent for
    ``p == 2`` where it is minimized in closed form.
    """

    def __init__(self, frame: Frame, p: float):
        self.F = frame.vectors
        self.Fc = frame.vectors.conj()
        self.p = p
        self.real = frame.is_real
        self.closed_t = p == 2.0
        lo, hi = [0.0], [math.pi / 2]
        if not self.real:
            lo.append(0.0)
            hi.append(2 * math.pi)
        if not self.closed_t:
            lo.append(0.0)
            hi.append(math.pi / 2)
        self.lo, self.hi = np.array(lo), np.array(hi)
        B = float(np.linalg.eigvalsh(frame_operator(frame))[-1])
        # |d r| <= sqrt(2) K (|d alpha| + |d phi| + |d t|), K an upper p-frame bound
        self.lipschitz = math.sqrt(2.0) * upper_p_bound_estimate(B, frame.m, p) * (1 + 1e-9)

    def _split(self, P):
        alpha = P[:, 0]
        k = 1
        if self.real:
            phi = np.zeros_like(alpha)
        else:
            phi = P[:, 1]
            k = 2
        t = None if self.closed_t else P[:, k]
        return alpha, phi, t

    def _mags(self, alpha, phi):
        U, V = _uv(alpha, phi)
        return np.abs(U @ self.Fc.T), np.abs(V @ self.Fc.T)

    def values(self, P: np.ndarray) -> np.ndarray:
        alpha, phi, t = self._split(P)
        a, b = self._mags(alpha, phi)
        if self.closed_t:
            Pq = np.einsum("ij,ij->i", a, a)
            Rq = np.einsum("ij,ij->i", b, b)
            Qq = np.einsum("ij,ij->i", a, b)
            lam = 0.5 * (Pq + Rq) - np.hypot(0.5 * (Pq - Rq), Qq)
            return np.sqrt(np.maximum(lam, 0.0))
        d = np.abs(a * np.cos(t)[:, None] - b * np.sin(t)[:, None])
        return pnorm_rows(d, self.p)

    def pair(self, point: np.ndarray) -> VectorPair:
        P = np.asarray(point, dtype=float)[None, :]
        alpha, phi, t = self._split(P)
        U, V = _uv(alpha, phi)
        u, v = U[0], V[0]
        if t is None:
            a, b = self._mags(alpha, phi)
            a, b = a[0], b[0]
            M = np.array([[a @ a, -(a @ b)], [-(a @ b), b @ b]])
            _, vecs = np.linalg.eigh(M)
            c, s = np.abs(vecs[:, 0])
            tt = math.atan2(s, c)
        else:
            tt = float(t[0])
        return VectorPair(math.cos(tt) * u, math.sin(tt) * v)

    def point_of(self, pair: VectorPair) -> np.ndarray:
        x, y = pair.x, pair.y
        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        u = x if nx > 0 else np.array([-np.conj(y[1]), np.conj(y[0])])
        alpha, phi = _angles_of(u)
        coords = [alpha] + ([] if self.real else [phi])
        if not self.closed_t:
            coords.append(math.atan2(ny, nx))
        return np.array(coords)


def _branch_and_bound(land: _RatioLandscape, resolution: float, rel_tol: float,
                      max_cells: int, seeds: Sequence[np.ndarray]):
    """Lipschitz branch-and-bound over the angle box.

    Returns ``(best_value, best_point, certified_lower_bound)``.
    """
    d = land.lo.size
    spans = land.hi - land.lo
    counts = np.maximum(np.ceil(spans / (math.pi / 16)), 1).astype(int)
    h = spans / counts / 2.0
    axes = [land.lo[k] + h[k] * (2 * np.arange(counts[k]) + 1) for k in range(d)]
    cells = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)

    best_val, best_pt = math.inf, None
    for s in seeds:
        v = float(land.values(np.asarray(s)[None, :])[0])
        if v < best_val:
            best_val, best_pt = v, np.asarray(s, dtype=float)

    L = land.lipschitz
    pruned_lower = math.inf
    offsets = np.stack(np.meshgrid(*([[-0.5, 0.5]] * d), indexing="ij"), axis=-1).reshape(-1, d)
    while True:
        vals = np.concatenate([land.values(cells[i:i + 65536])
                               for i in range(0, cells.shape[0], 65536)])
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_pt = float(vals[i]), cells[i].copy()
        lb = vals - L * float(np.sum(h))
        keep = lb < best_val
        if np.any(~keep):
            pruned_lower = min(pruned_lower, float(lb[~keep].min()))
        cells, lb = cells[keep], lb[keep]
        lower = min(best_val, pruned_lower, float(lb.min()) if lb.size else math.inf)
        if cells.shape[0] == 0 or best_val < FAIL_RATIO * 1e-2:
            break
        if lower > 0 and best_val <= (1.0 + rel_tol) * lower:
            break
        if np.max(h) * 2.0 <= resolution:
            break
        if cells.shape[0] * offsets.shape[0] > max_cells:
            break
        h = h / 2.0
        cells = (cells[:, None, :] + offsets[None, :, :] * (2.0 * h)).reshape(-1, d)
    lower = min(best_val, pruned_lower, float(lb.min()) if lb.size else math.inf)
    return best_val, best_pt, max(lower, 0.0)


def _local_refine(fun, x0: np.ndarray, scale: float):
    res = minimize(fun, x0, method="Nelder-Mead",
                   options={"xatol": 1e-13, "fatol": 1e-16, "maxiter": 4000,
                            "initial_simplex": _simplex(x0, scale)})
    return res.x, float(res.fun)


def _simplex(x0: np.ndarray, scale: float) -> np.ndarray:
    d = x0.size
    simplex = np.repeat(x0[None, :], d + 1, axis=0)
    for k in range(d):
        simplex[k + 1, k] += scale
    return simplex


def grid_certified_stability_2d(frame: Frame, p: float = 2.0,
                                resolution: float = 1e-3,
                                rel_tol: float = 0.02,
                                max_cells: int = 2_000_000) -> StabilityReport:
    """Certified stability ratio infimum for a frame of ``C^2`` or ``R^2``.

    Orthogonal pairs are parametrized by ``x = cos t (cos a, e^{i phi} sin a)``
    and ``y = sin t (-e^{-i phi} sin a, cos a)``.  A separate phase on ``y`` is
    not needed: the ratio is unchanged when ``x`` and ``y`` are rotated by
    independent unimodular scalars.  A Lipschitz bound derived from the upper
    frame bound turns cell centre values into cell lower bounds; cells that
    cannot beat the incumbent are discarded and the rest are bisected until the
    relative gap on ``C`` drops below ``rel_tol`` or cells reach ``resolution``.
    """
    if frame.dim != 2:
        raise ValueError(f"grid oracle needs dim 2, got {frame.dim}")
    if not p >= 1:
        raise ValueError("p must be >= 1")
    require_frame(frame)
    land = _RatioLandscape(frame, p)

    _, evecs = np.linalg.eigh(frame_operator(frame))
    seeds = [land.point_of(VectorPair(evecs[:, 0], np.zeros(2)))]
    best_val, best_pt, lower = _branch_and_bound(land, resolution, rel_tol, max_cells, seeds)

    def fun(z):
        return float(land.values(np.asarray(z)[None, :])[0])

    pt, val = _local_refine(fun, best_pt, max(resolution, 1e-3))
    if val > best_val:
        pt = best_pt
    witness = land.pair(pt)
    ratio = stability_ratio(frame, witness, p)
    # direct-objective polish; the closed-form eigenvalue loses digits near zero
    polished, pratio = _polish_pair(frame, p, witness)
    if pratio < ratio:
        witness, ratio = polished, pratio
    lower = min(lower, ratio)
    return StabilityReport(p, ratio, witness, "grid2d", frame.field,
                           grid_resolution=resolution, certified=True, lower_ratio=lower)


def _polish_pair(frame: Frame, p: float, pair: VectorPair, iterations: int = 400):
    F = frame.vectors
    X, Y = _retract(pair.x[None, :].copy(), pair.y[None, :].copy())
    X, Y, _ = _polish_phase(lambda A, B: _gap_gradient(F, A, B, p),
                            lambda A, B: _gap_objective(F, A, B, p),
                            X, Y, iterations, frame.is_real)
    polished = VectorPair(X[0], Y[0])
    return polished, stability_ratio(frame, polished, p)


# ---------------------------------------------------------------------------
# a0


def _a0_reduced(F: np.ndarray, U: np.ndarray, V: np.ndarray):
    """Minimize ``sum (s a - (1-s) b)^2`` over ``s in [0, 1]`` in closed form."""
    Fc = F.conj()
    a = np.abs(U @ Fc.T) ** 2
    b = np.abs(V @ Fc.T) ** 2
    c = a + b
    cc = np.einsum("ij,ij->i", c, c)
    s = np.clip(np.einsum("ij,ij->i", b, c) / np.where(cc > 0, cc, 1.0), 0.0, 1.0)
    r = s[:, None] * c - b
    return np.einsum("ij,ij->i", r, r), s


def estimate_a0(frame: Frame, config: Optional[SearchConfig] = None,
                starts: Sequence[VectorPair] = ()) -> A0Report:
    """Multistart estimate of ``a0``: the minimum of the quartic quotient over pairs.

    Searched pairs are orthogonal with ``||x||^2 + ||y||^2 = 1`` so the
    denominator is one.  The result is an upper estimate of the infimum.
    """
    require_frame(frame)
    cfg = config if config is not None else SearchConfig()
    rng = np.random.default_rng(cfg.seed)
    F = frame.vectors
    real = frame.is_real
    X, Y = _initial_pairs(frame, cfg, rng, starts)

    def grad(A, B):
        return _a0_gradient(F, A, B)

    def objective(A, B):
        return _a0_objective(F, A, B)

    X, Y = _subgradient_phase(grad, X, Y, cfg.max_iterations, cfg.step, real)
    X, Y, val = _polish_phase(grad, objective, X, Y, cfg.polish_iterations, real)
    i = int(np.argmin(val))
    witness = VectorPair(X[i], Y[i])
    return A0Report(a0_ratio(frame, witness), witness, "multistart", frame.field,
                    seed=cfg.seed, restarts=cfg.restarts)


def grid_a0_2d(frame: Frame, resolution: float = 1e-2) -> A0Report:
    """``a0`` of a frame of ``C^2``/``R^2`` by an angle grid plus local refinement."""
    if frame.dim != 2:
        raise ValueError(f"grid oracle needs dim 2, got {frame.dim}")
    require_frame(frame)
    F = frame.vectors
    alphas = np.linspace(0.0, math.pi / 2, int(math.ceil((math.pi / 2) / resolution)) + 1)
    if frame.is_real:
        phis = np.zeros(1)
    else:
        phis = np.arange(0.0, 2 * math.pi, resolution)
    A, P = np.meshgrid(alphas, phis, indexing="ij")
    A, P = A.reshape(-1), P.reshape(-1)
    best = (math.inf, 0.0, 0.0)
    for i in range(0, A.size, 65536):
        U, V = _uv(A[i:i + 65536], P[i:i + 65536])
        vals, _ = _a0_reduced(F, U, V)
        k = int(np.argmin(vals))
        if vals[k] < best[0]:
            best = (float(vals[k]), A[i + k], P[i + k])

    def fun(z):
        alpha = np.array([z[0]])
        phi = np.array([0.0 if frame.is_real else z[1]])
        U, V = _uv(alpha, phi)
        return float(_a0_reduced(F, U, V)[0][0])

    x0 = np.array([best[1]] if frame.is_real else [best[1], best[2]])
    pt, val = _local_refine(fun, x0, resolution)
    if val > best[0]:
        pt = x0
    alpha = np.array([pt[0]])
    phi = np.array([0.0 if frame.is_real else pt[1]])
    U, V = _uv(alpha, phi)
    _, s = _a0_reduced(F, U, V)
    witness = VectorPair(math.sqrt(s[0]) * U[0], math.sqrt(1.0 - s[0]) * V[0])
    return A0Report(a0_ratio(frame, witness), witness, "grid2d", frame.field,
                    grid_resolution=resolution)


# ---------------------------------------------------------------------------
# sampled ratios


def sample_min_ratio(frame: Frame, p: float, n_pairs: int, rng: np.random.Generator,
                     orthogonal: bool):
    """Smallest stability ratio among ``n_pairs`` random pairs.

    ``orthogonal=False`` draws independent Gaussian ``x, y``; pairs whose
    quotient distance is below ``MIN_DISTANCE`` are skipped.
    Returns ``(min_ratio, witness)``.
    """
    n, real = frame.dim, frame.is_real
    X = _gaussian(rng, (n_pairs, n), real)
    Y = _gaussian(rng, (n_pairs, n), real)
    if orthogonal:
        s = rng.uniform(0.0, 1.0, n_pairs)
        X, Y = _retract(X, Y)
        nx = np.linalg.norm(X, axis=1)
        ny = np.linalg.norm(Y, axis=1)
        X = X * (np.sqrt(s) / np.where(nx > 0, nx, 1.0))[:, None]
        Y = Y * (np.sqrt(1 - s) / np.where(ny > 0, ny, 1.0))[:, None]
    ratios = batch_ratios(frame, X, Y, p)
    i = int(np.nanargmin(ratios))
    return float(ratios[i]), VectorPair(X[i], Y[i])


def batch_ratios(frame: Frame, X: np.ndarray, Y: np.ndarray, p: float) -> np.ndarray:
    """Stability ratios of many pairs at once; ``nan`` where the ratio is undefined."""
    F = frame.vectors
    d = np.abs(np.abs(_coeffs(F, X)) - np.abs(_coeffs(F, Y)))
    gap = pnorm_rows(d, p)
    if frame.is_real:
        dist = np.minimum(np.linalg.norm(X - Y, axis=1), np.linalg.norm(X + Y, axis=1))
    else:
        sq = (np.sum(np.abs(X) ** 2, axis=1) + np.sum(np.abs(Y) ** 2, axis=1)
              - 2.0 * np.abs(np.sum(X * Y.conj(), axis=1)))
        dist = np.sqrt(np.maximum(sq, 0.0))
    out = np.full(X.shape[0], np.nan)
    ok = dist >= MIN_DISTANCE
    out[ok] = gap[ok] / dist[ok]
    return out


def refine_general_pair(frame: Frame, p: float, pair: VectorPair):
    """Locally minimize the ratio over unconstrained pairs, starting at ``pair``.

    Returns ``(ratio, pair)``.
    """
    n, real = frame.dim, frame.is_real

    def unpack(z):
        if real:
            return z[:n].astype(complex), z[n:].astype(complex)
        return z[:n] + 1j * z[n:2 * n], z[2 * n:3 * n] + 1j * z[3 * n:]

    def fun(z):
        x, y = unpack(z)
        r = batch_ratios(frame, x[None, :], y[None, :], p)[0]
        return float(r) if np.isfinite(r) else 1e6

    if real:
        z0 = np.concatenate([pair.x.real, pair.y.real])
    else:
        z0 = np.concatenate([pair.x.real, pair.x.imag, pair.y.real, pair.y.imag])
    scale = 0.05 * float(np.linalg.norm(z0)) / math.sqrt(z0.size)
    z, val = _local_refine(fun, z0, scale)
    x, y = unpack(z)
    return val, VectorPair(x, y)
