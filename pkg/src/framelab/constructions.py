"""Explicit frames used as experiment inputs.

Vector order is canonical: scaled singleton blocks first, fixed vectors last.
Order never changes a computed quantity but keeps frame files diffable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .frame import COMPLEX, FIELDS, REAL, Frame, frame_operator, frame_bounds_l2

KINDS = ("example33", "prop34", "random-gaussian", "basis")


@dataclass(frozen=True)
class ConstructionSpec:
    kind: str
    k: int = 1
    n: int = 2
    m: Optional[int] = None
    field: str = COMPLEX
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown construction {self.kind!r}; choose from {KINDS}")
        if self.field not in FIELDS:
            raise ValueError(f"field must be one of {FIELDS}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.kind == "example33" and (self.n != 2 or self.field != COMPLEX):
            raise ValueError("example33 lives in C^2")
        if self.kind == "prop34" and self.n < 2:
            raise ValueError("prop34 needs n >= 2")


def diluted_tight_frame(k: int) -> Frame:
    """Tight frame of C^2 with bound 5 whose coordinate vectors are split k ways.

    ``k`` copies of ``(k^-1/2, 0)``, ``k`` copies of ``(0, k^-1/2)``, then
    ``(1, 1), (1, -1), (1, i), (1, -i)``.  Every l2 quantity is independent of
    ``k`` while l_p quantities with ``p > 2`` degrade as ``k`` grows.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    c = 1.0 / math.sqrt(k)
    rows = [(c, 0.0)] * k + [(0.0, c)] * k
    rows += [(1, 1), (1, -1), (1, 1j), (1, -1j)]
    return Frame(COMPLEX, np.array(rows, dtype=complex), f"example33 k={k}")


def basis_frame(n: int, field: str = REAL, scale: float = 1.0) -> Frame:
    if n < 1:
        raise ValueError("n must be >= 1")
    return Frame(field, scale * np.eye(n, dtype=complex), f"basis n={n}")


def random_gaussian_frame(n: int, m: int, field: str = COMPLEX,
                          rng: Optional[np.random.Generator] = None) -> Frame:
    """``m`` vectors with i.i.d. standard Gaussian entries, scaled by ``1/sqrt(m)``.

    Complex entries have independent Gaussian real and imaginary parts.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if m < n:
        raise ValueError(f"need m >= n, got m={m}, n={n}")
    rng = rng if rng is not None else np.random.default_rng()
    V = rng.standard_normal((m, n)).astype(complex)
    if field == COMPLEX:
        V = V + 1j * rng.standard_normal((m, n))
    return Frame(field, V / math.sqrt(m), f"gaussian n={n} m={m}")


def parsevalize(frame: Frame) -> Frame:
    """Apply ``S^(-1/2)`` to every vector so the frame operator becomes the identity."""
    bounds = frame_bounds_l2(frame)
    if bounds.lower <= 1e-10:
        raise ValueError("not a frame: frame operator is singular")
    S = frame_operator(frame)
    evals, evecs = np.linalg.eigh(S)
    inv_root = (evecs * (1.0 / np.sqrt(evals))) @ evecs.conj().T
    # rows hold x_j^T, so S^-1/2 x_j becomes a right multiplication
    V = frame.vectors @ inv_root.T
    if frame.is_real:
        V = V.real.astype(complex)
    return frame.with_vectors(V)


def basis_plus_diluted_parseval(n: int, k: int, base: Optional[Frame] = None,
                                rng: Optional[np.random.Generator] = None) -> Frame:
    """Unit basis of C^n followed by ``k`` copies of ``base`` scaled by ``k^-1/2``.

    ``base`` must be a Parseval frame of the same dimension; by default it is a
    Parseval-normalized Gaussian frame with ``4n`` vectors.  The result is tight
    with bound 2.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if k < 1:
        raise ValueError("k must be >= 1")
    if base is None:
        base = parsevalize(random_gaussian_frame(n, 4 * n, COMPLEX, rng))
    if base.dim != n:
        raise ValueError(f"dimension mismatch: base has dim {base.dim}, expected {n}")
    S = frame_operator(base)
    if np.max(np.abs(S - np.eye(n))) > 1e-8:
        raise ValueError("base frame is not Parseval")
    block = np.tile(base.vectors, (k, 1)) / math.sqrt(k)
    V = np.vstack([np.eye(n, dtype=complex), block])
    return Frame(base.field, V, f"prop34 n={n} k={k}")


def construct(spec: ConstructionSpec) -> Frame:
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "example33":
        return diluted_tight_frame(spec.k)
    if spec.kind == "prop34":
        return basis_plus_diluted_parseval(spec.n, spec.k, rng=rng)
    if spec.kind == "random-gaussian":
        m = spec.m if spec.m is not None else 4 * spec.n
        return random_gaussian_frame(spec.n, m, spec.field, rng)
    return basis_frame(spec.n, spec.field)
