"""Seeded verification suites.

Each suite returns ``TheoremCheck`` rows; a suite passes when every row whose
precondition holds (and which is not advisory) passes.  All randomness flows
from ``VerifyConfig.seed`` so a suite replays byte-for-byte.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Dict, List, Optional

import numpy as np

from .constructions import (
    basis_frame,
    basis_plus_diluted_parseval,
    diluted_tight_frame,
    parsevalize,
    random_gaussian_frame,
)
from .frame import (
    COMPLEX,
    REAL,
    Frame,
    VectorPair,
    frame_bounds_l2,
    frame_operator,
    magnitude_gap,
    min_phase_distance,
    p_frame_bounds,
)
from .perturbation import (
    MODES,
    PerturbationPlan,
    balan_rho_sum,
    c_lower_bound_check,
    christensen_bounds,
    displacement,
    perturb_frame,
    perturbation_sweep,
    perturbed_pr_bound,
    stability_threshold,
    trial_seed,
)
from .report import TheoremCheck, checks_to_csv, dumps, render_table
from .stability import (
    SearchConfig,
    batch_ratios,
    estimate_a0,
    estimate_stability_constant,
    grid_a0_2d,
    grid_certified_stability_2d,
    l4_stability_from_a0,
    refine_general_pair,
    sample_min_ratio,
    _gaussian,
    _retract,
)

SUITES = (
    "verify-christensen",
    "verify-thm12",
    "verify-balan",
    "verify-prop33",
    "verify-lemma21",
    "verify-ex33",
    "verify-prop34",
)


def default_seed() -> int:
    return int(os.environ.get("FRAMELAB_SEED", "7"))


@dataclass(frozen=True)
class VerifyConfig:
    """Everything a suite needs to replay; echoed verbatim into reports."""

    seed: int = field(default_factory=default_seed)
    restarts: int = 128
    grid_resolution: float = 1e-3
    grid_rel_tol: float = 0.02
    christensen_trials: int = 200
    thm12_trials: int = 100
    balan_trials: int = 50
    prop33_frames: int = 20
    prop33_pairs: int = 100_000
    reduction_pairs: int = 10_000
    reduction_dense_pairs: int = 200_000
    eigen_tol: float = 1e-9
    closed_form_tol: float = 1e-12
    search_tol: float = 0.05
    a0_tol: float = 1e-6

    @classmethod
    def from_dict(cls, data: dict) -> "VerifyConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "VerifyConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"unreadable config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError("config must be a JSON object")
        return cls.from_dict(data)

    def search(self, seed: Optional[int] = None) -> SearchConfig:
        return SearchConfig(restarts=self.restarts, grid_resolution=self.grid_resolution,
                            rel_tol=self.grid_rel_tol,
                            seed=self.seed if seed is None else seed)


@dataclass
class SuiteResult:
    suite: str
    checks: List[TheoremCheck]
    config: VerifyConfig
    wall_time: float = 0.0

    @property
    def failures(self) -> List[TheoremCheck]:
        return [c for c in self.checks if c.failed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> str:
        # wall time is left out so replays are byte-identical
        return dumps({
            "suite": self.suite,
            "config": asdict(self.config),
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        })

    def to_csv(self) -> str:
        return checks_to_csv(self.checks)

    def summary(self) -> str:
        head = f"suite {self.suite}: {'PASS' if self.passed else 'FAIL'} " \
               f"({len(self.checks)} checks, {len(self.failures)} failed)\n"
        return head + render_table(self.checks)


def _rel_close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(abs(b), 1e-300)


# ---------------------------------------------------------------------------
# suites


def suite_ex33(cfg: VerifyConfig) -> List[TheoremCheck]:
    rows = []
    for k in (1, 2, 8, 64):
        S = frame_operator(diluted_tight_frame(k))
        dev = float(np.max(np.abs(S - 5.0 * np.eye(2))))
        rows.append(TheoremCheck("Ex33Items", f"tight bound 5, k={k}", 0.0, dev, 1e-10,
                                 dev < 1e-10, inputs={"k": k}))
    x, y = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    pair = VectorPair(x, y)
    for k in (1, 4, 16):
        f = diluted_tight_frame(k)
        for p in (2, 3, 4, 6):
            measured = magnitude_gap(f, pair, p) ** p
            predicted = 2.0 * k ** (1.0 - p / 2.0)
            rows.append(TheoremCheck("Ex33Items", f"witness sum k={k} p={p}", predicted,
                                     measured, 1e-12, _rel_close(measured, predicted, 1e-12),
                                     inputs={"k": k, "p": p}))
    for k in (1, 4, 16):
        fb = p_frame_bounds(diluted_tight_frame(k), 4, SearchConfig(restarts=64, seed=cfg.seed))
        rows.append(TheoremCheck("Ex33Items", f"4-frame bounds k={k}", (1.0, math.sqrt(5.0)),
                                 (fb.lower, fb.upper), 1e-6,
                                 fb.lower >= 1 - 1e-6 and fb.upper <= math.sqrt(5) + 1e-6,
                                 inputs={"k": k, "p": 4}))
    c2 = []
    for k in (1, 4, 16, 64):
        f = diluted_tight_frame(k)
        rep = grid_certified_stability_2d(f, 2.0, cfg.grid_resolution, cfg.grid_rel_tol)
        c2.append(rep.c_estimate)
        rows.append(c_lower_bound_check(rep, frame_bounds_l2(f).lower, f"C2 k={k}"))
    spread = max(c2) / min(c2)
    rows.append(TheoremCheck("Ex33Items", "C2 spread over k in {1,4,16,64}", 2.0, spread,
                             1e-12, spread < 2.0, inputs={"C2": c2}))
    k = 16
    rep = grid_certified_stability_2d(diluted_tight_frame(k), 4.0, cfg.grid_resolution, 0.05)
    predicted = (2.0 * k) ** 0.25
    rows.append(TheoremCheck("Ex33Items", "C4 lower bound k=16", predicted, rep.c_estimate,
                             1e-3, rep.c_estimate >= predicted - 1e-3, inputs={"k": k, "p": 4}))
    rows.append(c_lower_bound_check(rep, 5.0, "C4 k=16"))
    return rows


def suite_prop34(cfg: VerifyConfig) -> List[TheoremCheck]:
    rows = []
    rng = np.random.default_rng(cfg.seed)
    for n in (2, 3, 4):
        base = parsevalize(random_gaussian_frame(n, 4 * n, COMPLEX, rng))
        for k in (1, 4, 16):
            f = basis_plus_diluted_parseval(n, k, base)
            lb = frame_bounds_l2(f)
            ok = abs(lb.lower - 2) <= 1e-8 and abs(lb.upper - 2) <= 1e-8
            rows.append(TheoremCheck("Prop34Items", f"tight bound 2, n={n} k={k}", (2.0, 2.0),
                                     (lb.lower, lb.upper), 1e-8, ok, inputs={"n": n, "k": k}))
            fb = p_frame_bounds(f, 4, SearchConfig(restarts=64, seed=cfg.seed))
            lo_pred = n ** (0.25 - 0.5)
            rows.append(TheoremCheck(
                "Prop34Items", f"4-frame bounds n={n} k={k}", (lo_pred, math.sqrt(2.0)),
                (fb.lower, fb.upper), 1e-6,
                fb.lower >= lo_pred - 1e-6 and fb.upper <= math.sqrt(2.0) + 1e-6,
                inputs={"n": n, "k": k}))
            e1, e2 = np.eye(n)[0], np.eye(n)[1]
            pair = VectorPair((e1 + e2) / 2, (e1 - e2) / 2)
            gap4 = magnitude_gap(f, pair, 4) ** 4
            dist = min_phase_distance(pair)
            rows.append(TheoremCheck(
                "Prop34Items", f"witness gap n={n} k={k}", 1.0 / k, gap4, 1e-12,
                gap4 <= 1.0 / k + 1e-12 and abs(dist - 1) <= 1e-12,
                inputs={"n": n, "k": k, "distance": dist}))
    return rows


def suite_christensen(cfg: VerifyConfig) -> List[TheoremCheck]:
    lo, hi = christensen_bounds(4.0, 9.0, 1.0)
    rows = [TheoremCheck("Christensen", "formula (4, 9, 1)", (1.0, 16.0), (lo, hi),
                         cfg.closed_form_tol, lo == 1.0 and hi == 16.0)]
    rng = np.random.default_rng(trial_seed(cfg.seed, 1))
    frames = []
    for i in range(10):
        n = 2 + i % 3
        fld = REAL if i % 4 == 3 else COMPLEX
        frames.append(random_gaussian_frame(n, 4 * n + i % 3, fld, rng))
    per = cfg.christensen_trials // len(frames)
    extra = cfg.christensen_trials - per * len(frames)
    for fi, f in enumerate(frames):
        b = frame_bounds_l2(f)
        witness = estimate_stability_constant(
            f, 2.0, SearchConfig(restarts=32, seed=trial_seed(cfg.seed, 2, fi))).witness
        for t in range(per + (1 if fi < extra else 0)):
            s = trial_seed(cfg.seed, 3, fi, t)
            trng = np.random.default_rng(s)
            eps = float(trng.uniform(0.0, 1.0)) * b.lower
            if eps <= 0:
                eps = 0.5 * b.lower
            mode = MODES[t % len(MODES)]
            plan = PerturbationPlan(eps, mode, float(trng.uniform(0.5, 1.0)), s, witness)
            Y = perturb_frame(f, plan, trng)
            yb = frame_bounds_l2(Y)
            plo, phi = christensen_bounds(b.lower, b.upper, eps)
            ok = yb.lower >= plo - cfg.eigen_tol and yb.upper <= phi + cfg.eigen_tol
            rows.append(TheoremCheck(
                "Christensen", f"frame {fi} ({mode})", (plo, phi), (yb.lower, yb.upper),
                cfg.eigen_tol, ok, inputs={"A": b.lower, "B": b.upper, "n": f.dim,
                                           "budget": displacement(f, Y)},
                seed=s, eps=eps, trial=t))
    return rows


def _dim2_frames(cfg: VerifyConfig, count: int, tag: int) -> List[Frame]:
    rng = np.random.default_rng(trial_seed(cfg.seed, tag))
    frames = [diluted_tight_frame(1)]
    while len(frames) < count:
        frames.append(random_gaussian_frame(2, 6 + len(frames), COMPLEX, rng))
    return frames


def suite_thm12(cfg: VerifyConfig) -> List[TheoremCheck]:
    rows = []
    v = perturbed_pr_bound(1.0, 1.0, 1.0 / 64.0)
    rows.append(TheoremCheck("MainThm12", "formula (1, 1, 1/64)", math.sqrt(2.0), v,
                             cfg.closed_form_tol, _rel_close(v, math.sqrt(2.0), 1e-12)))
    v = perturbed_pr_bound(1.7, 3.0, 1e-300)
    rows.append(TheoremCheck("MainThm12", "formula at zero budget", 1.7, v,
                             cfg.closed_form_tol, _rel_close(v, 1.7, 1e-12)))
    frames = _dim2_frames(cfg, 5, 10)
    per = cfg.thm12_trials // len(frames)
    fractions = (0.05, 0.25, 0.5, 0.9)
    for fi, f in enumerate(frames):
        trials = per + (1 if fi < cfg.thm12_trials - per * len(frames) else 0)
        base = grid_certified_stability_2d(f, 2.0, cfg.grid_resolution, cfg.grid_rel_tol)
        bounds = frame_bounds_l2(f)
        rows.append(c_lower_bound_check(base, bounds.lower, f"frame {fi} base C"))
        thr = stability_threshold(base.c_upper, bounds.upper)
        epsilons = [fr * thr for fr in fractions]
        n_eps = len(epsilons)
        # spread the trials over the budgets
        for j, eps in enumerate(epsilons):
            count = trials // n_eps + (1 if j < trials % n_eps else 0)
            if count == 0:
                continue
            sweep = perturbation_sweep(f, [eps], count, 2.0, cfg.search(),
                                       seed=trial_seed(cfg.seed, 11, fi, j),
                                       modes=MODES, theorems=("MainThm12",))
            for r in sweep:
                r.name = f"frame {fi} {r.name}"
            rows.extend(sweep)
    return rows


def suite_balan(cfg: VerifyConfig) -> List[TheoremCheck]:
    rows = []
    v = balan_rho_sum(2.0, 1.0)
    rows.append(TheoremCheck("BalanRho", "formula rho_sum(2, 1)", 0.004, v, 1e-15,
                             abs(v - 0.004) <= 1e-15))
    one = Frame(COMPLEX, np.ones((1, 1)), "dim-1")
    r = estimate_a0(one, cfg.search())
    rows.append(TheoremCheck("BalanRho", "a0 of dim-1 frame", 1.0, r.a0_estimate, 1e-6,
                             abs(r.a0_estimate - 1.0) <= 1e-6))
    basis = basis_frame(2, REAL)
    r = estimate_a0(basis, cfg.search())
    gap = magnitude_gap(basis, r.witness, 2)
    rows.append(TheoremCheck("BalanRho", "a0 of real basis", 0.0, r.a0_estimate, 1e-8,
                             r.a0_estimate < 1e-8 and gap < 1e-6, inputs={"witness_gap": gap}))
    frames = _dim2_frames(cfg, 5, 20)
    per = cfg.balan_trials // len(frames)
    fractions = (0.1, 0.5, 0.9)
    for fi, f in enumerate(frames):
        trials = per + (1 if fi < cfg.balan_trials - per * len(frames) else 0)
        a0 = grid_a0_2d(f).a0_estimate
        rho = balan_rho_sum(a0, frame_bounds_l2(f).upper)
        for j, fr in enumerate(fractions):
            count = trials // len(fractions) + (1 if j < trials % len(fractions) else 0)
            if count == 0:
                continue
            sweep = perturbation_sweep(f, [fr * rho], count, 2.0, cfg.search(),
                                       seed=trial_seed(cfg.seed, 21, fi, j), modes=MODES,
                                       theorems=("BalanRho",))
            for r in sweep:
                r.name = f"frame {fi} {r.name}"
            rows.extend(sweep)
    return rows


def suite_prop33(cfg: VerifyConfig) -> List[TheoremCheck]:
    a0, B = 2.0, 1.0
    v = l4_stability_from_a0(a0, B)
    rows = [TheoremCheck("Prop33Chain", "formula l4 constant (2, 1)", 1.0, v,
                         cfg.closed_form_tol, _rel_close(v, 1.0, 1e-12))]
    rng = np.random.default_rng(trial_seed(cfg.seed, 30))
    per = cfg.prop33_pairs // cfg.prop33_frames
    for i in range(cfg.prop33_frames):
        n = 2 + i % 4
        f = random_gaussian_frame(n, 4 * n, COMPLEX, rng)
        B = frame_bounds_l2(f).upper
        X = _gaussian(rng, (per, n), False)
        Y = _gaussian(rng, (per, n), False)
        X, Y = _retract(X, Y)
        s = rng.uniform(0.0, 1.0, per)
        X *= (np.sqrt(s) / np.linalg.norm(X, axis=1))[:, None]
        Y *= (np.sqrt(1 - s) / np.linalg.norm(Y, axis=1))[:, None]
        # random overall scale: the chain is 4-homogeneous
        scale = np.exp(rng.uniform(-1.0, 1.0, per))
        X *= scale[:, None]
        Y *= scale[:, None]
        Fc = f.vectors.conj()
        a, b = np.abs(X @ Fc.T), np.abs(Y @ Fc.T)
        lhs = np.sum((a ** 2 - b ** 2) ** 2, axis=1)
        norms = np.sum(np.abs(X) ** 2, axis=1) + np.sum(np.abs(Y) ** 2, axis=1)
        rhs = np.sqrt(np.sum((a - b) ** 4, axis=1)) * 2.0 * B * norms
        slack = float(np.min(rhs + 1e-9 - lhs))
        rows.append(TheoremCheck("Prop33Chain", f"Cauchy-Schwarz chain frame {i} (n={n})",
                                 0.0, slack, 1e-9, slack >= 0.0,
                                 inputs={"n": n, "pairs": per, "B": B}))
        fb = p_frame_bounds(f, 4, SearchConfig(restarts=64, seed=trial_seed(cfg.seed, 31, i)))
        start = VectorPair(fb.lower_witness, np.zeros(n))
        rep = estimate_a0(f, SearchConfig(restarts=64, seed=trial_seed(cfg.seed, 32, i)),
                          starts=[start])
        rows.append(TheoremCheck("Prop33Chain", f"a0^(1/4) <= A4 frame {i} (n={n})",
                                 fb.lower, rep.a0_estimate ** 0.25, 1e-6,
                                 rep.a0_estimate ** 0.25 <= fb.lower + 1e-6,
                                 inputs={"n": n, "a0": rep.a0_estimate}))
    return rows


def suite_lemma21(cfg: VerifyConfig) -> List[TheoremCheck]:
    rows = []
    rng = np.random.default_rng(trial_seed(cfg.seed, 40))
    frames = [diluted_tight_frame(1),
              random_gaussian_frame(2, 8, COMPLEX, rng),
              random_gaussian_frame(3, 12, COMPLEX, rng),
              random_gaussian_frame(4, 16, COMPLEX, rng),
              random_gaussian_frame(3, 10, REAL, rng)]
    for i, f in enumerate(frames):
        srng = np.random.default_rng(trial_seed(cfg.seed, 41, i))
        ortho, _ = sample_min_ratio(f, 2.0, cfg.reduction_pairs, srng, orthogonal=True)
        general, _ = sample_min_ratio(f, 2.0, cfg.reduction_pairs, srng, orthogonal=False)
        rep = estimate_stability_constant(f, 2.0, cfg.search(trial_seed(cfg.seed, 42, i)))
        rows.append(c_lower_bound_check(rep, frame_bounds_l2(f).lower, f"frame {i} C"))
        best_ortho = min(ortho, rep.min_ratio)
        rows.append(TheoremCheck(
            "Lemma21Reduction", f"orthogonal <= general, frame {i} (n={f.dim}, {f.field})",
            general, best_ortho, 1e-6, best_ortho <= general + 1e-6,
            inputs={"sampled_orthogonal": ortho, "searched_orthogonal": rep.min_ratio}))
        if f.dim != 2:
            continue
        grid = grid_certified_stability_2d(f, 2.0, cfg.grid_resolution, cfg.grid_rel_tol)
        rows.append(c_lower_bound_check(grid, frame_bounds_l2(f).lower, f"frame {i} grid C"))
        n = f.dim
        drng = np.random.default_rng(trial_seed(cfg.seed, 43, i))
        X = _gaussian(drng, (cfg.reduction_dense_pairs, n), f.is_real)
        Y = _gaussian(drng, (cfg.reduction_dense_pairs, n), f.is_real)
        ratios = batch_ratios(f, X, Y, 2.0)
        order = np.argsort(np.where(np.isnan(ratios), np.inf, ratios))[:5]
        dense = float(ratios[order[0]])
        for j in order:
            val, _ = refine_general_pair(f, 2.0, VectorPair(X[j], Y[j]))
            dense = min(dense, val)
        rel = abs(dense - grid.min_ratio) / grid.min_ratio
        rows.append(TheoremCheck(
            "Lemma21Reduction", f"grid orthogonal vs dense general, frame {i}",
            grid.min_ratio, dense, 0.02, rel <= 0.02 and dense >= grid.lower_ratio - 1e-9,
            inputs={"relative_difference": rel}))
    return rows


SUITE_FUNCS: Dict[str, Callable[[VerifyConfig], List[TheoremCheck]]] = {
    "verify-christensen": suite_christensen,
    "verify-thm12": suite_thm12,
    "verify-balan": suite_balan,
    "verify-prop33": suite_prop33,
    "verify-lemma21": suite_lemma21,
    "verify-ex33": suite_ex33,
    "verify-prop34": suite_prop34,
}


def run_suite(name: str, config: Optional[VerifyConfig] = None) -> SuiteResult:
    """Run one named suite (or ``all``) and collect its checks."""
    cfg = config if config is not None else VerifyConfig()
    if name != "all" and name not in SUITE_FUNCS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    names = SUITES if name == "all" else (name,)
    start = time.perf_counter()
    checks: List[TheoremCheck] = []
    for n in names:
        checks.extend(SUITE_FUNCS[n](cfg))
    return SuiteResult(name, checks, cfg, time.perf_counter() - start)


__all__ = ["SUITES", "VerifyConfig", "SuiteResult", "run_suite", "default_seed"]
