"""``framelab`` command line.

Every subcommand prints JSON (shortest round-trip floats) on stdout.  Exit
status: 0 on success, 1 when a verification suite has a failing check, 2 on
bad input.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .constructions import KINDS, ConstructionSpec, construct
from .frame import (COMPLEX, FIELDS, FrameFormatError, frame_bounds_l2, load_frame,
                    p_frame_bounds, save_frame, serialize_frame)
from .harness import SUITES, VerifyConfig, default_seed, run_suite
from .perturbation import MODES, PerturbationPlan, displacement, perturb_frame, perturbation_sweep
from .report import checks_to_csv, dumps, render_table
from .stability import (SearchConfig, estimate_a0, estimate_stability_constant, grid_a0_2d,
                        grid_certified_stability_2d)


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj))


def _cmd_construct(args) -> int:
    spec = ConstructionSpec(args.kind, k=args.k, n=args.n, m=args.m, field=args.field,
                            seed=args.seed)
    frame = construct(spec)
    if args.output:
        save_frame(frame, args.output)
        _emit({"written": str(args.output), "m": frame.m, "dim": frame.dim})
    else:
        sys.stdout.write(serialize_frame(frame))
    return 0


def _cmd_bounds(args) -> int:
    frame = load_frame(args.frame)
    out = {"l2": frame_bounds_l2(frame).to_dict()}
    if args.p != 2:
        cfg = SearchConfig(restarts=args.restarts, seed=args.seed)
        out["p"] = p_frame_bounds(frame, args.p, cfg).to_dict()
    _emit(out)
    return 0


def _cmd_stability(args) -> int:
    frame = load_frame(args.frame)
    if args.grid:
        if frame.dim != 2:
            raise ValueError("--grid needs a frame of dimension 2")
        rep = grid_certified_stability_2d(frame, args.p, args.resolution, args.rel_tol)
    else:
        cfg = SearchConfig(restarts=args.restarts, seed=args.seed)
        rep = estimate_stability_constant(frame, args.p, cfg)
    _emit(rep.to_dict())
    return 0


def _cmd_a0(args) -> int:
    frame = load_frame(args.frame)
    if args.grid:
        if frame.dim != 2:
            raise ValueError("--grid needs a frame of dimension 2")
        rep = grid_a0_2d(frame)
    else:
        rep = estimate_a0(frame, SearchConfig(restarts=args.restarts, seed=args.seed))
    _emit(rep.to_dict())
    return 0


def _cmd_perturb(args) -> int:
    frame = load_frame(args.frame)
    plan = PerturbationPlan(args.eps, args.mode, args.fill, args.seed)
    Y = perturb_frame(frame, plan)
    save_frame(Y, args.output)
    _emit({"written": str(args.output), "epsilon": args.eps, "budget": plan.budget,
           "displacement": displacement(frame, Y), "mode": args.mode, "seed": args.seed})
    return 0


def _cmd_sweep(args) -> int:
    frame = load_frame(args.frame)
    cfg = SearchConfig(restarts=args.restarts, seed=args.seed)
    rows = perturbation_sweep(frame, args.eps_list, args.trials, args.p, cfg, seed=args.seed,
                              modes=args.modes, fill_fraction=args.fill)
    Path(args.output).write_text(checks_to_csv(rows), encoding="utf-8")
    json_path = Path(args.output).with_suffix(".json")
    json_path.write_text(dumps({"frame": str(args.frame), "seed": args.seed,
                                "epsilons": list(args.eps_list), "trials": args.trials,
                                "checks": [r.to_dict() for r in rows]}), encoding="utf-8")
    sys.stdout.write(render_table(rows))
    failed = [r for r in rows if r.failed]
    return 1 if failed else 0


def _cmd_verify(args) -> int:
    cfg = VerifyConfig.load(args.config) if args.config else VerifyConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    result = run_suite(args.suite, cfg)
    if args.json:
        Path(args.json).write_text(result.to_json(), encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(result.to_csv(), encoding="utf-8")
    if args.table:
        sys.stdout.write(result.summary())
    else:
        sys.stdout.write(result.to_json())
    return 0 if result.passed else 1


def build_parser() -> argparse.ArgumentParser:
    seed = default_seed()
    ap = argparse.ArgumentParser(prog="framelab",
                                 description="Frame bounds, phase retrieval stability and perturbation checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a named frame")
    c.add_argument("kind", choices=KINDS)
    c.add_argument("--k", type=int, default=1)
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--m", type=int, default=None)
    c.add_argument("--field", choices=FIELDS, default=COMPLEX)
    c.add_argument("--seed", type=int, default=seed)
    c.add_argument("-o", "--output")
    c.set_defaults(func=_cmd_construct)

    b = sub.add_parser("bounds", help="l2 and p-frame bounds")
    b.add_argument("frame")
    b.add_argument("--p", type=float, default=2.0)
    b.add_argument("--restarts", type=int, default=64)
    b.add_argument("--seed", type=int, default=seed)
    b.set_defaults(func=_cmd_bounds)

    s = sub.add_parser("stability", help="estimate the stability constant")
    s.add_argument("frame")
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--grid", action="store_true", help="certified search (dimension 2 only)")
    s.add_argument("--resolution", type=float, default=1e-3)
    s.add_argument("--rel-tol", type=float, default=0.02)
    s.add_argument("--restarts", type=int, default=128)
    s.add_argument("--seed", type=int, default=seed)
    s.set_defaults(func=_cmd_stability)

    a = sub.add_parser("a0", help="estimate the a0 constant")
    a.add_argument("frame")
    a.add_argument("--grid", action="store_true", help="grid search (dimension 2 only)")
    a.add_argument("--restarts", type=int, default=128)
    a.add_argument("--seed", type=int, default=seed)
    a.set_defaults(func=_cmd_a0)

    pt = sub.add_parser("perturb", help="perturb a frame within a budget")
    pt.add_argument("frame")
    pt.add_argument("--eps", type=float, required=True)
    pt.add_argument("--mode", choices=MODES, default=MODES[0])
    pt.add_argument("--fill", type=float, default=0.99)
    pt.add_argument("--seed", type=int, default=seed)
    pt.add_argument("-o", "--output", required=True)
    pt.set_defaults(func=_cmd_perturb)

    sw = sub.add_parser("sweep", help="perturbation sweep with bound checks")
    sw.add_argument("frame")
    sw.add_argument("--eps-list", type=float, nargs="+", required=True)
    sw.add_argument("--trials", type=int, default=10)
    sw.add_argument("--p", type=float, default=2.0)
    sw.add_argument("--modes", nargs="+", choices=MODES, default=[MODES[0]])
    sw.add_argument("--fill", type=float, default=0.99)
    sw.add_argument("--restarts", type=int, default=128)
    sw.add_argument("--seed", type=int, default=seed)
    sw.add_argument("-o", "--output", required=True, help="CSV path; JSON goes next to it")
    sw.set_defaults(func=_cmd_sweep)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", help=f"one of {', '.join(SUITES + ('all',))}")
    v.add_argument("--config")
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--json", help="also write the JSON report here")
    v.add_argument("--csv", help="also write the CSV report here")
    v.add_argument("--table", action="store_true", help="print a table instead of JSON")
    v.set_defaults(func=_cmd_verify)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FrameFormatError, OSError) as exc:
        sys.stderr.write(f"framelab: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
