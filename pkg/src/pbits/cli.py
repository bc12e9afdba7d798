"""``pbits`` command-line interface.

Global flags ``--tol``, ``--seed`` and ``--max-dim`` fall back to the
environment variables ``PBITS_TOL``, ``PBITS_SEED`` and ``PBITS_MAX_DIM``,
then to the package defaults. Numbers are printed with 12 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import checks, io
from .family import (
    FamilyParams,
    cpqc_demo,
    family_state,
    npt_candidate,
    ppt_condition,
    recurrence_block_norm,
    recurrence_output,
)
from .linalg import (
    DEFAULT_MAX_DIM,
    DEFAULT_TOL,
    DensityMatrix,
    ResourceLimitError,
    SystemLayout,
    check_dim,
    min_eigenvalue,
    random_state,
)
from .rates import (
    RateReport,
    certified_er_upper_bound,
    dw_rate,
    er_lower_witness,
    log_negativity,
)
from .security import (
    CcqEnsemble,
    block_norm_key_quality,
    ccq_of,
    criteria_bounds,
    holevo,
    joint_distance,
    security_norm,
    uniformity,
)
from .states import basic_pdit, flower, gamma_V, max_entangled, werner_asym, werner_sym
from .twisting import identity_twisting, privacy_squeeze, psq_twisting, split_key

SIG = 12
SWEEP_HEADER = (
    "p", "d", "k", "m", "ppt_analytic", "min_eig_pt", "block_norm_formula",
    "block_norm_numeric", "success_prob", "dw_rate",
)


def fmt(x: float) -> str:
    return f"{x:.{SIG}g}"


def _round(obj: Any) -> Any:
    """Round every float in a JSON-able structure to SIG significant digits."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if not math.isfinite(x) else float(fmt(x))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, complex):
        return [_round(obj.real), _round(obj.imag)]
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    return obj


def dump_json(obj: Any) -> str:
    return json.dumps(_round(obj), indent=2)


def _env_or(value, env: str, default, cast):
    if value is not None:
        return value
    raw = os.environ.get(env)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError as exc:
        raise SystemExit(f"error: {env}={raw!r} is not a valid value") from exc


@dataclass(frozen=True)
class Settings:
    tol: float = DEFAULT_TOL
    seed: int = 0
    max_dim: int = DEFAULT_MAX_DIM


def resolve_settings(args: argparse.Namespace) -> Settings:
    return Settings(
        _env_or(args.tol, "PBITS_TOL", DEFAULT_TOL, float),
        _env_or(args.seed, "PBITS_SEED", 0, int),
        _env_or(args.max_dim, "PBITS_MAX_DIM", DEFAULT_MAX_DIM, int),
    )


# gen -------------------------------------------------------------------------


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ValueError(f"{args.name} needs --{', --'.join(missing)}")


def build_state(args: argparse.Namespace, st: Settings) -> DensityMatrix:
    name = args.name
    if name in ("max-entangled", "werner-sym", "werner-asym", "gamma-v", "flower"):
        _need(args, "d")
        n = args.d * args.d
        check_dim(4 * n if name in ("gamma-v", "flower") else n, st.max_dim)
        ctor = {"max-entangled": max_entangled, "werner-sym": werner_sym, "werner-asym": werner_asym,
                "gamma-v": gamma_V, "flower": flower}[name]
        return ctor(args.d)
    if name == "basic-pdit":
        _need(args, "d", "shield-dim")
        s = args.shield_dim
        check_dim(args.d * args.d * s * s, st.max_dim)
        sigma = random_state(SystemLayout((s, s), ("A'", "B'")), np.random.default_rng(st.seed))
        return basic_pdit(args.d, sigma)
    if name == "family":
        _need(args, "p", "d", "k")
        return family_state(args.p, args.d, args.k, st.max_dim)
    if name == "recurrence":
        _need(args, "p", "d", "k", "m")
        return recurrence_output(args.p, args.d, args.k, args.m, st.max_dim)
    if name == "npt-candidate":
        _need(args, "d", "k")
        weights = tuple(args.weights) if args.weights else (0.25, 0.25, 0.25, 0.25)
        return npt_candidate(args.d, args.k, weights, st.max_dim)
    raise ValueError(f"unknown state {name!r}; choose from {', '.join(STATE_NAMES)}")


STATE_NAMES = (
    "max-entangled", "werner-sym", "werner-asym", "gamma-v", "flower",
    "basic-pdit", "family", "recurrence", "npt-candidate",
)


def cmd_gen(args, st: Settings) -> int:
    rho = build_state(args, st)
    rho = DensityMatrix(rho.matrix, rho.layout, st.tol)
    io.save_density(rho, args.out)
    print(f"wrote {args.name} ({rho.dim}x{rho.dim}, layout {','.join(rho.layout.labels)}) to {args.out}")
    return 0


# analyze ---------------------------------------------------------------------


def _has_key(rho: DensityMatrix) -> bool:
    try:
        d_a, d_b, _ = split_key(rho.layout)
    except ValueError:
        return False
    return d_a == d_b


def ccq_summary(c: CcqEnsemble) -> dict[str, Any]:
    return {
        "d": c.d,
        "p": c.p,
        "eve_dim": c.eve_dim,
        "uniformity": uniformity(c),
        "security_norm": security_norm(c),
        "joint_distance": joint_distance(c),
        "holevo": holevo(c),
    }


def analyze_state(rho: DensityMatrix, tol: float) -> dict[str, Any]:
    r = rho.residuals()
    lo_pt = min_eigenvalue(rho.pt(), 1e-8)
    report: dict[str, Any] = {
        "dims": list(rho.layout.dims),
        "labels": list(rho.layout.labels),
        "hermiticity_residual": r["hermiticity"],
        "trace": r["trace"],
        "min_eigenvalue": r["min_eigenvalue"],
        "min_eig_pt": lo_pt,
        "ppt": bool(lo_pt >= -tol),
        "log_negativity": log_negativity(rho),
    }
    if _has_key(rho):
        c = ccq_of(rho)
        report["ccq"] = ccq_summary(c)
        report["dw_rate"] = dw_rate(c)
        if rho.layout.dims[:2] == (2, 2):
            report["block_norm"] = block_norm_key_quality(rho)
            sq = privacy_squeeze(rho).matrix if len(rho.layout) > 2 else rho.matrix
            report["squeezed_state"] = [[[z.real, z.imag] for z in row] for row in sq]
    return report


def cmd_analyze(args, st: Settings) -> int:
    rho = io.load_density(args.path)
    print(dump_json(analyze_state(rho, st.tol)))
    return 0


# ccq -------------------------------------------------------------------------


def cmd_ccq(args, st: Settings) -> int:
    with open(args.path) as fh:
        obj = json.load(fh)
    if isinstance(obj, dict) and "eve" in obj:
        c = io.ccq_from_obj(obj)
    else:
        c = ccq_of(io.density_from_obj(obj))
    if args.out:
        io.save_ccq(c, args.out)
    rep = criteria_bounds(c, st.tol)
    out = ccq_summary(c)
    out["dw_rate"] = dw_rate(c)
    out["implications"] = [
        {"name": i.name, "kind": i.kind, "eps": i.eps, "lhs": i.lhs, "rhs": i.rhs,
         "applicable": i.applicable, "satisfied": i.satisfied}
        for i in rep.implications
    ]
    print(dump_json(out))
    return 0


# family sweep ----------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    p: float
    d: int
    k: int
    m: int
    ppt_analytic: bool | None
    min_eig_pt: float | None
    block_norm_formula: float | None
    block_norm_numeric: float | None
    success_prob: float | None
    dw_rate: float | None

    @property
    def skipped(self) -> bool:
        return self.min_eig_pt is None

    def cells(self) -> list[str]:
        head = [fmt(self.p), str(self.d), str(self.k), str(self.m)]
        if self.skipped:
            return head + ["skipped"] * (len(SWEEP_HEADER) - 4)
        return head + [
            "true" if self.ppt_analytic else "false",
            fmt(self.min_eig_pt), fmt(self.block_norm_formula), fmt(self.block_norm_numeric),
            fmt(self.success_prob), fmt(self.dw_rate),
        ]


def sweep_row(p: float, d: int, k: int, m: int, max_dim: int = DEFAULT_MAX_DIM) -> SweepRow:
    params = FamilyParams(p, d, k, m)
    if params.total_dim > max_dim:
        return SweepRow(p, d, k, m, None, None, None, None, None, None)
    try:
        rho = recurrence_output(p, d, k, m, max_dim)
    except ResourceLimitError:
        return SweepRow(p, d, k, m, None, None, None, None, None, None)
    return SweepRow(
        p, d, k, m,
        ppt_condition(p, d, k),
        min_eigenvalue(rho.pt(), 1e-8),
        recurrence_block_norm(p, d, k, m),
        block_norm_key_quality(rho),
        rho.meta["success_prob"],
        dw_rate(ccq_of(rho)),
    )


def _sweep_task(t):
    return sweep_row(*t)


def run_sweep(ps, ds, ks, ms, max_dim: int = DEFAULT_MAX_DIM, jobs: int = 1) -> list[SweepRow]:
    grid = [(p, d, k, m, max_dim) for p in ps for d in ds for k in ks for m in ms]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(_sweep_task, grid))
    return [_sweep_task(t) for t in grid]


def write_sweep_csv(rows: Sequence[SweepRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow(r.cells())


def cmd_family_sweep(args, st: Settings) -> int:
    rows = run_sweep(args.p, args.d, args.k, args.m, st.max_dim, args.jobs)
    if args.out in (None, "-"):
        write_sweep_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            write_sweep_csv(rows, fh)
        done = sum(not r.skipped for r in rows)
        print(f"wrote {len(rows)} rows ({done} evaluated, {len(rows) - done} skipped) to {args.out}")
    return 0


# rates -----------------------------------------------------------------------


def rate_report(rho: DensityMatrix, samples: int, seed: int) -> RateReport:
    if not _has_key(rho):
        raise ValueError("rates needs a layout starting with an A,B key")
    notes = []
    c = ccq_of(rho)
    bound = certified_er_upper_bound(rho) if len(rho.layout) > 2 else None
    if bound is None:
        notes.append("no separability certificate for the shield conditionals; er_upper unknown")
    elif bound.irreducible:
        notes.append("all shield conditionals certified separable: bound is log2 d")
    d_a, d_b, s = split_key(rho.layout)
    t = psq_twisting(rho) if (d_a, d_b) == (2, 2) and s > 1 else identity_twisting(d_a, d_b, s)
    shield = None
    if len(rho.layout) == 4:
        shield = (rho.layout.dims[2], rho.layout.dims[3])
    w = er_lower_witness(samples, t, seed, shield)
    notes.append(
        f"er_lower_witness is the max singlet overlap over {samples} sampled twisted product states; "
        "a value at most 1/d supports E_r >= log2 d for a pdit built with the same twisting"
    )
    return RateReport(
        dw_rate(c),
        log_negativity(rho),
        None if bound is None else bound.value,
        w.max_overlap,
        notes,
    )


def cmd_rates(args, st: Settings) -> int:
    rho = io.load_density(args.path)
    r = rate_report(rho, args.samples, st.seed)
    print(dump_json({
        "dw_rate": r.dw_rate,
        "log_negativity": r.log_negativity,
        "er_upper": r.er_upper,
        "er_lower_witness": r.er_lower_witness,
        "notes": r.notes,
    }))
    return 0


# verify, pqc-demo ------------------------------------------------------------


def cmd_verify(args, st: Settings) -> int:
    results = checks.run_all(st.seed, st.tol)
    for g in results:
        status = "ok" if g.ok else "FAIL"
        print(f"{g.name:10s} {g.passed:3d}/{g.total:<3d} {status}")
        for f in g.failures[:5]:
            print(f"    failed: {f}")
    ok = all(g.ok for g in results)
    print("all invariant groups pass" if ok else "some invariant groups failed")
    return 0 if ok else 1


def cmd_pqc_demo(args, st: Settings) -> int:
    r = cpqc_demo(args.d, args.k, st.max_dim, st.tol)
    print(f"controlled private channel, d={r.d}, k={r.k}")
    print(f"controller outcome probabilities: {fmt(r.probabilities[0])} {fmt(r.probabilities[1])}")
    print(f"AB fidelity with psi+ on outcome 1: {fmt(r.fidelities[0])}")
    print(f"AB fidelity with psi- on outcome 2: {fmt(r.fidelities[1])}")
    print(f"controller-state overlap Tr(sigma1 sigma2): {fmt(r.controller_overlap)}")
    print(f"AB before the message, min eigenvalue of partial transpose: {fmt(r.ab_before_pt_min_eig)}")
    print(f"flag overlap Tr(tau1 tau2): {fmt(r.hiding_overlap)}")
    return 0


# parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pbits", description="Private-state numerics toolkit.")
    ap.add_argument("--tol", type=float, default=None, help=f"numerical tolerance (default {DEFAULT_TOL:g}, env PBITS_TOL)")
    ap.add_argument("--seed", type=int, default=None, help="random seed (default 0, env PBITS_SEED)")
    ap.add_argument("--max-dim", type=int, default=None,
                    help=f"largest dense matrix dimension (default {DEFAULT_MAX_DIM}, env PBITS_MAX_DIM)")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a named state as matrix JSON")
    g.add_argument("name", help=", ".join(STATE_NAMES))
    g.add_argument("--p", type=float)
    g.add_argument("--d", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--shield-dim", type=int, help="per-party shield dimension for basic-pdit")
    g.add_argument("--weights", type=float, nargs=4, metavar=("P11", "P12", "P21", "P22"))
    g.add_argument("--out", "-o", required=True)
    g.set_defaults(func=cmd_gen)

    a = sub.add_parser("analyze", help="JSON report on a matrix file")
    a.add_argument("path")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("ccq", help="ccq summary and security-criteria checks")
    c.add_argument("path", help="matrix JSON or ccq JSON")
    c.add_argument("--out", "-o", help="write the ccq ensemble as ccq JSON")
    c.set_defaults(func=cmd_ccq)

    s = sub.add_parser("family-sweep", help="recurrence sweep over the bound-entangled family")
    s.add_argument("--p", type=float, nargs="+", required=True)
    s.add_argument("--d", type=int, nargs="+", required=True)
    s.add_argument("--k", type=int, nargs="+", required=True)
    s.add_argument("--m", type=int, nargs="+", default=[1])
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", "-o", help="CSV path; stdout when omitted")
    s.set_defaults(func=cmd_family_sweep)

    r = sub.add_parser("rates", help="key-rate and entanglement bounds as JSON")
    r.add_argument("path")
    r.add_argument("--samples", type=int, default=1000)
    r.set_defaults(func=cmd_rates)

    v = sub.add_parser("verify", help="run every invariant group")
    v.set_defaults(func=cmd_verify)

    q = sub.add_parser("pqc-demo", help="controlled private quantum channel demo")
    q.add_argument("--d", type=int, default=2)
    q.add_argument("--k", type=int, default=1)
    q.set_defaults(func=cmd_pqc_demo)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    st = resolve_settings(args)
    try:
        return args.func(args, st)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
