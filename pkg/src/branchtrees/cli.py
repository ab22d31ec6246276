"""Command-line interface.

Subcommands: ``malthus``, ``spine-law``, ``simulate``, ``spine``,
``verify``, ``growth``, ``xlogx``.  Laws come from a JSON file
(``--law path``) or a named builtin (``--law builtin:LAW-A``).

Every stochastic run writes its master seed and the replicate-stream
derivation rule into the report header; replicate i always uses the
stream seeded by (seed, i), so reruns are byte-identical and adding
replicates never changes existing rows.

Exit codes: 0 success, 1 a verification ran and failed its tolerance,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field

from .characteristics import growth_ratio_estimate, parse_characteristic
from .errors import BranchTreesError, InputError
from .lawfile import resolve_law
from .laws import ReproductionLaw
from .malthus import law_period, solve_malthusian
from .oracle import verify_change_of_measure, verify_martingale_mean
from .size_biased import (
    build_spine_law,
    immortal_rank_marginal,
    spine_offspring_marginal,
)
from .streams import STREAM_RULE, replicate_stream
from .trees import (
    DEFAULT_VERTEX_BUDGET,
    coming_generation,
    coming_generation_value,
    grow_spined_tree,
    grow_stopped_tree,
    spine_increments,
)
from .xlogx import TailFamily, classify_moment_conditions

SCHEMA = 1


@dataclass
class RunConfig:
    subcommand: str
    law_source: str | None = None
    law: ReproductionLaw | None = None
    levels: int = 0
    reps: int = 1
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    tol: float = 1e-12
    max_vertices: int = DEFAULT_VERTEX_BUDGET
    max_entries: int = 10**6
    chi_names: list[str] = field(default_factory=lambda: ["ever-born"])
    with_spine: bool = False
    family: str | None = None
    family_s: float = 2.0
    family_q: float = 1.0
    family_k0: int = 1


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="branchtrees",
        description="discrete-time branching processes as random trees",
    )
    sub = top.add_subparsers(dest="subcommand", required=True)

    def common(p, law=True, stochastic=False, levels=False):
        if law:
            p.add_argument("--law", required=True, help="law file or builtin:NAME")
        if levels:
            p.add_argument("--levels", type=int, required=True)
        if stochastic:
            p.add_argument("--reps", type=int, default=1)
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write report here instead of stdout")
        p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--max-vertices", type=int, default=DEFAULT_VERTEX_BUDGET)
        p.add_argument("--max-entries", type=int, default=10**6)

    common(sub.add_parser("malthus", help="growth rate and childbearing-age mean"))
    common(sub.add_parser("spine-law", help="tilted life table and marginals"))
    common(
        sub.add_parser("simulate", help="sample stopped trees"),
        stochastic=True,
        levels=True,
    )
    common(
        sub.add_parser("spine", help="sample trees with an immortal line"),
        stochastic=True,
        levels=True,
    )
    p_verify = sub.add_parser("verify", help="exact enumeration checks")
    common(p_verify, levels=True)
    p_verify.add_argument(
        "--spine",
        action="store_true",
        help="also verify the spined-tree change of measure",
    )
    p_growth = sub.add_parser("growth", help="Monte Carlo growth ratios")
    common(p_growth, stochastic=True, levels=True)
    p_growth.add_argument(
        "--chi",
        default="ever-born",
        help="comma-separated characteristics (ever-born, newborn, alive-L)",
    )
    p_xlogx = sub.add_parser("xlogx", help="offspring moment conditions")
    common(p_xlogx, law=False)
    p_xlogx.add_argument("--law", help="law file or builtin:NAME")
    p_xlogx.add_argument(
        "--family", choices=("delayed-power", "delayed-zeta2-log")
    )
    p_xlogx.add_argument("--s", type=float, default=2.0)
    p_xlogx.add_argument("--q", type=float, default=1.0)
    p_xlogx.add_argument("--k0", type=int, default=1)
    return top


def load_config(argv=None) -> RunConfig:
    args = _parser().parse_args(argv)
    cfg = RunConfig(subcommand=args.subcommand)
    cfg.out = args.out
    cfg.fmt = args.format
    cfg.tol = args.tol
    cfg.max_vertices = args.max_vertices
    cfg.max_entries = args.max_entries
    if cfg.tol <= 0:
        raise InputError("--tol must be positive")

    if getattr(args, "levels", None) is not None:
        if args.levels < 0:
            raise InputError(f"--levels must be >= 0, got {args.levels}")
        cfg.levels = args.levels
    if hasattr(args, "reps"):
        if args.reps < 1:
            raise InputError(f"--reps must be >= 1, got {args.reps}")
        cfg.reps = args.reps
        cfg.seed = args.seed
    if getattr(args, "law", None) is not None:
        cfg.law_source = args.law
        cfg.law = resolve_law(args.law)
    if hasattr(args, "chi"):
        cfg.chi_names = [c.strip() for c in args.chi.split(",") if c.strip()]
        if not cfg.chi_names:
            raise InputError("--chi needs at least one characteristic")
    cfg.with_spine = getattr(args, "spine", False)
    if cfg.subcommand == "xlogx":
        cfg.family = getattr(args, "family", None)
        cfg.family_s = args.s
        cfg.family_q = args.q
        cfg.family_k0 = args.k0
        if cfg.law is None and cfg.family is None:
            raise InputError("xlogx needs --law or --family")
    elif cfg.law is None:
        raise InputError(f"{cfg.subcommand} needs --law")
    return cfg


class ReportWriter:
    """CSV (default) or JSON-lines report with a versioned header."""

    def __init__(self, stream, fmt: str, columns: list[str], meta: dict):
        self.stream = stream
        self.fmt = fmt
        self.columns = columns
        if fmt == "csv":
            self._csv = csv.writer(stream, lineterminator="\n")
            stream.write(f"# schema={SCHEMA}\n")
            for key in meta:
                stream.write(f"# {key}={self._cell(meta[key])}\n")
            self._csv.writerow(columns)
        else:
            stream.write(json.dumps({"schema": SCHEMA, **meta}) + "\n")

    @staticmethod
    def _cell(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return repr(v)
        return v

    def row(self, values: dict) -> None:
        if self.fmt == "csv":
            self._csv.writerow([self._cell(values.get(c, "")) for c in self.columns])
        else:
            self.stream.write(json.dumps(values) + "\n")

    def summary(self, values: dict) -> None:
        if self.fmt == "csv":
            for key in values:
                self.stream.write(f"# {key}={self._cell(values[key])}\n")
        else:
            self.stream.write(json.dumps({"summary": values}) + "\n")


def dispatch(cfg: RunConfig, stream) -> int:
    handler = {
        "malthus": _run_malthus,
        "spine-law": _run_spine_law,
        "simulate": _run_simulate,
        "spine": _run_spine,
        "verify": _run_verify,
        "growth": _run_growth,
        "xlogx": _run_xlogx,
    }[cfg.subcommand]
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            return handler(cfg, fh)
    return handler(cfg, stream)


def _run_malthus(cfg, stream) -> int:
    sol = solve_malthusian(cfg.law, tol=cfg.tol)
    w = ReportWriter(
        stream,
        cfg.fmt,
        ["alpha", "beta", "criticality", "period", "residual", "exists"],
        {"law": cfg.law_source},
    )
    w.row(
        {
            "alpha": sol.alpha,
            "beta": sol.beta,
            "criticality": sol.criticality,
            "period": law_period(cfg.law),
            "residual": sol.residual,
            "exists": sol.exists,
        }
    )
    return 0


def _run_spine_law(cfg, stream) -> int:
    sol = solve_malthusian(cfg.law, tol=cfg.tol)
    spine = build_spine_law(cfg.law, sol.alpha)
    w = ReportWriter(
        stream,
        cfg.fmt,
        ["section", "ages", "index", "value"],
        {"law": cfg.law_source, "alpha": repr(sol.alpha)},
    )
    for entry in spine.table:
        w.row(
            {
                "section": "table",
                "ages": " ".join(map(str, entry.ages)),
                "index": entry.rank,
                "value": entry.mass,
            }
        )
    for k, p in spine_offspring_marginal(spine).items():
        w.row({"section": "offspring", "ages": "", "index": k, "value": p})
    for j, p in immortal_rank_marginal(spine).items():
        w.row({"section": "rank", "ages": "", "index": j, "value": p})
    for n, p in spine.regeneration_pmf.items():
        w.row({"section": "regeneration", "ages": "", "index": n, "value": p})
    return 0


def _stochastic_meta(cfg) -> dict:
    return {
        "law": cfg.law_source,
        "levels": cfg.levels,
        "reps": cfg.reps,
        "master_seed": cfg.seed,
        "streams": STREAM_RULE,
    }


def _try_alpha(law) -> float | None:
    try:
        return solve_malthusian(law).alpha
    except BranchTreesError:
        return None


def _run_simulate(cfg, stream) -> int:
    alpha = _try_alpha(cfg.law)
    w = ReportWriter(
        stream,
        cfg.fmt,
        ["replicate", "martingale", "coming_size", "total_births", "extinct"],
        _stochastic_meta(cfg),
    )
    for rep in range(cfg.reps):
        rng = replicate_stream(cfg.seed, rep)
        tree = grow_stopped_tree(cfg.law, cfg.levels, rng, cfg.max_vertices)
        stubs = coming_generation(tree)
        w.row(
            {
                "replicate": rep,
                "martingale": (
                    coming_generation_value(tree, alpha) if alpha is not None else ""
                ),
                "coming_size": len(stubs),
                "total_births": tree.vertex_count(),
                "extinct": not stubs,
            }
        )
    return 0


def _run_spine(cfg, stream) -> int:
    sol = solve_malthusian(cfg.law, tol=cfg.tol)
    spine_law = build_spine_law(cfg.law, sol.alpha)
    w = ReportWriter(
        stream,
        cfg.fmt,
        [
            "replicate",
            "martingale",
            "coming_size",
            "total_births",
            "extinct",
            "tip_generation",
            "increments",
        ],
        _stochastic_meta(cfg),
    )
    for rep in range(cfg.reps):
        rng = replicate_stream(cfg.seed, rep)
        st = grow_spined_tree(spine_law, cfg.levels, rng, cfg.max_vertices)
        stubs = coming_generation(st.tree)
        w.row(
            {
                "replicate": rep,
                "martingale": coming_generation_value(st.tree, sol.alpha),
                "coming_size": len(stubs),
                "total_births": st.tree.vertex_count(),
                "extinct": not stubs,
                "tip_generation": st.tip_generation,
                "increments": " ".join(map(str, spine_increments(st))),
            }
        )
    return 0


def _run_verify(cfg, stream) -> int:
    if cfg.levels < 1:
        raise InputError("verify needs --levels >= 1")
    from .errors import PeriodicError

    period = law_period(cfg.law)
    if period != 1:
        raise PeriodicError(
            f"law has period {period}; rescale_time it before verifying"
        )
    sol = solve_malthusian(cfg.law, tol=min(cfg.tol, 1e-12))
    w = ReportWriter(
        stream,
        cfg.fmt,
        ["level", "check", "entries", "deviation", "tolerance", "status"],
        {"law": cfg.law_source, "alpha": repr(sol.alpha), "spine": cfg.with_spine},
    )
    ok = True

    def emit(level, check, entries, deviation):
        nonlocal ok
        passed = deviation <= cfg.tol
        ok = ok and passed
        w.row(
            {
                "level": level,
                "check": check,
                "entries": entries,
                "deviation": deviation,
                "tolerance": cfg.tol,
                "status": "pass" if passed else "FAIL",
            }
        )

    spine_law = build_spine_law(cfg.law, sol.alpha) if cfg.with_spine else None
    for n in range(1, cfg.levels + 1):
        mart = verify_martingale_mean(
            cfg.law, sol.alpha, n, tol=cfg.tol, max_entries=cfg.max_entries
        )
        emit(n, "martingale-mean", mart.tree_count, mart.mean_deviation)
        emit(n, "martingale-step", mart.tree_count, mart.onestep_deviation)
        if spine_law is not None:
            rep = verify_change_of_measure(
                cfg.law, spine_law, n, tol=cfg.tol, max_entries=cfg.max_entries
            )
            emit(n, "change-of-measure", rep.tree_count, rep.max_deviation)
            emit(n, "tree-mass", rep.tree_count, abs(rep.tree_mass - 1.0))
            emit(n, "spine-mass", rep.spined_count, abs(rep.spined_mass - 1.0))
    return 0 if ok else 1


def _run_growth(cfg, stream) -> int:
    chis = [parse_characteristic(name) for name in cfg.chi_names]
    report = growth_ratio_estimate(cfg.law, cfg.levels, cfg.reps, chis, cfg.seed)
    cols = ["replicate", "survived"]
    for chi in chis:
        cols += [f"x_prev_{chi.name}", f"x_curr_{chi.name}"]
    w = ReportWriter(stream, cfg.fmt, cols, _stochastic_meta(cfg))
    for r in report.replicates:
        row = {"replicate": r.index, "survived": r.survived}
        for i, chi in enumerate(chis):
            row[f"x_prev_{chi.name}"] = r.sums_prev[i]
            row[f"x_curr_{chi.name}"] = r.sums_curr[i]
        w.row(row)
    summary = {"survivors": report.survivors, "expected_growth": report.expected_growth}
    for name, v in report.median_growth.items():
        summary[f"median_growth[{name}]"] = v
    for key, v in report.median_cross.items():
        summary[f"median_ratio[{key}]"] = v
    for key, v in report.expected_cross.items():
        summary[f"expected_ratio[{key}]"] = v
    w.summary(summary)
    return 0


def _run_xlogx(cfg, stream) -> int:
    if cfg.family == "delayed-power":
        family = TailFamily.delayed_power(cfg.family_s, cfg.family_k0)
    elif cfg.family == "delayed-zeta2-log":
        family = TailFamily.delayed_zeta2_log(cfg.family_q)
    else:
        family = TailFamily.finite(cfg.law)
    report = classify_moment_conditions(family)
    w = ReportWriter(
        stream,
        cfg.fmt,
        [
            "family",
            "alpha",
            "beta",
            "beta_finite",
            "xi_log_xi",
            "xi_log_nu",
            "nu_log_nu",
            "xi_log_xi_status",
            "xi_log_nu_status",
            "nu_log_nu_status",
            "consistent",
        ],
        {"law": cfg.law_source or report.family},
    )

    def status(cs):
        return "divergent" if cs.divergent else "finite"

    w.row(
        {
            "family": report.family,
            "alpha": report.alpha,
            "beta": report.beta,
            "beta_finite": report.beta_finite,
            "xi_log_xi": report.xi_log_xi.value,
            "xi_log_nu": report.xi_log_nu.value,
            "nu_log_nu": report.nu_log_nu.value,
            "xi_log_xi_status": status(report.xi_log_xi),
            "xi_log_nu_status": status(report.xi_log_nu),
            "nu_log_nu_status": status(report.nu_log_nu),
            "consistent": report.consistent,
        }
    )
    return 0


def main(argv=None) -> int:
    try:
        cfg = load_config(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return dispatch(cfg, sys.stdout)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BranchTreesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
