"""Command-line front end.

Exit status: 0 affirmative/complete, 2 negative verdict, 3 budget exceeded,
1 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from .convcode import (
    DEFAULT_SEARCH_BUDGET,
    code_from_dict,
    code_to_dict,
    column_distance,
    is_mdp,
    laurent_expansion,
    mdp_construct,
    singleton_bound,
)
from .errors import BudgetExceeded, NotFound, SuperregError
from .finite_field import (
    DEFAULT_FACTOR_BITS,
    FieldCtx,
    field_for_degree,
    make_field,
    parse_modulus,
)
from .linalg import matrix_from_json, matrix_to_json
from .superregular import (
    BandPattern,
    CodeParams,
    Hbar_exponents,
    SuperregularReport,
    T_exponents,
    build_Hbar_blocks,
    build_T_row,
    build_target,
    check_superregular,
    corollary_field_bound,
    gl_generic_bound,
    hutchinson_bound,
    min_field_search,
    refined_bound_exact,
    refined_bound_from_entries,
    t_row_exponents,
    theorem_field_bound,
)

EXIT_OK, EXIT_USAGE, EXIT_NEGATIVE, EXIT_BUDGET = 0, 1, 2, 3
DEFAULT_SEED = 20100
PAPER_MODULUS = tuple(1 if i in (0, 36, 37, 39, 1024) else 0 for i in range(1025))

def _env_int(name: str, default: int) -> int:
    value = os.environ.get(name)
    return int(value) if value else default


@dataclass
class RunConfig:
    command: str
    n: Optional[int] = None
    k: Optional[int] = None
    delta: Optional[int] = None
    p: int = 2
    N: Optional[str] = None  # an integer or "auto"
    modulus: Optional[str] = None
    target: str = "T"
    max_order: Optional[int] = None
    search_budget: int = field(default_factory=lambda: _env_int("SUPERREG_SEARCH_BUDGET", DEFAULT_SEARCH_BUDGET))
    factor_bits: int = field(default_factory=lambda: _env_int("SUPERREG_FACTOR_BITS", DEFAULT_FACTOR_BITS))
    N_max: int = 16
    method: str = "superregular"
    j: Optional[int] = None
    r_max: int = 10
    collect_all: bool = False
    matrix: Optional[str] = None
    code: Optional[str] = None
    seed: int = DEFAULT_SEED
    threads: int = 1
    out: Optional[str] = None
    format: str = "json"

    @property
    def params(self) -> CodeParams:
        if None in (self.n, self.k, self.delta):
            raise ConfigError("--n, --k and --delta are required")
        return CodeParams(self.n, self.k, self.delta)


class ConfigError(SuperregError):
    pass


class UsageParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here 2 means a negative verdict."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# field and report helpers


def resolve_field(cfg: RunConfig, params: Optional[CodeParams] = None) -> FieldCtx:
    if cfg.modulus:
        return make_field(cfg.p, parse_modulus(cfg.modulus), require_primitive=True, factor_bits=cfg.factor_bits)
    if cfg.N is None:
        raise ConfigError("give --N (an integer or 'auto') or --modulus")
    if cfg.N == "auto":
        if params is None:
            raise ConfigError("--N auto needs code parameters")
        found = min_field_search(params, cfg.p, cfg.N_max, cfg.target, workers=cfg.threads)
        return field_for_degree(cfg.p, found.N)
    return field_for_degree(cfg.p, int(cfg.N))


def _base_report(cfg: RunConfig) -> dict:
    return {"schema": 1, "version": __version__, "command": cfg.command, "seed": cfg.seed}


def _sr_fields(report: SuperregularReport) -> dict:
    out = {
        "verdict": report.verdict,
        "minors_checked": report.minors_checked,
        "max_order_checked": report.max_order_checked,
        "full_order": report.full_order,
    }
    if report.witness is not None:
        out["witness"] = report.witness.as_dict()
    if len(report.witnesses) > 1:
        out["witnesses"] = [w.as_dict() for w in report.witnesses]
    return out


# --------------------------------------------------------------------------
# commands; each returns (exit status, report, csv rows or None)


def cmd_build(cfg: RunConfig):
    params = cfg.params
    ctx = resolve_field(cfg, params)
    rep = _base_report(cfg) | {"params": params.as_dict(), "field": ctx.describe(), "target": cfg.target}
    if cfg.target == "Trow":
        blocks, exps = build_T_row(params, ctx)
        rep["blocks"] = [matrix_to_json(b) for b in blocks]
        rep["exponents"] = exps.to_rows()
    else:
        m, pattern = build_target(params, ctx, cfg.target)
        rep["matrix"] = matrix_to_json(m)
        rep["band"] = list(pattern.band)
        exps = T_exponents(params) if cfg.target == "T" else Hbar_exponents(params)
        rep["exponents"] = exps.to_rows()
    rep["verdict"] = "built"
    rep["warnings"] = list(ctx.warnings)
    rows = [{"row": i + 1, "exponents": " ".join("-" if e is None else str(e) for e in r)}
            for i, r in enumerate(rep["exponents"])]
    return EXIT_OK, rep, rows


def _load_matrix(cfg: RunConfig):
    data = json.loads(Path(cfg.matrix).read_text())
    f = data["field"]
    ctx = make_field(f["p"], parse_modulus(f["modulus"]), require_primitive=True, factor_bits=cfg.factor_bits)
    m = matrix_from_json(ctx, data["rows"])
    if "band" in data:
        pattern = BandPattern(m.rows, m.cols, tuple(data["band"]))
    else:
        br, bc = data.get("block", [1, 1])
        pattern = BandPattern.block_lower(br, bc, m.rows // br)
    return ctx, m, pattern


def cmd_check_sr(cfg: RunConfig):
    if cfg.matrix:
        ctx, m, pattern = _load_matrix(cfg)
        rep = _base_report(cfg) | {"field": ctx.describe(), "target": "matrix-file"}
    else:
        params = cfg.params
        ctx = resolve_field(cfg, params)
        m, pattern = build_target(params, ctx, cfg.target)
        rep = _base_report(cfg) | {"params": params.as_dict(), "field": ctx.describe(), "target": cfg.target}
    rows = []

    def record(r, c, nonzero):
        rows.append({"order": len(r), "rows": " ".join(str(i + 1) for i in r),
                     "cols": " ".join(str(j + 1) for j in c), "nonzero": int(nonzero)})

    report = check_superregular(
        m, pattern, max_order=cfg.max_order, collect_all=cfg.collect_all,
        workers=cfg.threads, on_minor=record if cfg.format == "csv" else None,
    )
    rep |= _sr_fields(report)
    rep["warnings"] = report.warnings
    status = EXIT_OK if report.superregular else EXIT_NEGATIVE if report.witness else EXIT_BUDGET
    return status, rep, rows


def bounds_report(params: CodeParams, r_max: int = 10) -> dict:
    thm = theorem_field_bound(params)
    hbar_exps = Hbar_exponents(params)
    row_exps = t_row_exponents(params)
    cor = corollary_field_bound(params)
    return {
        "theorem": {"field_degree": thm.degree, "formula": thm.formula},
        "corollary": {"exponent": cor, "field_degree": 2**cor, "formula": f"|F| >= p^(2^{cor})"},
        "entry_derived": {
            "Hbar": {"e_max": hbar_exps.e_max, "field_degree": refined_bound_from_entries(hbar_exps),
                     "exact": refined_bound_exact(hbar_exps)},
            "T": {"e_max": row_exps.e_max, "field_degree": refined_bound_from_entries(row_exps),
                  "exact": refined_bound_exact(row_exps)},
        },
        "hutchinson": {str(r): hutchinson_bound(r) for r in range(1, r_max + 1)},
        "gl_generic_c1": {str(r): gl_generic_bound(1, r) for r in range(1, r_max + 1)},
    }


def cmd_bounds(cfg: RunConfig):
    params = cfg.params
    rep = _base_report(cfg) | {"params": params.as_dict()} | bounds_report(params, cfg.r_max)
    rep["verdict"] = "computed"
    rep["warnings"] = []
    rows = [
        {"quantity": "theorem_field_degree", "value": rep["theorem"]["field_degree"]},
        {"quantity": "corollary_exponent", "value": rep["corollary"]["exponent"]},
        {"quantity": "corollary_field_degree", "value": rep["corollary"]["field_degree"]},
        {"quantity": "entry_derived_Hbar", "value": rep["entry_derived"]["Hbar"]["field_degree"]},
        {"quantity": "entry_derived_T", "value": rep["entry_derived"]["T"]["field_degree"]},
    ] + [{"quantity": f"hutchinson_B{r}", "value": v} for r, v in rep["hutchinson"].items()]
    return EXIT_OK, rep, rows


def cmd_search(cfg: RunConfig):
    params = cfg.params
    rep = _base_report(cfg) | {"params": params.as_dict(), "target": cfg.target, "p": cfg.p, "N_max": cfg.N_max}
    try:
        res = min_field_search(params, cfg.p, cfg.N_max, cfg.target, workers=cfg.threads)
    except NotFound as exc:
        rep |= {"verdict": "not-found", "message": str(exc), "warnings": []}
        return EXIT_NEGATIVE, rep, []
    ctx = field_for_degree(cfg.p, res.N)
    rep |= {"N": res.N, "field": ctx.describe(), "tried": res.tried}
    rep |= _sr_fields(res.report)
    rep["warnings"] = res.report.warnings
    return EXIT_OK, rep, res.tried


def _code_for(cfg: RunConfig):
    if cfg.code:
        data = json.loads(Path(cfg.code).read_text())
        return code_from_dict(data.get("code", data), cfg.factor_bits)
    params = cfg.params
    ctx = resolve_field(cfg, params)
    return mdp_construct(params, build_Hbar_blocks(params, ctx))


def cmd_construct(cfg: RunConfig):
    code = _code_for(cfg)
    rep = _base_report(cfg) | {"params": code.params.as_dict(), "field": code.field.describe()}
    rep["code"] = code_to_dict(code)
    rep["verdict"] = "constructed"
    rep["warnings"] = list(code.field.warnings)
    return EXIT_OK, rep, []


def cmd_column_distances(cfg: RunConfig):
    code = _code_for(cfg)
    params = code.params
    rep = _base_report(cfg) | {"params": params.as_dict(), "field": code.field.describe()}
    js = [cfg.j] if cfg.j is not None else list(range(params.L + 1))
    rows = []
    for j in js:
        cd = column_distance(code, j, cfg.search_budget)
        bound = singleton_bound(params, j)
        rows.append({"j": j, "distance": cd.distance, "bound": bound,
                     "bound_met": cd.distance == bound, "search_space": cd.search_space})
    flags = [r["bound_met"] for r in rows]
    rep["distances"] = rows
    rep["verdict"] = "all-bounds-met" if all(flags) else "bound-missed"
    rep["warnings"] = list(code.field.warnings)
    return (EXIT_OK if all(flags) else EXIT_NEGATIVE), rep, rows


def cmd_verify_mdp(cfg: RunConfig):
    code = _code_for(cfg)
    rep = _base_report(cfg) | {"params": code.params.as_dict(), "field": code.field.describe()}
    methods = ["superregular", "distance"] if cfg.method == "both" else [cfg.method]
    results = {}
    for method in methods:
        v = is_mdp(code, method, budget=cfg.search_budget, workers=cfg.threads)
        results[method] = {"is_mdp": v.is_mdp} | v.evidence
    rep["methods"] = results
    verdicts = {r["is_mdp"] for r in results.values()}
    if len(verdicts) > 1:
        rep["verdict"] = "methods-disagree"
        status = EXIT_NEGATIVE
    else:
        ok = verdicts.pop()
        rep["verdict"] = "MDP" if ok else "not-MDP"
        status = EXIT_OK if ok else EXIT_NEGATIVE
    rep["warnings"] = list(code.field.warnings)
    rows = [{"method": m} | r for m, r in results.items()]
    return status, rep, rows


def reproduce_example(
    modulus=PAPER_MODULUS,
    method: str = "superregular",
    budget: int = DEFAULT_SEARCH_BUDGET,
    factor_bits: int = DEFAULT_FACTOR_BITS,
    workers: int = 1,
) -> tuple[int, dict]:
    """The (5,2,3) code over GF(2^1024) from its Hbar blocks, verified end to end."""
    params = CodeParams(5, 2, 3)
    ctx = make_field(2, modulus, require_primitive=True, factor_bits=factor_bits)
    Hbar = build_Hbar_blocks(params, ctx)
    code = mdp_construct(params, Hbar)
    A1 = code.A_(1)
    checks = {
        "A1_Hbar1_equals_minus_Hbar2": A1 @ Hbar[1] == -Hbar[2],
        "laurent_round_trip": laurent_expansion(code, params.L) == list(Hbar),
        "A1_third_column_zero": all(not A1.raw(i, 2) for i in range(3)),
        "B0_equals_Hbar0": code.B_(0) == Hbar[0],
        "B1_equals_Hbar1_plus_A1_Hbar0": code.B_(1) == Hbar[1] + A1 @ Hbar[0],
    }
    rep = {
        "params": params.as_dict(),
        "field": ctx.describe(),
        "target": "Hbar",
        "method": method,
        "Hbar_exponents": Hbar_exponents(params).to_rows(),
        "checks": checks,
        "warnings": list(ctx.warnings),
    }
    verdict = is_mdp(code, method, budget=budget, workers=workers)
    rep |= verdict.evidence
    ok = verdict.is_mdp and all(checks.values())
    rep["verdict"] = "MDP" if ok else "not-MDP"
    return (EXIT_OK if ok else EXIT_NEGATIVE), rep


def cmd_reproduce(cfg: RunConfig):
    modulus = parse_modulus(cfg.modulus) if cfg.modulus else PAPER_MODULUS
    method = "superregular" if cfg.method == "both" else cfg.method
    status, rep = reproduce_example(modulus, method, cfg.search_budget, cfg.factor_bits, cfg.threads)
    return status, _base_report(cfg) | rep, [{"check": k, "ok": v} for k, v in rep["checks"].items()]


HANDLERS = {
    "build": cmd_build,
    "check-sr": cmd_check_sr,
    "bounds": cmd_bounds,
    "search-min-field": cmd_search,
    "construct-mdp": cmd_construct,
    "column-distances": cmd_column_distances,
    "verify-mdp": cmd_verify_mdp,
    "reproduce-example": cmd_reproduce,
}


def _compact_int(x):
    if isinstance(x, int) and x.bit_length() > 63:
        return f"~2^{x.bit_length() - 1}"
    return x


def run(cfg: RunConfig) -> tuple[int, dict, list]:
    """Dispatch one command; errors become structured report entries."""
    start = time.perf_counter()
    random.seed(cfg.seed)
    try:
        status, rep, rows = HANDLERS[cfg.command](cfg)
    except BudgetExceeded as exc:
        status, rows = EXIT_BUDGET, []
        rep = _base_report(cfg) | {
            "verdict": "budget-exceeded",
            "error": {"type": "BudgetExceeded", "message": str(exc), "budget": exc.budget,
                      "required": _compact_int(exc.required)},
        }
    except (SuperregError, ValueError, OSError, KeyError) as exc:
        status, rows = EXIT_USAGE, []
        rep = _base_report(cfg) | {
            "verdict": "error",
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
    rep.setdefault("warnings", [])
    rep["elapsed_ms"] = round((time.perf_counter() - start) * 1000, 3)
    return status, rep, rows


def render(rep: dict, rows: list, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rep, indent=2, default=str) + "\n"
    if fmt == "csv":
        rows = rows or [{"key": k, "value": json.dumps(v, default=str)} for k, v in rep.items()]
        buf = io.StringIO()
        fieldnames = list(dict.fromkeys(k for r in rows for k in r))
        writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    lines = [f"{rep.get('command')}: {rep.get('verdict')}"]
    if "field" in rep:
        f = rep["field"]
        lines.append(f"  field: GF({f['p']}^{f['N']}) mod {f['polynomial']} [{f['primitivity']}]")
    for key in ("params", "target", "minors_checked", "witness", "N", "distances", "methods", "error", "checks"):
        if key in rep:
            lines.append(f"  {key}: {json.dumps(rep[key], default=str)}")
    for w in rep.get("warnings", []):
        lines.append(f"  warning: {w}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(prog="superreg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=UsageParser)

    common = UsageParser(add_help=False)
    common.add_argument("--n", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--delta", type=int)
    common.add_argument("--p", type=int, default=2)
    common.add_argument("--N", help="extension degree or 'auto'")
    common.add_argument("--modulus", help="comma-separated coefficients, lowest degree first")
    common.add_argument("--factor-bits", type=int, dest="factor_bits",
                        default=_env_int("SUPERREG_FACTOR_BITS", DEFAULT_FACTOR_BITS))
    common.add_argument("--budget", type=int, dest="search_budget",
                        default=_env_int("SUPERREG_SEARCH_BUDGET", DEFAULT_SEARCH_BUDGET))
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")

    def target(p, choices=("T", "Hbar")):
        p.add_argument("--target", choices=choices, default="T")

    p = sub.add_parser("build", parents=[common], help="build T row blocks, T or Hbar")
    target(p, ("T", "Hbar", "Trow"))
    p = sub.add_parser("check-sr", parents=[common], help="check superregularity")
    target(p)
    p.add_argument("--matrix", help="JSON file with field, rows and band or block")
    p.add_argument("--max-order", type=int, dest="max_order",
                   default=_env_int("SUPERREG_MAX_ORDER", 0) or None)
    p.add_argument("--collect-all", action="store_true", dest="collect_all")
    p = sub.add_parser("bounds", parents=[common], help="field-size bounds")
    p.add_argument("--r-max", type=int, default=10, dest="r_max")
    p = sub.add_parser("search-min-field", parents=[common], help="smallest N giving superregularity")
    target(p)
    p.add_argument("--N-max", type=int, default=16, dest="N_max")
    p = sub.add_parser("construct-mdp", parents=[common], help="build A(z), B(z) from the Hbar blocks")
    target(p)
    p.add_argument("--N-max", type=int, default=16, dest="N_max")
    p = sub.add_parser("column-distances", parents=[common], help="brute-force column distances")
    p.add_argument("--code", help="code JSON written by construct-mdp")
    p.add_argument("--j", type=int)
    target(p)
    p.add_argument("--N-max", type=int, default=16, dest="N_max")
    p = sub.add_parser("verify-mdp", parents=[common], help="MDP check by superregularity and/or distance")
    p.add_argument("--code", help="code JSON written by construct-mdp")
    p.add_argument("--method", choices=("superregular", "distance", "both"), default="superregular")
    target(p)
    p.add_argument("--N-max", type=int, default=16, dest="N_max")
    p = sub.add_parser("reproduce-example", parents=[common], help="the (5,2,3) code over GF(2^1024)")
    p.add_argument("--method", choices=("superregular", "distance", "both"), default="superregular")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    known = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(ns).items() if k in known})


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = config_from_args(ns)
    status, rep, rows = run(cfg)
    text = render(rep, rows, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
