"""Command-line front end: ``qpoly <command> --state SPEC --q Q [options]``.

Every command emits a JSON report with the keys ``command, state, q, terms,
bounds, condition_margins, verdicts, config, versions`` (plus
``certificates`` where an optimizer ran). Exit status is 0 on success, 2 when
any verdict is inconclusive or blocked by an optimizer gap, 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import platform
import sys

import numba
import numpy as np
import scipy

from . import __version__
from .core import KNOWN_STATES
from .correlations import (
    check_tradeoff_prop1,
    check_tradeoff_prop2,
    q_discord_report,
    q_unlocalizable_discord_report,
)
from .entropy import check_q, q_mutual_entropy, tsallis_entropy, xi_q
from .io import certificate_digest, dump_report, resolve_state
from .optimize import ESTIMATORS, LOWER, UPPER, OptimizerConfig
from .polygamy import (
    ghz_analytic_report,
    superadditivity_check,
    verify_equivalence,
    verify_strong_polygamy_discord,
    verify_strong_polygamy_entanglement,
)

BAD_STATUSES = ("inconclusive", "optimizer-gap")
POLYGAMY_COMMANDS = ("polygamy", "polygamy-discord", "ghz-analytic")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parties(text):
    if text is None:
        return None
    out = [t.strip() for t in text.split(",") if t.strip()]
    return [int(t) if t.isdigit() else t for t in out]


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(restarts=args.restarts, max_iterations=args.max_iter, step_tol=args.step_tol,
                           value_tol=args.value_tol, seed=args.seed, cardinality=args.cardinality)


def versions() -> dict:
    return {"qpoly": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "python": platform.python_version()}


def _report(command, args, q, terms, bounds=None, conditions=None, verdicts=None, certificates=None, **extra):
    out = {
        "command": command,
        "state": args.state,
        "q": q,
        "terms": terms,
        "bounds": bounds or {},
        "condition_margins": conditions or [],
        "verdicts": verdicts or {},
        "config": _config(args).to_dict(),
        "versions": versions(),
    }
    if certificates is not None:
        out["certificates"] = certificates
    out.update(extra)
    return out


def _cert(rep) -> dict:
    return {"measure": rep.measure, "cut": list(rep.cut), "bound": rep.bound_direction,
            "digest": certificate_digest(rep.certificate), "cardinality": rep.cardinality,
            "converged": rep.converged, "gap": rep.gap, "notes": list(rep.notes)}


def _verdicts(vs) -> dict:
    return {k: {"lhs": v.lhs, "rhs": v.rhs, "margin": v.margin, "slack": v.slack, "status": v.status}
            for k, v in vs.items()}


def cmd_entropy(args, q):
    s = resolve_state(args.state)
    terms = {"S_q": tsallis_entropy(s, q)}
    if s.n_parties > 1:
        for i, lab in enumerate(s.labels):
            terms[f"S_q({lab})"] = tsallis_entropy(s.marginal([i]), q)
    return _report("entropy", args, q, terms)


def _estimator(measure, command):
    def run(args, q):
        s = resolve_state(args.state)
        rep = ESTIMATORS[measure](s, q, _config(args), _parties(args.split))
        rest = [lab for lab in s.labels if lab not in rep.cut]
        name = f"{measure}({''.join(rest)}:{''.join(rep.cut)})"
        return _report(command, args, q, {name: rep.value}, {name: rep.bound_direction},
                       certificates={name: _cert(rep)}, restart_values=list(rep.restart_values))
    return run


def _discord(unlocalizable):
    def run(args, q):
        s = resolve_state(args.state)
        fn = q_unlocalizable_discord_report if unlocalizable else q_discord_report
        value, rep = fn(s, q, _config(args), _parties(args.measured))
        rest = [i for i, lab in enumerate(s.labels) if lab not in rep.cut]
        inner = "uE_q" if unlocalizable else "J_q"
        outer = "uD_q" if unlocalizable else "D_q"
        terms = {"I_q": q_mutual_entropy(s, rest, q), inner: rep.value, outer: value}
        bounds = {inner: rep.bound_direction, outer: LOWER if rep.bound_direction == UPPER else UPPER}
        command = "qud" if unlocalizable else "qdiscord"
        return _report(command, args, q, terms, bounds, certificates={inner: _cert(rep)})
    return run


def cmd_ccq_check(args, q):
    s = resolve_state(args.state)
    split = _parties(args.split)
    holds, margin = superadditivity_check(s, q, split)
    cut = "last party" if split is None else ",".join(map(str, split))
    return _report("ccq-check", args, q, {"margin": margin},
                   conditions=[{"cut": cut, "margin": margin, "holds": holds}])


def _tradeoff_terms(prefix, rep, terms, bounds, certs):
    terms[f"{prefix}.lhs"] = rep.lhs
    for k, v in rep.rhs_terms.items():
        terms[f"{prefix}.{k}"] = v
        bounds[f"{prefix}.{k}"] = rep.bounds[k]
        certs[f"{prefix}.{k}"] = _cert(rep.certificates[k])
    terms[f"{prefix}.residual"] = rep.residual


def cmd_tradeoff(args, q):
    psi = resolve_state(args.state)
    cfg = _config(args)
    terms, bounds, certs = {}, {}, {}
    if args.prop in ("1", "all"):
        first, second = check_tradeoff_prop1(psi, q, cfg)
        _tradeoff_terms("prop1a", first, terms, bounds, certs)
        _tradeoff_terms("prop1b", second, terms, bounds, certs)
    if args.prop in ("2", "all"):
        _tradeoff_terms("prop2", check_tradeoff_prop2(psi, q, cfg), terms, bounds, certs)
    return _report("tradeoff", args, q, terms, bounds, certificates=certs, diagnostic=q > 1 + 1e-6)


def _polygamy_report(command, args, q, rep):
    bounds = rep.bounds()
    certs = {f"{rep.kind_symbol}({t.name})": _cert(t.report) for t in rep.subsets if t.report is not None}
    conditions = [{"cut": k, "margin": v, "holds": v >= -1e-9} for k, v in rep.conditions.items()]
    return _report(command, args, q, rep.terms(), bounds, conditions, _verdicts(rep.verdicts), certs)


def cmd_polygamy(args, q):
    s = resolve_state(args.state)
    rep = verify_strong_polygamy_entanglement(s, q, _config(args), allow_large=args.allow_large)
    return _polygamy_report("polygamy", args, q, rep)


def cmd_polygamy_discord(args, q):
    s = resolve_state(args.state)
    rep = verify_strong_polygamy_discord(s, q, _config(args), allow_large=args.allow_large)
    return _polygamy_report("polygamy-discord", args, q, rep)


def cmd_equivalence(args, q):
    psi = resolve_state(args.state)
    rep = verify_equivalence(psi, q, _config(args), allow_large=args.allow_large)
    terms = {"conditional_sum": rep.conditional_sum, "Ea_sum": rep.eoa_sum, "ud_sum": rep.ud_sum,
             "sum_residual": rep.sum_residual}
    bounds, certs = {}, {}
    for t in rep.eoa_terms:
        terms[f"Ea({t.name})"] = t.value
        bounds[f"Ea({t.name})"] = t.bound
        if t.report is not None:
            certs[f"Ea({t.name})"] = _cert(t.report)
    for t in rep.ud_terms:
        terms[f"ud({t.name})"] = t.value
        bounds[f"ud({t.name})"] = t.bound
        certs[f"ud({t.name})"] = _cert(t.report)
    for k, v in rep.subset_residuals.items():
        terms[f"residual({k})"] = v
    return _report("equivalence", args, q, terms, bounds, certificates=certs,
                   conditional_pairs=rep.conditional_pairs, diagnostic=rep.diagnostic)


def cmd_ghz_analytic(args, q):
    g = ghz_analytic_report(args.n, q)
    args.state = f"ghz:{args.n}"
    terms = {"xi_q": g.xi_q, "xi_min": g.xi_interval[0], "xi_max": g.xi_interval[1], "left": g.left,
             "middle_min": g.middle_interval[0], "middle_max": g.middle_interval[1],
             "right_min": g.right_interval[0], "right_max": g.right_interval[1],
             "middle_over_left_min": g.middle_over_left_min}
    return _report("ghz-analytic", args, q, terms,
                   predictions={"strict_left_middle": g.strict_left_middle,
                                "strict_middle_right": g.strict_middle_right})


COMMANDS = {
    "entropy": cmd_entropy,
    "qe": _estimator("qE", "qe"),
    "qeoa": _estimator("qEOA", "qeoa"),
    "qcc": _estimator("qCC", "qcc"),
    "que": _estimator("qUE", "que"),
    "qdiscord": _discord(False),
    "qud": _discord(True),
    "ccq-check": cmd_ccq_check,
    "tradeoff": cmd_tradeoff,
    "polygamy": cmd_polygamy,
    "polygamy-discord": cmd_polygamy_discord,
    "equivalence": cmd_equivalence,
    "ghz-analytic": cmd_ghz_analytic,
}


def _check_q_for(command, q):
    return check_q(q, 1.0 if command in POLYGAMY_COMMANDS else 0.0)


def _status(report) -> int:
    bad = any(v["status"] in BAD_STATUSES for v in report.get("verdicts", {}).values())
    return 2 if bad else 0


def _xi(q):
    # the closed form stays finite below q = 1, where xi_q itself is not used
    return xi_q(q) if q >= 1 else (1 - 2 ** (1 - q)) / (q - 1)


def sweep_rows(command, args, grid):
    rows = []
    for q in grid:
        rows.append(COMMANDS[command](args, _check_q_for(command, float(q))))
    return rows


def sweep_table(rows) -> tuple[list[str], list[list]]:
    """Header and rows: ``q, xi_q``, every term, then ``margin``/``status`` per verdict."""
    terms, verdicts = [], []
    for r in rows:
        terms += [k for k in r["terms"] if k not in terms]
        verdicts += [k for k in r["verdicts"] if k not in verdicts]
    header = ["q", "xi_q"] + terms
    for v in verdicts:
        header += [f"{v}:margin", f"{v}:status"]
    table = []
    for r in rows:
        line = [r["q"], _xi(r["q"])] + [r["terms"].get(k, "") for k in terms]
        for v in verdicts:
            d = r["verdicts"].get(v)
            line += [d["margin"], d["status"]] if d else ["", ""]
        table.append(line)
    return header, table


def cmd_sweep(args):
    if args.command_name not in COMMANDS:
        raise ValueError(f"sweep needs --command, one of: {', '.join(COMMANDS)}")
    if args.steps < 1:
        raise ValueError("--steps must be >= 1")
    if args.q_max < args.q_min:
        raise ValueError("--q-max must be >= --q-min")
    grid = np.linspace(args.q_min, args.q_max, args.steps)
    for q in grid:
        _check_q_for(args.command_name, q)
    rows = sweep_rows(args.command_name, args, grid)
    header, table = sweep_table(rows)
    if args.csv:
        from .io import round_sig
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for line in table:
                w.writerow([f"{round_sig(x):.9g}" if isinstance(x, float) else x for x in line])
    for r in rows:
        r.pop("versions")
        r.pop("config")
    report = {"command": "sweep", "target": args.command_name, "state": args.state,
              "q": [float(q) for q in grid], "terms": {}, "bounds": {}, "condition_margins": [],
              "verdicts": {}, "rows": rows, "config": _config(args).to_dict(), "versions": versions()}
    status = max((_status(r) for r in rows), default=0)
    return report, status


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qpoly", description="Tsallis-q correlation measures and strong-polygamy checks.")
    p.add_argument("command", choices=list(COMMANDS) + ["sweep"])
    p.add_argument("--state", default="ghz:4",
                   help=f"state file (.json) or named state: {', '.join(KNOWN_STATES)}")
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--step-tol", type=float, default=1e-8)
    p.add_argument("--value-tol", type=float, default=1e-11)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cardinality", type=int, default=None,
                   help="decomposition members / measurement outcomes (default max(r, min(r^2, 16)))")
    p.add_argument("--split", default=None, help="comma-separated parties forming the B side (qe, qeoa, qcc, que, ccq-check)")
    p.add_argument("--measured", default=None, help="comma-separated measured parties (qdiscord, qud)")
    p.add_argument("--prop", choices=["1", "2", "all"], default="all", help="trade-off propositions to check")
    p.add_argument("--n", type=int, default=4, help="number of qubits for ghz-analytic")
    p.add_argument("--allow-large", action="store_true", help="allow more than five B-parties")
    p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    p.add_argument("--command", dest="command_name", default=None, help="command to run at each sweep point")
    p.add_argument("--q-min", type=float, default=1.0)
    p.add_argument("--q-max", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--csv", default=None, help="sweep CSV output path")
    return p


def run(args) -> tuple[dict, int]:
    if args.command == "sweep":
        return cmd_sweep(args)
    q = _check_q_for(args.command, args.q)
    report = COMMANDS[args.command](args, q)
    return report, _status(report)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, status = run(args)
    except (ValueError, TypeError, RuntimeError, OSError) as e:
        print(f"qpoly {args.command}: error: {e}", file=sys.stderr)
        return 1
    text = dump_report(report, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return status


__all__ = ["main", "run", "build_parser", "COMMANDS", "sweep_table"]
