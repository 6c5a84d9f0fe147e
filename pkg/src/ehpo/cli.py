"""Command-line front end: ``ehpo [--config PATH] [--seed N] [--out DIR] <command> ...``.

Exit codes: 0 success (including "nothing" conclusions and Deceptive
verdicts), 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import yaml

from . import __version__
from ._jsonio import atomic_write_text, format_float, write_json
from .adversary import deception_verdict
from .certifier import CertificationError, certify, plan_distribution, pairwise_gamma, required_R
from .config import (
    ConfigError,
    ExperimentConfig,
    bundled_config,
    bundled_config_text,
    load_config,
    with_overrides,
    with_trials,
)
from .hpo.logs import read_log, write_log
from .hpo.scout import scout_hyper_hps
from .hpo.search import run_plan, split_log
from .hpo.space import HpPoint
from .logic.derivation import check_derivation
from .logic.fixtures import bundled_fixture, bundled_fixture_names, load_fixture
from .logic.formula import Atom, format_formula
from .reasoners import (
    OUTCOMES,
    DefendedReasoner,
    DefenseParams,
    NaiveReasoner,
    decide,
    naive_conclude,
    subsample_votes,
)

LOG_SUFFIX = ".log.ndjson"
BUNDLED_PREFIX = "bundled:"


class UsageError(Exception):
    pass


def threads_cap() -> int:
    """Parallelism cap from EHPO_THREADS (default 1); every command runs sequentially."""
    raw = os.environ.get("EHPO_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"EHPO_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"EHPO_THREADS must be a positive integer, got {raw!r}")
    return value


def _load(args) -> ExperimentConfig:
    if not args.config:
        raise UsageError("this command needs --config")
    if args.config.startswith(BUNDLED_PREFIX):
        cfg = bundled_config(args.config[len(BUNDLED_PREFIX):])
    else:
        cfg = load_config(args.config)
    return with_overrides(cfg, seed=args.seed, budget=args.budget)


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isinf(x)):
        return "inf"
    if isinstance(x, Fraction):
        try:
            x = float(x)
        except OverflowError:
            return "huge"
    return f"{x:.6g}"


def _conclusion_text(conclusions) -> str:
    return ", ".join(sorted(format_formula(f) for f in conclusions)) or "nothing"


# -- commands -------------------------------------------------------------------

def cmd_run(args, stdout) -> int:
    cfg = _load(args)
    plan = cfg.plan(args.name)
    log = run_plan(cfg.task, plan, cfg.master_seed)
    path = _out(args) / f"{args.name}{LOG_SUFFIX}"
    write_log(log, path)
    for alg in log.algorithms:
        best = log.best_trial(alg)
        hp = ", ".join(f"{k}={_fmt(v)}" for k, v in best.hp.items)
        print(f"{alg}: best hp ({hp}) metric {_fmt(best.metric)}", file=stdout)
    print(f"T = {log.total_time}", file=stdout)
    print(f"wrote {path}", file=stdout)
    return 0


def cmd_conclude(args, stdout) -> int:
    cfg = _load(args)
    logs = [read_log(p) for p in args.logs]
    print(_conclusion_text(naive_conclude(logs, cfg.policy)), file=stdout)
    return 0


def _fraction_rows(path) -> tuple[list[dict], list[float]]:
    if path.startswith(BUNDLED_PREFIX):
        data = yaml.safe_load(bundled_config_text(path[len(BUNDLED_PREFIX):]))
    else:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    rows = [{"name": str(r["name"]), "p": float(r["p"]), "!p": float(r["notp"]),
             "nothing": float(r.get("nothing", 0.0))} for r in data["rows"]]
    return rows, [float(x) for x in data.get("one_minus_delta", [0.75, 0.8, 0.9])]


def cmd_defend(args, stdout) -> int:
    out = _out(args)
    if args.fractions:
        rows, thresholds = _fraction_rows(args.fractions)
        prop = "p"
        source = {"fractions_file": os.path.basename(args.fractions[len(BUNDLED_PREFIX):]
                                                     if args.fractions.startswith(BUNDLED_PREFIX)
                                                     else args.fractions)}
    else:
        cfg = _load(args)
        d = cfg.defense
        if not d:
            raise ConfigError("config has no 'defense' section")
        params = DefenseParams(int(d["K"]), int(d["R"]), int(d["kappa"]), int(d["sample_budget"]),
                               0.0)
        thresholds = [float(x) for x in d.get("one_minus_delta", [0.75, 0.8, 0.9])]
        if args.logs:
            groups = [read_log(p) for p in args.logs]
        else:
            plan = with_trials(cfg.plan(d["config"]), params.K * params.R)
            log = run_plan(cfg.task, plan, cfg.master_seed)
            write_log(log, out / f"{d['config']}{LOG_SUFFIX}")
            groups = split_log(log, params.R)
        votes = subsample_votes(groups, params, cfg.policy, cfg.master_seed)
        n = len(votes)
        prop = cfg.policy.proposition
        rows = [{"name": d.get("config", "groups"), **{o: votes.count(o) / n for o in OUTCOMES}}]
        source = {"config": d.get("config"), "groups": len(groups), "kappa": params.kappa,
                  "sample_budget": params.sample_budget, "master_seed": cfg.master_seed}
    report_rows = []
    print(f"{'comparison':<16}{'p':>8}{'!p':>8}{'1-delta':>9}  conclude", file=stdout)
    for row in rows:
        for thr in thresholds:
            dec = decide(row, thr, prop)
            entry = {"name": row["name"], **dec.to_dict()}
            report_rows.append(entry)
            print(f"{row['name']:<16}{row['p']:>8.3f}{row['!p']:>8.3f}{thr:>9.2f}  {entry['conclude']}",
                  file=stdout)
    write_json(out / "defense.json", {"source": source, "rows": report_rows})
    return 0


def _reasoner(cfg: ExperimentConfig, kind: str, allowable, R_arg):
    if kind == "naive":
        return NaiveReasoner(cfg.policy), allowable
    K = int(cfg.reasoner.get("K", 3))
    R = R_arg if R_arg is not None else cfg.reasoner.get("R", "auto")
    if R == "auto":
        gamma = pairwise_gamma([plan_distribution(p) for p in allowable.values()])
        R = required_R(cfg.budget, gamma, K)
    R = int(R)
    # a defended reasoner only reads K*R-trial logs, so the demon produces those
    return DefendedReasoner(cfg.policy, K, R), {n: with_trials(p, K * R) for n, p in allowable.items()}


def cmd_demon(args, stdout) -> int:
    cfg = _load(args)
    allowable = cfg.allowable_set(args.set)
    reasoner, allowable = _reasoner(cfg, args.reasoner, allowable, args.R)
    prop = Atom(args.proposition or cfg.policy.proposition)
    verdict = deception_verdict(cfg.task, allowable, reasoner, prop, cfg.budget, mode=args.mode,
                                n=args.samples, master_seed=cfg.master_seed)
    report = {"reasoner": args.reasoner, "K": reasoner.K, "R": reasoner.R, "set": args.set,
              "proposition": format_formula(prop), **verdict.to_dict()}
    path = _out(args) / f"verdict-{args.reasoner}-{args.set}.json"
    write_json(path, report)
    label = args.reasoner if reasoner.K is None else f"{args.reasoner} K={reasoner.K} R={reasoner.R}"
    print(f"reasoner: {label}", file=stdout)
    print(f"{'config':<14}{'cost':>7}{'q_p':>12}{'q_!p':>12}{'E[t] p':>12}{'E[t] !p':>12}", file=stdout)
    for o in verdict.odds.per_config:
        print(f"{o.config:<14}{o.cost:>7}{_fmt(o.q_p):>12}{_fmt(o.q_notp):>12}"
              f"{_fmt(o.time('p')):>12}{_fmt(o.time('notp')):>12}", file=stdout)
    print(f"verdict: {verdict.kind} at t={_fmt(verdict.budget)}", file=stdout)
    print(f"  fastest p:  {verdict.witness_p.config} ({_fmt(verdict.witness_p.expected_time)})", file=stdout)
    print(f"  fastest !p: {verdict.witness_notp.config} ({_fmt(verdict.witness_notp.expected_time)})", file=stdout)
    return 0


def cmd_certify(args, stdout) -> int:
    cfg = _load(args)
    c = cfg.certify
    set_name = args.set or c.get("set")
    if set_name is None:
        raise ConfigError("name an allowable set with --set or certify.set")
    allowable = cfg.allowable_set(set_name)
    K = int(c.get("K", cfg.reasoner.get("K", 3)))
    samples = args.audit_samples if args.audit_samples is not None else int(c.get("audit_samples", 100))
    cert = certify(allowable, K, cfg.budget, audit_samples=samples, seed=cfg.master_seed)
    write_json(_out(args) / "certificate.json", {"set": set_name, **cert.to_dict()})
    print(f"gamma = {cert.gamma:.6g} nats", file=stdout)
    print(f"K = {K}, t = {_fmt(cfg.budget)}, R = {cert.R}", file=stdout)
    chk = cert.check
    print(f"{'PASS' if chk.passed else 'FAIL'} contradiction check: (KR/t)^(1/R) = {chk.lhs:.6g} "
          f"vs 1/(1+exp(-gamma K)) = {chk.rhs:.6g}", file=stdout)
    failed = not chk.passed
    if cert.audit is not None:
        for e in cert.audit.entries:
            tag = "FLAGGED" if e.flagged else ("PASS" if e.passed else "FAIL")
            print(f"{tag} {e.name}: {e.detail}", file=stdout)
        failed = failed or not cert.audit.passed
    return 1 if failed else 0


def cmd_verify_proof(args, stdout) -> int:
    target = args.fixture
    if target.startswith(BUNDLED_PREFIX):
        fx = bundled_fixture(target[len(BUNDLED_PREFIX):])
    elif not os.path.exists(target) and target in bundled_fixture_names():
        fx = bundled_fixture(target)
    else:
        fx = load_fixture(target)
    result = check_derivation(fx.derivation, fx.definitions)
    if result:
        print(f"PASS {fx.name}: {len(fx.derivation.steps)} steps verified", file=stdout)
        return 0
    detail = f" (expected {result.expected})" if result.expected else ""
    print(f"FAIL {fx.name}: step {result.index}: {result.reason}{detail}", file=stdout)
    return 1


def _trial_rows(logs):
    dims: list[str] = []
    for _, log in logs:
        for t in log.trials:
            for k in t.hp.names:
                if k not in dims:
                    dims.append(k)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["log", "algorithm", *dims, "seed_index", "metric"])
    count = 0
    for name, log in logs:
        for t in log.trials:
            hp = t.hp.as_dict()
            writer.writerow([name, t.algorithm_id, *(format_float(hp[d]) if d in hp else "" for d in dims),
                             t.seed_index, format_float(t.metric)])
            count += 1
    return buf.getvalue(), count


def cmd_report(args, stdout) -> int:
    import json

    src = Path(args.directory or args.out)
    if not src.is_dir():
        raise FileNotFoundError(f"no such directory: {src}")
    log_paths = sorted(src.glob(f"*{LOG_SUFFIX}"))
    verdicts = sorted(src.glob("verdict-*.json"))
    extras = [p for p in (src / "defense.json", src / "certificate.json") if p.exists()]
    if not (log_paths or verdicts or extras):
        raise FileNotFoundError(f"{src} holds no run artifacts")
    logs = [(p.name[:-len(LOG_SUFFIX)], read_log(p)) for p in log_paths]
    text, count = _trial_rows(logs)
    out = _out(args)
    atomic_write_text(out / "trials.csv", text)
    summary = {
        "logs": [{"name": n, "trials": l.total_time, "procedure": l.header.procedure_id} for n, l in logs],
        "verdicts": [],
        "defense": None,
        "certificate": None,
    }
    for p in verdicts:
        v = json.loads(p.read_text(encoding="utf-8"))
        summary["verdicts"].append({"file": p.name, "reasoner": v.get("reasoner"), "verdict": v.get("verdict")})
    if (src / "defense.json").exists():
        d = json.loads((src / "defense.json").read_text(encoding="utf-8"))
        summary["defense"] = [{"name": r["name"], "one_minus_delta": r["one_minus_delta"],
                               "conclude": r["conclude"]} for r in d["rows"]]
    if (src / "certificate.json").exists():
        c = json.loads((src / "certificate.json").read_text(encoding="utf-8"))
        summary["certificate"] = {"gamma": c["gamma"], "K": c["K"], "t": c["t"], "R": c["R"],
                                  "passed": c["contradiction_check"]["passed"]}
    write_json(out / "summary.json", summary)
    print(f"wrote {out / 'trials.csv'} ({count} rows) and {out / 'summary.json'}", file=stdout)
    for v in summary["verdicts"]:
        print(f"  {v['file']}: {v['verdict']}", file=stdout)
    return 0


def cmd_scout(args, stdout) -> int:
    cfg = _load(args)
    s = cfg.scout
    if not s:
        raise ConfigError("config has no 'scout' section")
    history: list = []
    base = HpPoint({k: float(v) for k, v in s["base_hp"].items()}) if "base_hp" in s else None
    lo, hi = (float(x) for x in s["start_range"])
    final = scout_hyper_hps(cfg.task, s["algorithm"], (lo, hi), int(s.get("points_per_round", 3)),
                            int(s.get("max_rounds", 30)), cfg.master_seed, dimension=s.get("dimension"),
                            base_hp=base, log_coordinates=bool(s.get("log_coordinates", False)),
                            history=history)
    for i, r in enumerate(history):
        best = r.grid[r.best_index]
        print(f"round {i + 1}: [{r.low:.0e}, {r.high:.0e}] best at {best:.0e} ({_fmt(r.metrics[r.best_index])})",
              file=stdout)
    print(f"final range: [{final[0]:.0e}, {final[1]:.0e}]", file=stdout)
    write_json(_out(args) / "scout.json", {
        "algorithm": s["algorithm"], "dimension": s.get("dimension"),
        "final_range": list(final),
        "rounds": [{"low": r.low, "high": r.high, "grid": list(r.grid), "metrics": list(r.metrics),
                    "best_index": r.best_index} for r in history],
    })
    return 0


# -- parser -----------------------------------------------------------------------

def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--config", help="experiment config (YAML), or bundled:<name>", **kw)
    p.add_argument("--seed", type=int, help="override the config's master seed", **kw)
    p.add_argument("--out", help="output directory (default: current directory)", **kw)
    p.add_argument("--budget", type=float, help="override the time budget t", **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ehpo", description="Deception-resistant conclusions from HPO logs.")
    parser.add_argument("--version", action="version", version=__version__)
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        _add_globals(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = command("run", cmd_run, "run one named HPO config and write its log")
    p.add_argument("name")

    p = command("conclude", cmd_conclude, "apply the naive reasoner to log files")
    p.add_argument("logs", nargs="+")

    p = command("defend", cmd_defend, "subsampled-majority defense report")
    p.add_argument("--fractions", help="YAML file of vote fractions to decide directly")
    p.add_argument("--logs", nargs="+", help="group logs to use instead of generating them")

    p = command("demon", cmd_demon, "can a budget-t adversary force both p and !p?")
    p.add_argument("--set", default="grid", help="allowable config set (default: grid)")
    p.add_argument("--reasoner", choices=("naive", "defended"), default="naive")
    p.add_argument("--R", type=int, help="group count for the defended reasoner (default: certified R)")
    p.add_argument("--proposition")
    p.add_argument("--mode", choices=("exact", "montecarlo"), default="exact")
    p.add_argument("--samples", type=int, default=100_000, help="Monte Carlo samples per config")

    p = command("certify", cmd_certify, "divergence, certified R and proof audits")
    p.add_argument("--set")
    p.add_argument("--audit-samples", type=int)

    p = command("verify-proof", cmd_verify_proof, "check a derivation fixture")
    p.add_argument("fixture", help="fixture path, bundled name, or bundled:<name>")

    p = command("report", cmd_report, "trials CSV and summary of a run directory")
    p.add_argument("directory", nargs="?")

    command("scout", cmd_scout, "shrink a hyper-HP range decade by decade")
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for name, default in (("config", None), ("seed", None), ("out", "."), ("budget", None)):
        if getattr(args, name, None) is None:
            setattr(args, name, default)
    try:
        threads_cap()
        return args.func(args, stdout)
    except UsageError as exc:
        print(f"ehpo: usage error: {exc}", file=stderr)
        return 2
    except (ValueError, KeyError, OSError, CertificationError, ConfigError) as exc:
        print(f"ehpo: error: {exc}", file=stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
