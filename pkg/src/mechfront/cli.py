"""``mechfront`` command line.

Exit codes: 0 success, 2 configuration error, 3 consistency failure,
4 domain too large.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from . import desiderata as D
from .errors import ConsistencyError, DomainTooLargeError, MechFrontError
from .findopt import find_opt
from .frontier import compute_frontier, validate
from .mechanisms import (EXANTE, Mechanism, ProblemSpec, builtin, make_hybrid,
                         manipulability_witness, signature, worst_profile)
from .prefcore import (DEFAULT_MAX_VARIABLES, PrefOrder, Profile, ProfileSpace, Setting,
                       enumerate_profiles, restrict)
from .serialize import (export_frontier, parse_rational, read_mechanism_json,
                        write_mechanism_json)

log = logging.getLogger("mechfront")

EXIT_OK, EXIT_CONFIG, EXIT_CONSISTENCY, EXIT_TOO_LARGE = 0, 2, 3, 4


class ConfigError(MechFrontError):
    pass


def load_schema() -> dict:
    return json.loads(resources.files("mechfront").joinpath("data/config.schema.json").read_text())


def load_config(path) -> dict:
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, load_schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    cfg["_base"] = path.resolve().parent
    return cfg


def _path(cfg, p) -> Path:
    p = Path(p)
    return p if p.is_absolute() else cfg["_base"] / p


def build_space(cfg) -> ProfileSpace:
    s = cfg["setting"]
    setting = Setting(s["n"], s["m"])
    kind = s.get("kind", "strict")
    cap = s.get("max_variables", DEFAULT_MAX_VARIABLES)
    if kind == "explicit":
        if "profiles" not in s:
            raise ConfigError("an explicit domain needs a profile list")
        return restrict(setting, [Profile(tuple(PrefOrder.parse(t) for t in row))
                                  for row in s["profiles"]])
    return enumerate_profiles(setting, kind, max_variables=cap)


def load_mechanism(cfg, spec, space: ProfileSpace) -> Mechanism:
    if "builtin" in spec:
        outcome = spec.get("outcome")
        if outcome is not None:
            outcome = [parse_rational(x) for x in outcome]
        return builtin(spec["builtin"], space, agent=spec.get("agent", 0), outcome=outcome)
    return read_mechanism_json(_path(cfg, spec["path"]), space)


def build_desideratum(cfg, space: ProfileSpace) -> D.DesideratumFn:
    spec = cfg["desideratum"]
    name = spec["name"]
    if name == "plurality":
        d = D.build_plurality(space)
    elif name == "veto":
        d = D.build_veto(space)
    elif name == "condorcet":
        d = D.build_condorcet(space)
    elif name == "positional":
        if "scores" not in spec:
            raise ConfigError("positional desideratum needs scores")
        d = D.build_positional(space, [parse_rational(x) for x in spec["scores"]])
    elif name == "binary":
        if "property" not in spec:
            raise ConfigError("binary desideratum needs a property")
        d = D.build_binary(space, spec["property"])
    elif name == "target":
        if "mechanism" not in spec:
            raise ConfigError("target desideratum needs a mechanism")
        d = D.build_target(space, load_mechanism(cfg, spec["mechanism"], space))
    elif name == "constant":
        d = D.build_constant(space, parse_rational(spec.get("value", 0)))
    else:
        if "path" not in spec:
            raise ConfigError("csv desideratum needs a path")
        d = D.read_desideratum_csv(_path(cfg, spec["path"]), space)
    if spec.get("relative"):
        d = D.relative_transform(d)
    return d


def _read_distribution(path, space) -> D.ProfileDistribution:
    weights = [Fraction(0)] * len(space)
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            weights[int(rec["profile_index"])] = Fraction(int(rec["numerator"]),
                                                          int(rec["denominator"]))
    return D.ProfileDistribution(space, weights)


def build_problem(cfg) -> ProblemSpec:
    space = build_space(cfg)
    d = build_desideratum(cfg, space)
    kind = cfg.get("deficit", "worst")
    dist = None
    if kind == EXANTE:
        spec = cfg.get("distribution", "uniform")
        dist = (D.ProfileDistribution.uniform(space) if spec == "uniform"
                else _read_distribution(_path(cfg, spec["path"]), space))
    return ProblemSpec(space, d, kind, dist, frozenset(cfg.get("axioms", ())))


def _outdir(cfg) -> Path:
    out = Path(cfg.get("output_dir", "mechfront-out"))
    if not out.is_absolute():
        out = cfg["_base"] / out
    out.mkdir(parents=True, exist_ok=True)
    return out


def _table(rows, header) -> str:
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells)


def cmd_frontier(cfg) -> int:
    problem = build_problem(cfg)
    frontier = compute_frontier(problem)
    if len(frontier.points) == 1:
        print("warning: deficit is already 0 at eps = 0; the frontier is the single point (0, 0)")
    rows = [(p.eps, p.deficit) for p in frontier.points]
    print(_table(rows, ["eps", "deficit"]))
    print(f"lp_calls: {frontier.lp_calls}")
    out = _outdir(cfg)
    export_frontier(frontier, out, cfg.get("sample_grid", 0))
    if cfg.get("validate") and len(frontier.points) > 1:
        report = validate(frontier, problem, jobs=cfg.get("jobs", 1))
        for name, passed, witness in report.checks:
            print(f"{'ok  ' if passed else 'FAIL'} {name}" + ("" if passed else f" at eps={witness}"))
        if not report.ok:
            return EXIT_CONSISTENCY
    print(f"wrote {out}")
    return EXIT_OK


def cmd_optimize(cfg) -> int:
    if "eps" not in cfg:
        raise ConfigError("optimize needs eps")
    problem = build_problem(cfg)
    eps = parse_rational(cfg["eps"])
    res = find_opt(problem, eps)
    out = _outdir(cfg)
    write_mechanism_json(res.mechanism, out / "mech_opt.json")
    print(f"eps: {eps}")
    print(f"deficit: {res.deficit}")
    print(f"lp: {res.lp_stats.constraints} constraints, {res.lp_stats.pivots} pivots")
    print(f"wrote {out / 'mech_opt.json'}")
    return EXIT_OK


def cmd_analyze(cfg) -> int:
    if "mechanism" not in cfg:
        raise ConfigError("analyze needs a mechanism")
    problem = build_problem(cfg)
    mech = load_mechanism(cfg, cfg["mechanism"], problem.space)
    eps, witness = manipulability_witness(mech)
    sig = signature(mech, problem)
    print(f"signature: ({sig.eps}, {sig.deficit})")
    if witness is not None:
        prof = problem.space.profiles[witness.profile]
        print(f"binding manipulation: agent {witness.agent} at profile {prof} reports "
              f"{witness.misreport}, top-{witness.k} gain {witness.gain}")
    else:
        print("binding manipulation: none (strategyproof)")
    if problem.deficit_kind != EXANTE:
        print(f"worst profile: {problem.space.profiles[worst_profile(mech, problem.d)]}")
    return EXIT_OK


def cmd_hybrid(cfg) -> int:
    if "mechanisms" not in cfg or "beta" not in cfg:
        raise ConfigError("hybrid needs two mechanisms and beta")
    problem = build_problem(cfg)
    phi, psi = (load_mechanism(cfg, m, problem.space) for m in cfg["mechanisms"])
    beta = parse_rational(cfg["beta"])
    h = make_hybrid(phi, psi, beta)
    s_phi, s_psi, s_h = (signature(x, problem) for x in (phi, psi, h))
    bound = ((1 - beta) * s_phi.eps + beta * s_psi.eps,
             (1 - beta) * s_phi.deficit + beta * s_psi.deficit)
    out = _outdir(cfg)
    write_mechanism_json(h, out / "mech_hybrid.json")
    print(f"phi: ({s_phi.eps}, {s_phi.deficit})")
    print(f"psi: ({s_psi.eps}, {s_psi.deficit})")
    print(f"hybrid beta={beta}: ({s_h.eps}, {s_h.deficit})")
    print(f"convex bound: ({bound[0]}, {bound[1]})")
    return EXIT_OK


COMMANDS = {"frontier": cmd_frontier, "optimize": cmd_optimize,
            "analyze": cmd_analyze, "hybrid": cmd_hybrid}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mechfront",
                                 description="Exact manipulability/deficit frontiers of random voting mechanisms.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--eps", help="manipulability bound, as num/den")
    ap.add_argument("--beta", help="hybrid weight, as num/den")
    ap.add_argument("--axioms", help="comma list of anon,neut,unan,pareto,condorcet")
    ap.add_argument("--deficit", choices=["worst", "exante"])
    ap.add_argument("--jobs", type=int, default=1, help="processes for validation solves")
    ap.add_argument("--sample-grid", type=int, help="emit K+1 evenly spaced frontier samples")
    ap.add_argument("--validate", action="store_true", help="re-solve every segment midpoint")
    ap.add_argument("--output-dir")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        for key in ("eps", "beta", "deficit"):
            if getattr(args, key) is not None:
                cfg[key] = getattr(args, key)
        if args.axioms is not None:
            cfg["axioms"] = [a.strip() for a in args.axioms.split(",") if a.strip()]
        if args.sample_grid is not None:
            cfg["sample_grid"] = args.sample_grid
        if args.output_dir is not None:
            cfg["output_dir"] = str(Path(args.output_dir).resolve())
        if args.validate:
            cfg["validate"] = True
        cfg["jobs"] = args.jobs
        return COMMANDS[args.command](cfg)
    except DomainTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except ConsistencyError as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        for k, v in exc.diagnostics.items():
            print(f"  {k}: {v}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (ConfigError, ValueError, KeyError, OSError, MechFrontError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
