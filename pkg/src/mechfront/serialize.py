"""File formats. Every rational is a ``[numerator, denominator]`` pair in lowest terms."""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

from .frontier import ParetoFrontier
from .mechanisms import Mechanism
from .prefcore import DEFAULT_MAX_VARIABLES, ProfileSpace


def frac_pair(x: Fraction) -> list[int]:
    x = Fraction(x)
    return [x.numerator, x.denominator]


def pair_frac(pair) -> Fraction:
    num, den = pair
    if isinstance(num, float) or isinstance(den, float):
        raise ValueError("rationals must be integer pairs")
    return Fraction(int(num), int(den))


def parse_rational(text) -> Fraction:
    """``"a/b"`` or an integer string; decimals are rejected."""
    if isinstance(text, (list, tuple)):
        return pair_frac(text)
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    if "." in s or "e" in s.lower():
        raise ValueError(f"rational {text!r} must be written as num/den")
    return Fraction(s)


def mechanism_to_dict(mech: Mechanism) -> dict:
    return {"space": mech.space.describe(),
            "rows": [[frac_pair(p) for p in row] for row in mech.table]}


def mechanism_from_dict(data: dict, space: ProfileSpace | None = None,
                        max_variables: int = DEFAULT_MAX_VARIABLES) -> Mechanism:
    stored = ProfileSpace.from_description(data["space"], max_variables=max_variables)
    if space is not None and stored != space:
        from .errors import SpaceMismatchError
        raise SpaceMismatchError("mechanism file was written for a different space")
    return Mechanism(space or stored, [[pair_frac(p) for p in row] for row in data["rows"]])


def write_mechanism_json(mech: Mechanism, path) -> None:
    Path(path).write_text(json.dumps(mechanism_to_dict(mech)) + "\n")


def read_mechanism_json(path, space: ProfileSpace | None = None) -> Mechanism:
    return mechanism_from_dict(json.loads(Path(path).read_text()), space)


def write_mechanism_csv(mech: Mechanism, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["profile_index", "alternative", "num", "den"])
        for idx, row in enumerate(mech.table):
            for j, p in enumerate(row):
                w.writerow([idx, j, p.numerator, p.denominator])


def read_mechanism_csv(path, space: ProfileSpace) -> Mechanism:
    table = [[Fraction(0)] * space.m for _ in range(len(space))]
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            idx, j = int(rec["profile_index"]), int(rec["alternative"])
            table[idx][j] = Fraction(int(rec["num"]), int(rec["den"]))
    return Mechanism(space, table)


def frontier_to_dict(frontier: ParetoFrontier, mech_files: list[str] | None = None) -> dict:
    out = {
        "bounds": [frac_pair(e) for e in frontier.bounds],
        "deficits": [frac_pair(d) for d in frontier.deficits],
        "slopes": [frac_pair(s) for s in frontier.slopes],
        "lp_calls": frontier.lp_calls,
    }
    if mech_files is not None:
        out["representatives"] = mech_files
    return out


def write_frontier_csv(frontier: ParetoFrontier, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps_num", "eps_den", "deficit_num", "deficit_den"])
        for p in frontier.points:
            w.writerow(frac_pair(p.eps) + frac_pair(p.deficit))


def write_samples_csv(frontier: ParetoFrontier, path, k: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps_num", "eps_den", "deficit_num", "deficit_den"])
        for e, d in frontier.sample(k):
            w.writerow(frac_pair(e) + frac_pair(d))


def read_frontier_csv(path) -> list[tuple[Fraction, Fraction]]:
    with open(path, newline="") as fh:
        return [(Fraction(int(r["eps_num"]), int(r["eps_den"])),
                 Fraction(int(r["deficit_num"]), int(r["deficit_den"])))
                for r in csv.DictReader(fh)]


def export_frontier(frontier: ParetoFrontier, outdir, sample_grid: int = 0) -> list[Path]:
    """``frontier.json``, ``frontier.csv``, ``mech_<k>.json`` and optionally samples."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    names = []
    for k, p in enumerate(frontier.points):
        name = f"mech_{k}.json"
        write_mechanism_json(p.representative, outdir / name)
        names.append(name)
        written.append(outdir / name)
    (outdir / "frontier.json").write_text(json.dumps(frontier_to_dict(frontier, names), indent=1) + "\n")
    write_frontier_csv(frontier, outdir / "frontier.csv")
    written += [outdir / "frontier.json", outdir / "frontier.csv"]
    if sample_grid:
        write_samples_csv(frontier, outdir / "frontier_samples.csv", sample_grid)
        written.append(outdir / "frontier_samples.csv")
    return written
