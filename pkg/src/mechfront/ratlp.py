"""Exact rational linear programming.

``solve`` runs a two-phase, bounded-variable revised simplex entirely in
rational arithmetic (``gmpy2.mpq`` internally, ``Fraction`` at the API).

Every row ``r`` gets a logical variable ``s_r = a_r . x`` whose bounds encode
the relation, so the constraint matrix is ``[A | -I]`` with right-hand side
0. Basic logicals are eliminated trivially; only the *kernel* (rows whose
logical is nonbasic x basic structural columns) is factorized, by sparse
Gaussian elimination. Basis changes between refactorizations are kept as a
product-form eta file.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

from gmpy2 import mpq

from .errors import LPValidationError

log = logging.getLogger(__name__)

LE, GE, EQ = "<=", ">=", "=="
RELATIONS = (LE, GE, EQ)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

BLAND = "bland"
DANTZIG = "dantzig"


def _frac(x) -> Fraction:
    if isinstance(x, float):
        raise LPValidationError(f"float coefficient {x!r}; use exact rationals")
    if isinstance(x, Fraction):
        return x
    if type(x).__name__ == "mpq":
        return Fraction(int(x.numerator), int(x.denominator))
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise LPValidationError(f"not a rational number: {x!r}") from exc


def _q(x: Fraction) -> mpq:
    return mpq(x.numerator, x.denominator)


class LinExpr:
    """Sparse linear expression ``sum(coef * x[var]) + constant``."""

    __slots__ = ("terms", "constant")

    def __init__(self, terms: Mapping[int, object] | Iterable[tuple[int, object]] = (), constant=0):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[int, Fraction] = {}
        for var, coef in items:
            acc[var] = acc.get(var, Fraction(0)) + _frac(coef)
        self.terms = {v: c for v, c in acc.items() if c != 0}
        self.constant = _frac(constant)

    def __add__(self, other):
        if not isinstance(other, LinExpr):
            other = LinExpr((), other)
        merged = list(self.terms.items()) + list(other.terms.items())
        return LinExpr(merged, self.constant + other.constant)

    def __sub__(self, other):
        if not isinstance(other, LinExpr):
            other = LinExpr((), other)
        return self + other * -1

    def __mul__(self, k):
        k = _frac(k)
        return LinExpr({v: c * k for v, c in self.terms.items()}, self.constant * k)

    __rmul__ = __mul__

    def evaluate(self, x: Sequence) -> Fraction:
        return sum((c * _frac(x[v]) for v, c in self.terms.items()), self.constant)

    def __repr__(self):
        body = " + ".join(f"{c}*x{v}" for v, c in sorted(self.terms.items()))
        return f"LinExpr({body or '0'} + {self.constant})"


class Constraint(NamedTuple):
    expr: LinExpr
    relation: str
    rhs: Fraction
    name: str | None = None

    def satisfied_by(self, x: Sequence) -> bool:
        lhs = self.expr.evaluate(x)
        if self.relation == LE:
            return lhs <= self.rhs
        if self.relation == GE:
            return lhs >= self.rhs
        return lhs == self.rhs


class LPProblem:
    """Minimize ``objective`` subject to ``constraints`` and per-variable bounds.

    Bounds are ``(lo, hi)`` with ``None`` for an infinite side; the default
    is ``(0, None)``.
    """

    def __init__(self, num_vars: int, objective: LinExpr | None = None,
                 constraints: Iterable[Constraint] = (),
                 bounds: Sequence[tuple] | None = None,
                 var_names: Sequence[str] | None = None):
        self.num_vars = int(num_vars)
        self.objective = objective if objective is not None else LinExpr()
        self.constraints: list[Constraint] = []
        for con in constraints:
            self.add_constraint(*con)
        if bounds is None:
            bounds = [(0, None)] * self.num_vars
        self.bounds = [(None if lo is None else _frac(lo), None if hi is None else _frac(hi))
                       for lo, hi in bounds]
        self.var_names = list(var_names) if var_names is not None else None

    def add_constraint(self, expr: LinExpr, relation: str, rhs=0, name: str | None = None) -> int:
        if relation not in RELATIONS:
            raise LPValidationError(f"unknown relation {relation!r}")
        self.constraints.append(Constraint(expr, relation, _frac(rhs), name))
        return len(self.constraints) - 1

    def set_bounds(self, var: int, lo=None, hi=None) -> None:
        self.bounds[var] = (None if lo is None else _frac(lo), None if hi is None else _frac(hi))

    def validate(self) -> None:
        if self.num_vars < 0:
            raise LPValidationError("negative variable count")
        if len(self.bounds) != self.num_vars:
            raise LPValidationError(f"{len(self.bounds)} bounds for {self.num_vars} variables")
        for v, (lo, hi) in enumerate(self.bounds):
            if lo is not None and hi is not None and lo > hi:
                raise LPValidationError(f"empty bound interval for variable {v}: [{lo}, {hi}]")
        exprs = [self.objective] + [c.expr for c in self.constraints]
        for e in exprs:
            if not isinstance(e, LinExpr):
                raise LPValidationError(f"expected LinExpr, got {type(e).__name__}")
            for v in e.terms:
                if not (isinstance(v, int) and 0 <= v < self.num_vars):
                    raise LPValidationError(f"variable id {v!r} out of range")
        for c in self.constraints:
            if c.relation not in RELATIONS:
                raise LPValidationError(f"unknown relation {c.relation!r}")

    def is_feasible(self, x: Sequence) -> bool:
        for v, (lo, hi) in enumerate(self.bounds):
            if (lo is not None and x[v] < lo) or (hi is not None and x[v] > hi):
                return False
        return all(c.satisfied_by(x) for c in self.constraints)

    def to_lp_text(self) -> str:
        """CPLEX-LP rendering; every row is scaled to integer coefficients."""
        name = self.var_names or [f"x{v}" for v in range(self.num_vars)]

        def integral(expr: LinExpr, rhs: Fraction):
            dens = [c.denominator for c in expr.terms.values()] + [rhs.denominator]
            scale = math.lcm(*dens) if dens else 1
            return {v: int(c * scale) for v, c in expr.terms.items()}, int(rhs * scale), scale

        def render(terms):
            parts = []
            for v in sorted(terms):
                c = terms[v]
                parts.append(f"{'-' if c < 0 else '+'} {abs(c)} {name[v]}")
            text = " ".join(parts) or "0 " + name[0]
            return text[2:] if text.startswith("+ ") else text

        lines = ["\\ exact rational LP; rows scaled to integers", "Minimize"]
        obj, _, scale = integral(self.objective, Fraction(0))
        lines.append(f" obj: {render(obj)}")
        if scale != 1:
            lines.append(f"\\ objective scaled by {scale}")
        lines.append("Subject To")
        op = {LE: "<=", GE: ">=", EQ: "="}
        for k, c in enumerate(self.constraints):
            terms, rhs, _ = integral(c.expr, c.rhs - c.expr.constant)
            label = (c.name or f"c{k}").replace(" ", "_")
            lines.append(f" {label}: {render(terms)} {op[c.relation]} {rhs}")
        extra = []
        bound_lines = []
        for v, (lo, hi) in enumerate(self.bounds):
            frac_lo = lo is not None and lo.denominator != 1
            frac_hi = hi is not None and hi.denominator != 1
            for val, rel, bad in ((lo, ">=", frac_lo), (hi, "<=", frac_hi)):
                if bad:
                    extra.append(f" bnd{v}{'lo' if rel == '>=' else 'hi'}: {val.denominator} {name[v]} {rel} {val.numerator}")
            lo_s = "-inf" if lo is None else (str(int(lo)) if not frac_lo else "-inf")
            hi_s = "+inf" if hi is None else (str(int(hi)) if not frac_hi else "+inf")
            bound_lines.append(f" {lo_s} <= {name[v]} <= {hi_s}")
        lines.extend(extra)
        lines.append("Bounds")
        lines.extend(bound_lines)
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class LPResult:
    status: str
    solution: tuple[Fraction, ...] | None = None
    objective_value: Fraction | None = None
    iterations: int = 0
    phase1_iterations: int = 0
    stats: dict = field(default_factory=dict)


# --- sparse kernel LU ---------------------------------------------------------

class _KernelLU:
    """Sparse exact LU of a square matrix given as ``{row: {col: value}}``.

    Pivots are chosen for sparsity only (exact arithmetic needs no
    stability safeguards): column singletons, then row singletons, then the
    sparsest column paired with its sparsest row.
    """

    def __init__(self, rows: dict[int, dict[int, mpq]]):
        work = {r: dict(v) for r, v in rows.items()}
        colsets: dict[int, set[int]] = {}
        for r, vals in work.items():
            for c in vals:
                colsets.setdefault(c, set()).add(r)
        if len(colsets) > len(work):
            raise ArithmeticError("kernel has more columns than rows")
        self.steps: list[tuple[int, int, mpq, dict[int, mpq], list[tuple[int, mpq]]]] = []
        active_rows = set(work)
        col_single = [c for c, s in colsets.items() if len(s) == 1]
        row_single = [r for r, v in work.items() if len(v) == 1]
        while active_rows:
            piv = None
            while col_single and piv is None:
                c = col_single.pop()
                s = colsets.get(c)
                if s is not None and len(s) == 1:
                    piv = (next(iter(s)), c)
            while row_single and piv is None:
                r = row_single.pop()
                if r in active_rows and len(work[r]) == 1:
                    piv = (r, next(iter(work[r])))
            if piv is None:
                if not colsets:
                    raise ArithmeticError("singular kernel")
                c = min(colsets, key=lambda cc: (len(colsets[cc]), cc))
                if not colsets[c]:
                    raise ArithmeticError("singular kernel")
                r = min(colsets[c], key=lambda rr: (len(work[rr]), rr))
                piv = (r, c)
            r, c = piv
            prow = work.pop(r)
            active_rows.discard(r)
            pval = prow[c]
            for cc in prow:
                colsets[cc].discard(r)
            others = colsets.pop(c)
            lcol = []
            for r2 in others:
                row2 = work[r2]
                f = row2[c] / pval
                lcol.append((r2, f))
                for cc, v in prow.items():
                    if cc == c:
                        continue
                    nv = row2.get(cc, 0) - f * v
                    if nv:
                        if cc not in row2:
                            colsets[cc].add(r2)
                        row2[cc] = nv
                    elif cc in row2:
                        del row2[cc]
                        colsets[cc].discard(r2)
                        if len(colsets[cc]) == 1:
                            col_single.append(cc)
                del row2[c]
                if len(row2) == 1:
                    row_single.append(r2)
                elif not row2:
                    raise ArithmeticError("singular kernel")
            for cc in prow:
                if cc != c and len(colsets[cc]) == 1:
                    col_single.append(cc)
            urow = {cc: v for cc, v in prow.items() if cc != c}
            self.steps.append((r, c, pval, urow, lcol))

    def solve(self, b: dict[int, mpq]) -> dict[int, mpq]:
        """``K z = b``; ``b`` keyed by row, result keyed by column."""
        b = dict(b)
        for r, _c, _p, _u, lcol in self.steps:
            br = b.get(r)
            if br:
                for r2, f in lcol:
                    nv = b.get(r2, 0) - f * br
                    if nv:
                        b[r2] = nv
                    else:
                        b.pop(r2, None)
        z: dict[int, mpq] = {}
        for r, c, pval, urow, _l in reversed(self.steps):
            acc = b.get(r, 0)
            for cc, v in urow.items():
                zc = z.get(cc)
                if zc:
                    acc -= v * zc
            if acc:
                z[c] = acc / pval
        return z

    def solve_transpose(self, g: dict[int, mpq]) -> dict[int, mpq]:
        """``K^T w = g``; ``g`` keyed by column, result keyed by row."""
        g = dict(g)
        v: dict[int, mpq] = {}
        for r, c, pval, urow, _l in self.steps:
            gc = g.get(c)
            if gc:
                val = gc / pval
                v[r] = val
                for cc, u in urow.items():
                    nv = g.get(cc, 0) - u * val
                    if nv:
                        g[cc] = nv
                    else:
                        g.pop(cc, None)
        for r, _c, _p, _u, lcol in reversed(self.steps):
            acc = v.get(r, 0)
            for r2, f in lcol:
                w2 = v.get(r2)
                if w2:
                    acc -= f * w2
            if acc:
                v[r] = acc
            else:
                v.pop(r, None)
        return v


# --- simplex ------------------------------------------------------------------------

_AT_LO, _AT_HI, _FREE = 0, 1, 2


class _Simplex:
    def __init__(self, nstruct, rows, lo, hi, cost, pivot_rule, refactor_every, stall_limit):
        self.n = nstruct
        self.R = len(rows)
        self.rows = rows
        self.cols: list[list[tuple[int, mpq]]] = [[] for _ in range(nstruct)]
        for r, row in enumerate(rows):
            for j, a in row:
                self.cols[j].append((r, a))
        self.lo = lo
        self.hi = hi
        self.cost = cost
        self.cost_vars = [j for j in range(nstruct) if cost[j]]
        self.pivot_rule = pivot_rule
        self.refactor_every = refactor_every
        self.stall_limit = stall_limit
        self.iterations = 0
        self.degenerate = 0
        self.refactors = 0

    # basis bookkeeping --------------------------------------------------
    def start(self, initial_upper):
        n, R = self.n, self.R
        total = n + R
        self.x = [mpq(0)] * total
        self.state = [None] * total
        for j in range(n):
            lo, hi = self.lo[j], self.hi[j]
            if j in initial_upper and hi is not None:
                self.x[j], self.state[j] = hi, _AT_HI
            elif lo is not None:
                self.x[j], self.state[j] = lo, _AT_LO
            elif hi is not None:
                self.x[j], self.state[j] = hi, _AT_HI
            else:
                self.x[j], self.state[j] = mpq(0), _FREE
        self.head = [n + r for r in range(R)]
        self.pos = [-1] * total
        for r in range(R):
            self.pos[n + r] = r
        self.refactor()

    def refactor(self):
        n = self.n
        self.head0 = list(self.head)
        self.pos0 = list(self.pos)
        kernel_rows = [r for r in range(self.R) if self.pos[n + r] < 0]
        self.kernel_rowset = set(kernel_rows)
        self.kernel_cols = {j for j in range(n) if self.pos[j] >= 0}
        krows = {}
        for r in kernel_rows:
            krows[r] = {j: a for j, a in self.rows[r] if j in self.kernel_cols}
        self.lu = _KernelLU(krows)
        self.etas = []
        self.refactors += 1
        self._recompute_basics()

    def _recompute_basics(self):
        n = self.n
        rhs: dict[int, mpq] = {}
        for v in range(n + self.R):
            if self.pos[v] >= 0:
                continue
            xv = self.x[v]
            if not xv:
                continue
            if v >= n:
                r = v - n
                rhs[r] = rhs.get(r, 0) + xv
            else:
                for r, a in self.cols[v]:
                    rhs[r] = rhs.get(r, 0) - a * xv
        z = self.ftran(rhs)
        for p, var in enumerate(self.head):
            self.x[var] = z.get(p, mpq(0))

    def ftran(self, a: dict[int, mpq]) -> dict[int, mpq]:
        """``B^{-1} a`` for a row-indexed sparse vector; result keyed by basis position."""
        n = self.n
        pos0 = self.pos0
        kb = {r: v for r, v in a.items() if r in self.kernel_rowset}
        zs = self.lu.solve(kb) if kb else {}
        out: dict[int, mpq] = {}
        acc: dict[int, mpq] = {}
        for j, zj in zs.items():
            out[pos0[j]] = zj
            for r, arj in self.cols[j]:
                if r not in self.kernel_rowset:
                    acc[r] = acc.get(r, 0) + arj * zj
        for r, v in a.items():
            if r not in self.kernel_rowset:
                acc[r] = acc.get(r, 0) - v
        for r, v in acc.items():
            if v:
                out[pos0[n + r]] = v
        for p, alpha, ap in self.etas:
            zp = out.get(p)
            if not zp:
                continue
            zp = zp / ap
            for i, ai in alpha.items():
                if i != p:
                    nv = out.get(i, 0) - ai * zp
                    if nv:
                        out[i] = nv
                    else:
                        out.pop(i, None)
            out[p] = zp
        return out

    def btran(self, c: dict[int, mpq]) -> dict[int, mpq]:
        """``y`` with ``y^T B = c^T``; ``c`` keyed by basis position, ``y`` by row."""
        n = self.n
        c = dict(c)
        for p, alpha, ap in reversed(self.etas):
            s = c.get(p, 0)
            if len(c) <= len(alpha):
                for i, ci in c.items():
                    if i != p:
                        ai = alpha.get(i)
                        if ai:
                            s -= ci * ai
            else:
                for i, ai in alpha.items():
                    if i != p:
                        ci = c.get(i)
                        if ci:
                            s -= ci * ai
            if s:
                c[p] = s / ap
            else:
                c.pop(p, None)
        y: dict[int, mpq] = {}
        g: dict[int, mpq] = {}
        for p, cp in c.items():
            var = self.head0[p]
            if var >= n:
                y[var - n] = -cp
            else:
                g[var] = g.get(var, 0) + cp
        kc = self.kernel_cols
        for r, yr in list(y.items()):
            for j, a in self.rows[r]:
                if j in kc:
                    g[j] = g.get(j, 0) - yr * a
        g = {j: v for j, v in g.items() if v}
        if g:
            y.update(self.lu.solve_transpose(g))
        return y

    def column(self, var: int) -> dict[int, mpq]:
        if var >= self.n:
            return {var - self.n: mpq(-1)}
        return {r: a for r, a in self.cols[var]}

    # phases ---------------------------------------------------------------
    def infeasible_cost(self) -> dict[int, mpq]:
        cb = {}
        for p, var in enumerate(self.head):
            xv = self.x[var]
            lo, hi = self.lo[var], self.hi[var]
            if lo is not None and xv < lo:
                cb[p] = mpq(-1)
            elif hi is not None and xv > hi:
                cb[p] = mpq(1)
        return cb

    def run(self, phase: int, max_iter: int | None = None) -> str:
        n = self.n
        use_bland = self.pivot_rule == BLAND
        stall = 0
        while True:
            if max_iter is not None and self.iterations >= max_iter:
                raise RuntimeError("simplex iteration limit reached")
            if len(self.etas) >= self.refactor_every:
                self.refactor()
            if phase == 1:
                cb = self.infeasible_cost()
                if not cb:
                    return OPTIMAL
            else:
                cb = {}
                for j in self.cost_vars:
                    p = self.pos[j]
                    if p >= 0:
                        cb[p] = self.cost[j]
            y = self.btran(cb)
            # reduced costs of candidates
            acc: dict[int, mpq] = {}
            for r, yr in y.items():
                for j, a in self.rows[r]:
                    acc[j] = acc.get(j, 0) + yr * a
            if phase == 2:
                for j in self.cost_vars:
                    acc[j] = acc.get(j, 0) - self.cost[j]
            # acc holds y^T A_j - c_j = -d_j for structurals; logicals: d = y_r
            bland_now = use_bland or stall >= self.stall_limit
            best = None
            best_key = None
            for j, negd in acc.items():
                if not negd or self.pos[j] >= 0:
                    continue
                st = self.state[j]
                dj = -negd
                if st == _AT_LO:
                    if dj >= 0 or self.hi[j] == self.lo[j]:
                        continue
                elif st == _AT_HI:
                    if dj <= 0 or self.hi[j] == self.lo[j]:
                        continue
                key = j if bland_now else (-abs(dj), j)
                if best_key is None or key < best_key:
                    best, best_key = (j, dj), key
            for r, yr in y.items():
                v = n + r
                if self.pos[v] >= 0 or not yr:
                    continue
                st = self.state[v]
                dj = yr
                if st == _AT_LO:
                    if dj >= 0 or self.hi[v] == self.lo[v]:
                        continue
                elif st == _AT_HI:
                    if dj <= 0 or self.hi[v] == self.lo[v]:
                        continue
                key = v if bland_now else (-abs(dj), v)
                if best_key is None or key < best_key:
                    best, best_key = (v, dj), key
            if best is None:
                return OPTIMAL if phase == 2 else INFEASIBLE
            q, dq = best
            direction = 1 if dq < 0 else -1
            alpha = self.ftran(self.column(q))
            theta, leave, leave_bound = self._ratio_test(q, direction, alpha, phase)
            if theta is None:
                if phase == 2:
                    return UNBOUNDED
                raise ArithmeticError("phase 1 ray; inconsistent basis")
            self._update(q, direction, alpha, theta, leave, leave_bound)
            self.iterations += 1
            if self.iterations % 500 == 0:
                log.debug("pivot %d phase %d etas %d", self.iterations, phase, len(self.etas))
            if theta == 0:
                self.degenerate += 1
                stall += 1
            else:
                stall = 0

    def _ratio_test(self, q, direction, alpha, phase):
        best = None
        best_var = None
        leave = None
        leave_bound = None
        lo_q, hi_q = self.lo[q], self.hi[q]
        if lo_q is not None and hi_q is not None:
            best = hi_q - lo_q
            leave = -1  # bound flip
        for p, ap in alpha.items():
            var = self.head[p]
            rate = -ap if direction > 0 else ap
            xv = self.x[var]
            lo, hi = self.lo[var], self.hi[var]
            if phase == 1 and lo is not None and xv < lo:
                if rate > 0:
                    limit, bound = (lo - xv) / rate, lo
                else:
                    continue
            elif phase == 1 and hi is not None and xv > hi:
                if rate < 0:
                    limit, bound = (xv - hi) / -rate, hi
                else:
                    continue
            elif rate < 0:
                if lo is None:
                    continue
                limit, bound = (xv - lo) / -rate, lo
            else:
                if hi is None:
                    continue
                limit, bound = (hi - xv) / rate, hi
            if best is None or limit < best or (limit == best and leave != -1
                                                and best_var is not None and var < best_var):
                best, best_var, leave, leave_bound = limit, var, p, bound
        return best, leave, leave_bound

    def _update(self, q, direction, alpha, theta, leave, leave_bound):
        x = self.x
        if theta:
            step = theta if direction > 0 else -theta
            for p, ap in alpha.items():
                var = self.head[p]
                x[var] = x[var] - step * ap
            x[q] = x[q] + step
        if leave == -1:
            self.state[q] = _AT_HI if direction > 0 else _AT_LO
            x[q] = self.hi[q] if direction > 0 else self.lo[q]
            return
        out = self.head[leave]
        x[out] = leave_bound
        self.state[out] = _AT_LO if leave_bound == self.lo[out] else _AT_HI
        self.pos[out] = -1
        self.head[leave] = q
        self.pos[q] = leave
        self.state[q] = None
        self.etas.append((leave, alpha, alpha[leave]))


def _merged_variables(lp: LPProblem) -> list[int]:
    """Representative per variable after merging ``x_u - x_v == 0`` rows."""
    parent = list(range(lp.num_vars))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for con in lp.constraints:
        if con.relation != EQ or len(con.expr.terms) != 2 or con.rhs != con.expr.constant:
            continue
        (u, a), (v, b) = con.expr.terms.items()
        if a == -b:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
    return [find(v) for v in range(lp.num_vars)]


def _perturbed(lo, hi, first, seed=0x5eed):
    """Relax finite bounds from index ``first`` on outward by distinct tiny dyadic amounts."""
    rng = random.Random(seed)
    scale = mpq(1, 1 << 40)
    plo = lo[:first] + [None if b is None else b - scale * (1 + rng.randrange(1 << 10))
                        for b in lo[first:]]
    phi = hi[:first] + [None if b is None else b + scale * (1 + rng.randrange(1 << 10))
                        for b in hi[first:]]
    return plo, phi


def solve(lp: LPProblem, pivot_rule: str = BLAND, initial_upper: Iterable[int] = (),
          refactor_every: int = 20, stall_limit: int = 50,
          max_iterations: int | None = None, perturb: bool = False) -> LPResult:
    """Solve ``lp`` exactly.

    ``pivot_rule`` is ``"bland"`` (smallest index, guaranteed termination) or
    ``"dantzig"`` (largest reduced cost, falling back to Bland after
    ``stall_limit`` consecutive degenerate pivots). ``initial_upper`` lists
    structural variables that start nonbasic at their upper bound; a good
    choice can make phase 1 unnecessary. ``perturb`` first solves a copy
    whose row bounds are relaxed by distinct tiny amounts (a feasible start
    stays feasible), which breaks
    the massive degeneracy of incentive LPs, then restores the bounds and
    finishes from the resulting basis. Deterministic for fixed inputs.
    """
    lp.validate()
    if pivot_rule not in (BLAND, DANTZIG):
        raise LPValidationError(f"unknown pivot rule {pivot_rule!r}")
    n = lp.num_vars
    rep = _merged_variables(lp)
    lo = [None] * n
    hi = [None] * n
    for v, (blo, bhi) in enumerate(lp.bounds):
        r = rep[v]
        if blo is not None:
            b = _q(blo)
            lo[r] = b if lo[r] is None else max(lo[r], b)
        if bhi is not None:
            b = _q(bhi)
            hi[r] = b if hi[r] is None else min(hi[r], b)
    for v in range(n):
        if rep[v] != v:
            lo[v] = hi[v] = mpq(0)
    merged_rows: dict[tuple, list] = {}
    for con in lp.constraints:
        acc: dict[int, mpq] = {}
        for v, c in con.expr.terms.items():
            r = rep[v]
            acc[r] = acc.get(r, 0) + _q(c)
        terms = tuple(sorted((v, c) for v, c in acc.items() if c))
        rhs = _q(con.rhs - con.expr.constant)
        rl = rhs if con.relation in (GE, EQ) else None
        rh = rhs if con.relation in (LE, EQ) else None
        if not terms:
            if (rl is not None and rl > 0) or (rh is not None and rh < 0):
                return LPResult(INFEASIBLE, stats={"presolve": "empty row"})
            continue
        if len(terms) == 1:
            v, a = terms[0]
            blo, bhi = (rl, rh) if a > 0 else (rh, rl)
            if blo is not None:
                blo = blo / a
                lo[v] = blo if lo[v] is None else max(lo[v], blo)
            if bhi is not None:
                bhi = bhi / a
                hi[v] = bhi if hi[v] is None else min(hi[v], bhi)
            continue
        seen = merged_rows.get(terms)
        if seen is None:
            merged_rows[terms] = [rl, rh]
        else:
            if rl is not None:
                seen[0] = rl if seen[0] is None else max(seen[0], rl)
            if rh is not None:
                seen[1] = rh if seen[1] is None else min(seen[1], rh)
    rows = [list(t) for t in merged_rows]
    rlo = [b[0] for b in merged_rows.values()]
    rhi = [b[1] for b in merged_rows.values()]
    if any(a is not None and b is not None and a > b for a, b in zip(lo + rlo, hi + rhi)):
        return LPResult(INFEASIBLE, stats={"presolve": "bounds"})
    cost = [mpq(0)] * n
    for v, c in lp.objective.terms.items():
        cost[rep[v]] += _q(c)
    lo_all, hi_all = lo + rlo, hi + rhi
    sx = _Simplex(n, rows, lo_all, hi_all, cost, pivot_rule, refactor_every, stall_limit)
    if perturb:
        sx.lo, sx.hi = _perturbed(lo_all, hi_all, n)
    sx.start(set(initial_upper))
    stats = {"rows": len(rows), "cols": n, "merged": sum(r != v for v, r in enumerate(rep))}
    if perturb:
        status = sx.run(1, max_iterations)
        if status != INFEASIBLE:
            status = sx.run(2, max_iterations)
        stats["perturbed_pivots"] = sx.iterations
        sx.lo, sx.hi = lo_all, hi_all
        for v, st in enumerate(sx.state):
            if st == _AT_LO:
                sx.x[v] = lo_all[v]
            elif st == _AT_HI:
                sx.x[v] = hi_all[v]
        sx.refactor()
    start = sx.iterations
    status = sx.run(1, max_iterations)
    phase1 = sx.iterations - start
    if status == INFEASIBLE:
        stats.update(degenerate=sx.degenerate, refactors=sx.refactors)
        return LPResult(INFEASIBLE, iterations=sx.iterations, phase1_iterations=phase1, stats=stats)
    status = sx.run(2, max_iterations)
    stats.update(degenerate=sx.degenerate, refactors=sx.refactors)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, iterations=sx.iterations, phase1_iterations=phase1, stats=stats)
    sx.refactor()
    solution = tuple(Fraction(int(sx.x[r].numerator), int(sx.x[r].denominator)) for r in rep)
    if not lp.is_feasible(solution):
        raise ArithmeticError("simplex returned an infeasible point")
    value = lp.objective.evaluate(solution)
    log.debug("LP solved: %d rows, %d cols, %d pivots (%d phase 1, %d degenerate)",
              len(rows), n, sx.iterations, phase1, sx.degenerate)
    return LPResult(OPTIMAL, solution, value, sx.iterations, phase1, stats)
