"""Numerical search for witnesses of existential real systems, with exact verification.

The solver minimizes a squared-violation penalty with L-BFGS-B from seeded
random starts, rounds the minimizer to rationals and re-checks every
constraint. It reports SAT only for a verified witness and never claims
unsatisfiability.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy import sparse
from scipy.optimize import minimize

from .realc import (Add, Atom, Bot, Conj, Const, Ex, Fragment, Mul, Not, RealSystem, Top, Var,
                    XLogX)

DEFAULT_TOL = 1e-7
DEFAULT_RESTARTS = 64
DEFAULT_MAX_DEN = 10**6


class NonExistentialSystem(ValueError):
    pass


class Status(enum.Enum):
    SAT = "SAT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class Constraint:
    kind: str  # "eq": lhs = rhs, "le": lhs <= rhs, "ne": lhs != rhs
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Verification:
    ok: bool
    residual: float
    exact: bool
    failures: tuple[str, ...] = ()


@dataclass(frozen=True)
class SolveResult:
    status: Status
    witness: dict[str, Fraction] | None
    verification: Verification | None
    restarts: int
    iterations: int
    seed: int
    seconds: float = field(default=0.0, compare=False)

    @property
    def residual(self) -> float | None:
        return None if self.verification is None else self.verification.residual

    def to_json(self) -> dict:
        out = {"status": self.status.value, "seed": self.seed, "restarts": self.restarts,
               "iterations": self.iterations, "seconds": round(self.seconds, 3)}
        if self.witness is not None:
            out["witness"] = {k: str(v) for k, v in sorted(self.witness.items())}
        if self.verification is not None:
            v = self.verification
            out["verification"] = {"ok": v.ok, "residual": v.residual, "exact": v.exact}
        return out


# ---------------------------------------------------------------- flattening


def flatten(sys: RealSystem) -> tuple[list[str], list[Constraint]]:
    """Variables and constraints of an existential conjunctive system."""
    if sys.fragment not in (Fragment.EXISTENTIAL, Fragment.EXISTENTIAL_LOG):
        raise NonExistentialSystem(f"fragment {sys.fragment.value} is not existential")
    names: list[str] = []
    cons: list[Constraint] = []

    def go(f):
        if isinstance(f, Ex):
            names.extend(f.vars)
            go(f.body)
        elif isinstance(f, Conj):
            for p in f.parts:
                go(p)
        elif isinstance(f, Atom):
            cons.append(Constraint("eq" if f.op == "=" else "le", f.lhs, f.rhs))
        elif isinstance(f, Not) and isinstance(f.body, Atom) and f.body.op == "=":
            cons.append(Constraint("ne", f.body.lhs, f.body.rhs))
        elif isinstance(f, Top):
            pass
        elif isinstance(f, Bot):
            cons.append(Constraint("eq", Const(Fraction(1)), Const(Fraction(0))))
        else:
            raise NonExistentialSystem(f"unexpected {type(f).__name__} in an existential system")

    go(sys.body)
    return list(dict.fromkeys(names)), cons


# ---------------------------------------------------------------- exact evaluation


def _value(t, w: Mapping[str, Fraction]):
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Var):
        return w[t.name]
    if isinstance(t, Add):
        return sum((_value(x, w) for x in t.terms), Fraction(0))
    if isinstance(t, Mul):
        out = Fraction(1)
        for x in t.factors:
            out *= _value(x, w)
        return out
    if isinstance(t, XLogX):
        a = _value(t.arg, w)
        return 0.0 if a == 0 else float(a) * math.log2(float(a))
    raise TypeError(type(t).__name__)


def verify(sys: RealSystem, witness: Mapping[str, Fraction], tol: float = DEFAULT_TOL) -> Verification:
    names, cons = flatten(sys)
    missing = [n for n in names if n not in witness]
    if missing:
        raise KeyError(f"witness lacks values for {missing[:5]}")
    w = {k: Fraction(v) for k, v in witness.items()}
    resid, exact, failures = 0.0, True, []
    for i, c in enumerate(cons):
        d = _value(c.lhs, w) - _value(c.rhs, w)
        if c.kind == "eq":
            viol = abs(d)
        elif c.kind == "le":
            viol = max(d, 0)
        else:
            if abs(d) <= tol:
                failures.append(f"constraint {i}: expected nonzero, got {float(d):.3g}")
                resid, exact = math.inf, False
            continue
        if viol != 0:
            exact = False
        viol = float(viol)
        resid = max(resid, viol)
        if viol > tol:
            failures.append(f"constraint {i} ({c.kind}) violated by {viol:.3g}")
    return Verification(not failures, resid, exact, tuple(failures))


# ---------------------------------------------------------------- numerics


class _Linear:
    """Registry of linear forms, evaluated together as one sparse product."""

    def __init__(self, index: dict[str, int]):
        self.index = index
        self.rows: list[dict[int, float]] = []
        self.consts: list[float] = []
        self.seen: dict[tuple, int] = {}

    def add(self, t) -> int:
        coeffs: dict[int, float] = {}
        const = self._collect(t, 1.0, coeffs)
        key = (tuple(sorted(coeffs.items())), const)
        if key not in self.seen:
            self.seen[key] = len(self.rows)
            self.rows.append(coeffs)
            self.consts.append(const)
        return self.seen[key]

    def _collect(self, t, c, coeffs) -> float:
        if isinstance(t, Const):
            return c * float(t.value)
        if isinstance(t, Var):
            i = self.index[t.name]
            coeffs[i] = coeffs.get(i, 0.0) + c
            return 0.0
        if isinstance(t, Add):
            return sum(self._collect(x, c, coeffs) for x in t.terms)
        if isinstance(t, Mul) and sum(not isinstance(f, Const) for f in t.factors) <= 1:
            k = c
            rest = None
            for f in t.factors:
                if isinstance(f, Const):
                    k *= float(f.value)
                else:
                    rest = f
            return k if rest is None else self._collect(rest, k, coeffs)
        raise ValueError("nonlinear term inside a linear form")

    def matrix(self, n: int):
        data, ri, ci = [], [], []
        for r, row in enumerate(self.rows):
            for c, v in row.items():
                ri.append(r)
                ci.append(c)
                data.append(v)
        return sparse.csr_matrix((data, (ri, ci)), shape=(len(self.rows), n)), np.array(self.consts)


class _Problem:
    def __init__(self, names: list[str], cons: list[Constraint]):
        self.names = names
        idx = {n: i for i, n in enumerate(names)}
        lin = _Linear(idx)
        # residual_i = sum of product terms + sum of xlogx terms
        prods: dict[int, list] = {}
        logs = []
        self.kind = []
        for ci, c in enumerate(cons):
            self.kind.append(c.kind)
            for sign, side in ((1.0, c.lhs), (-1.0, c.rhs)):
                for coef, factors, is_log in self._terms(side, sign):
                    if is_log:
                        logs.append((ci, coef, lin.add(factors[0])))
                    else:
                        ids = tuple(lin.add(f) for f in factors)
                        prods.setdefault(len(ids), []).append((ci, coef, ids))
        self.M, self.m0 = lin.matrix(len(names))
        self.ncons = len(cons)
        self.prods = {d: (np.array([p[0] for p in ps], dtype=int), np.array([p[1] for p in ps]),
                          np.array([p[2] for p in ps], dtype=int).reshape(len(ps), d))
                      for d, ps in prods.items()}
        self.logs = (np.array([l[0] for l in logs], dtype=int), np.array([l[1] for l in logs]),
                     np.array([l[2] for l in logs], dtype=int))
        kinds = np.array(self.kind)
        self.eq, self.le, self.ne = kinds == "eq", kinds == "le", kinds == "ne"
        self.lower = np.full(len(names), -np.inf)
        for c in cons:
            if (c.kind == "le" and isinstance(c.lhs, Const) and c.lhs.value == 0 and isinstance(c.rhs, Var)):
                self.lower[idx[c.rhs.name]] = 0.0

    @staticmethod
    def _terms(t, sign):
        """Split t into (coef, linear factors, is_log) terms."""
        if isinstance(t, Add):
            out = []
            for x in t.terms:
                out += _Problem._terms(x, sign)
            return out
        if isinstance(t, XLogX):
            return [(sign, (t.arg,), True)]
        if isinstance(t, Mul):
            coef, fs = sign, []
            for f in t.factors:
                if isinstance(f, Const):
                    coef *= float(f.value)
                else:
                    fs.append(f)
            return [(coef, tuple(fs), False)]
        if isinstance(t, Const):
            return [(sign * float(t.value), (), False)]
        return [(sign, (t,), False)]

    def residuals(self, x):
        L = self.M @ x + self.m0
        r = np.zeros(self.ncons)
        for d, (ci, coef, ids) in self.prods.items():
            vals = coef * np.prod(L[ids], axis=1) if d else coef
            np.add.at(r, ci, vals)
        ci, coef, ids = self.logs
        if len(ci):
            a = np.maximum(L[ids], 1e-300)
            np.add.at(r, ci, np.where(L[ids] > 0, coef * a * np.log2(a), 0.0))
        return L, r

    def fun(self, x):
        L, r = self.residuals(x)
        g_r = np.zeros(self.ncons)
        pen = 0.0
        e = r[self.eq]
        pen += float(e @ e)
        g_r[self.eq] = 2 * e
        le = np.maximum(r[self.le], 0.0)
        pen += float(le @ le)
        g_r[self.le] = 2 * le
        ne = r[self.ne]
        gap = np.maximum(1.0 - np.abs(ne), 0.0)
        pen += float(gap @ gap)
        g_r[self.ne] = -2 * gap * np.sign(ne)
        g_L = np.zeros(len(L))
        for d, (ci, coef, ids) in self.prods.items():
            if not d:
                continue
            vals = L[ids]
            w = coef * g_r[ci]
            for j in range(d):
                others = np.prod(np.delete(vals, j, axis=1), axis=1) if d > 1 else 1.0
                np.add.at(g_L, ids[:, j], w * others)
        ci, coef, ids = self.logs
        if len(ci):
            a = np.maximum(L[ids], 1e-12)
            np.add.at(g_L, ids, coef * g_r[ci] * (np.log2(a) + 1 / math.log(2)))
        return pen, self.M.T @ g_L


_CAPS = (1, 6, 12, 60, 840, 10**4, 10**5, 10**6)


def _rationalize(x: np.ndarray, cap: int) -> list[Fraction]:
    out = []
    for v in x:
        if abs(v) < 1e-9:
            out.append(Fraction(0))
        else:
            out.append(Fraction(float(v)).limit_denominator(cap))
    return out


def solve(sys: RealSystem, seed: int = 0, tol: float = DEFAULT_TOL, restarts: int = DEFAULT_RESTARTS,
          max_den: int = DEFAULT_MAX_DEN, time_limit: float | None = None) -> SolveResult:
    start = time.monotonic()
    names, cons = flatten(sys)
    if not names:
        v = verify(sys, {}, tol)
        return SolveResult(Status.SAT if v.ok else Status.UNKNOWN, {} if v.ok else None,
                           v, 0, 0, seed, time.monotonic() - start)
    prob = _Problem(names, cons)
    rng = np.random.default_rng(seed)
    bounds = [(0.0 if lo == 0 else None, None) for lo in prob.lower]
    caps = [c for c in _CAPS if c < max_den] + [max_den]
    iters = k = 0
    for k in range(restarts):
        if time_limit is not None and time.monotonic() - start > time_limit:
            break
        x0 = rng.random(len(names))
        res = minimize(prob.fun, x0, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 2000, "ftol": 1e-30, "gtol": 1e-14})
        x = res.x
        iters += int(res.nit)
        if res.fun > tol * tol:
            continue
        for cap in caps:
            w = dict(zip(names, _rationalize(x, cap)))
            v = verify(sys, w, tol)
            if v.ok:
                return SolveResult(Status.SAT, w, v, k + 1, iters, seed, time.monotonic() - start)
    return SolveResult(Status.UNKNOWN, None, None, k + 1 if restarts else 0, iters, seed,
                       time.monotonic() - start)
