"""Exact evaluator for the probabilistic comparison logic over weighted teams."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .core import Structure, UnboundVariable, WeightedTeam, duplicate, holds, unit_team, weight
from .syntax import (LITERALS, And, Cmp, DialectError, DotNeg, Exists, Exists1, Forall, Forall1,
                     Formula, GlobalOr, Neg, SplitOr, free_vars, is_condition, is_fo, is_fopt, star_translate, to_text)


@dataclass(frozen=True)
class Trace:
    node: str
    value: bool
    weights: tuple[Fraction, ...] = ()
    children: tuple["Trace", ...] = ()

    def to_json(self) -> dict:
        out = {"node": self.node, "value": self.value}
        if self.weights:
            out["weights"] = [str(w) for w in self.weights]
        if self.children:
            out["children"] = [c.to_json() for c in self.children]
        return out


@dataclass(frozen=True)
class FoptVerdict:
    value: bool
    trace: Trace | None = field(default=None, compare=False)

    def __bool__(self):
        return self.value


def cmp_weights(A: Structure | None, X: WeightedTeam, c: Cmp) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Return the four weights |X_{d0&d1}|, |X_{d3}|, |X_{d2&d3}|, |X_{d1}|."""
    return (weight(X, And(c.d0, c.d1), A), weight(X, c.d3, A),
            weight(X, And(c.d2, c.d3), A), weight(X, c.d1, A))


def _eval(A: Structure, X: WeightedTeam, phi: Formula, depth: int, cap: int) -> tuple[bool, Trace | None]:
    keep = depth < cap
    if isinstance(phi, Cmp):
        w = cmp_weights(A, X, phi)
        v = w[0] * w[1] <= w[2] * w[3]
        return v, Trace("cmp", v, w) if keep else None
    if is_condition(phi):
        # flat: every support row satisfies it
        v = all(holds(A, s, phi) for s, w in X.assignments() if w)
        return v, Trace("condition", v) if keep else None
    if isinstance(phi, DotNeg):
        if X.is_empty:
            return True, Trace("not", True) if keep else None
        b, t = _eval(A, X, phi.body, depth + 1, cap)
        return not b, Trace("not", not b, (), (t,) if t else ()) if keep else None
    if isinstance(phi, (And, GlobalOr)):
        l, tl = _eval(A, X, phi.left, depth + 1, cap)
        want = isinstance(phi, GlobalOr)
        if l == want:
            v, kids = l, (tl,)
        else:
            v, tr = _eval(A, X, phi.right, depth + 1, cap)
            kids = (tl, tr)
        name = "or" if want else "and"
        return v, Trace(name, v, (), tuple(k for k in kids if k)) if keep else None
    if isinstance(phi, (Exists1, Forall1)):
        want = isinstance(phi, Exists1)
        kids = []
        v = not want
        for a in A.domain:
            b, t = _eval(A, duplicate(X, phi.var, (a,)), phi.body, depth + 1, cap)
            if t:
                kids.append(Trace(f"{phi.var}={a}", b, (), (t,)))
            if b == want:
                v = want
                break
        name = "E1" if want else "A1"
        return v, Trace(f"{name} {phi.var}", v, (), tuple(kids)) if keep else None
    raise DialectError(f"not an FOPT formula: {type(phi).__name__}")


def eval_fopt(A: Structure, X: WeightedTeam, phi: Formula, trace_depth: int = 0) -> FoptVerdict:
    """Decide phi on X exactly; weights are never normalized."""
    if not (is_fopt(phi) or is_condition(phi)):
        raise DialectError(f"not an FOPT formula: {to_text(phi)}")
    missing = free_vars(phi) - set(X.vars)
    if missing:
        raise UnboundVariable(f"free variables outside the team: {sorted(missing)}")
    v, t = _eval(A, X, phi, 0, trace_depth)
    return FoptVerdict(v, t)


def eval_fo(A: Structure, s: Mapping[str, str], psi: Formula) -> bool:
    if not is_fo(psi):
        raise DialectError(f"not a first-order formula: {to_text(psi)}")
    missing = free_vars(psi) - set(s)
    if missing:
        raise UnboundVariable(f"unbound variables {sorted(missing)}")
    return holds(A, s, psi)


def check_sentence_fopt(A: Structure, phi: Formula) -> bool:
    if free_vars(phi):
        raise UnboundVariable(f"not a sentence; free variables {sorted(free_vars(phi))}")
    return eval_fo(A, {}, star_translate(phi))


def fo_as_fopt(psi: Formula) -> Formula:
    """Classical FO formula re-expressed with the one-point connectives.

    On teams with singleton support the two readings coincide.
    """
    if isinstance(psi, LITERALS):
        return psi
    if isinstance(psi, Neg):
        return DotNeg(fo_as_fopt(psi.body))
    if isinstance(psi, And):
        return And(fo_as_fopt(psi.left), fo_as_fopt(psi.right))
    if isinstance(psi, SplitOr):
        return GlobalOr(fo_as_fopt(psi.left), fo_as_fopt(psi.right))
    if isinstance(psi, Exists):
        return Exists1(psi.var, fo_as_fopt(psi.body))
    if isinstance(psi, Forall):
        return Forall1(psi.var, fo_as_fopt(psi.body))
    raise DialectError(f"not a first-order formula: {to_text(psi)}")


def eval_fopt_unit(A: Structure, phi: Formula) -> bool:
    return eval_fopt(A, unit_team(A.domain), phi).value
