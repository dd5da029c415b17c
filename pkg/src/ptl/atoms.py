"""Exact evaluation of team atoms, the entropy kernel, and rewrites between atoms."""
from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction
from typing import Iterable

from .core import Structure, TeamError, UnboundVariable, WeightedTeam, holds
from .syntax import (And, Dep, EntropyEq, Eq, Exists, Forall, Formula, Indep, LITERALS,
                     Marg, SplitOr, all_vars, atom_vars, fresh_names, is_const, transform)

ENTROPY_EPS = 1e-9


class ConditionNotEmpty(ValueError):
    pass


# ---------------------------------------------------------------- marginals


def _ordered(vs: Iterable[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(vs))


def marginal(X: WeightedTeam, vs: Iterable[str]) -> dict[tuple, Fraction]:
    """Weights of the value tuples of ``vs`` (positional; repeated variables allowed)."""
    vs = tuple(vs)
    for v in vs:
        if is_const(v):
            raise TeamError(f"constant {v} inside a team atom")
    cols = [X.col(v) for v in vs]
    acc: dict[tuple, Fraction] = defaultdict(Fraction)
    for t, w in X.rows:
        if w:
            acc[tuple(t[i] for i in cols)] += w
    return dict(acc)


def _check_vars(X: WeightedTeam, atom: Formula) -> None:
    missing = set(atom_vars(atom)) - set(X.vars)
    if missing:
        raise UnboundVariable(f"atom {atom} mentions variables outside the team: {sorted(missing)}")


# ---------------------------------------------------------------- atom semantics


def indep_holds(X: WeightedTeam, cond, left, right) -> bool:
    """Product identity m(xy)·m(xz) = m(xyz)·m(x) for every assignment of Var(xyz).

    Assignments where both sides vanish need no check, so only compatible pairs of
    support projections onto Var(xy) and Var(xz) are visited.
    """
    vx = _ordered(cond)
    vxy = _ordered(cond + left)
    vxz = _ordered(cond + right)
    vxyz = _ordered(cond + left + right)
    m_x, m_xy, m_xz, m_xyz = (marginal(X, vs) for vs in (vx, vxy, vxz, vxyz))
    for p, wp in m_xy.items():
        s = dict(zip(vxy, p))
        for q, wq in m_xz.items():
            if any(s.get(v, a) != a for v, a in zip(vxz, q)):
                continue
            full = {**s, **dict(zip(vxz, q))}
            rhs = m_xyz.get(tuple(full[v] for v in vxyz), 0) * m_x.get(tuple(full[v] for v in vx), 0)
            if wp * wq != rhs:
                return False
    return True


def dep_holds(X: WeightedTeam, lhs, rhs) -> bool:
    seen: dict[tuple, tuple] = {}
    cl = [X.col(v) for v in lhs]
    cr = [X.col(v) for v in rhs]
    for t, w in X.rows:
        if not w:
            continue
        k, val = tuple(t[i] for i in cl), tuple(t[i] for i in cr)
        if seen.setdefault(k, val) != val:
            return False
    return True


def marg_holds(X: WeightedTeam, lhs, rhs) -> bool:
    return marginal(X, lhs) == marginal(X, rhs)


def entropy(X: WeightedTeam, xs: Iterable[str]) -> float:
    """Shannon entropy in bits of the normalized marginal of ``xs``."""
    tot = X.total
    if tot == 0:
        raise TeamError("entropy of a team with total weight 0")
    h = 0.0
    for w in marginal(X, tuple(xs)).values():
        p = float(w / tot)
        if p > 0:
            h -= p * math.log2(p)
    return max(h, 0.0)


def entropy_eq_holds(X: WeightedTeam, lhs, rhs, eps: float = ENTROPY_EPS) -> bool:
    return abs(entropy(X, lhs) - entropy(X, rhs)) <= eps


def literal_holds(A: Structure | None, X: WeightedTeam, lit: Formula) -> bool:
    return all(holds(A, s, lit) for s, w in X.assignments() if w)


def eval_atom(A: Structure | None, X: WeightedTeam, atom: Formula, eps: float = ENTROPY_EPS) -> bool:
    _check_vars(X, atom)
    if isinstance(atom, LITERALS):
        return literal_holds(A, X, atom)
    if isinstance(atom, Indep):
        return indep_holds(X, atom.cond, atom.left, atom.right)
    if isinstance(atom, Dep):
        return dep_holds(X, atom.lhs, atom.rhs)
    if isinstance(atom, Marg):
        return marg_holds(X, atom.lhs, atom.rhs)
    if isinstance(atom, EntropyEq):
        return entropy_eq_holds(X, atom.lhs, atom.rhs, eps)
    raise TypeError(f"not an atom: {type(atom).__name__}")


# ---------------------------------------------------------------- rewrites


def rewrite_dep_to_indep(phi: Formula) -> Formula:
    def f(n):
        return Indep(n.lhs, n.rhs, n.rhs) if isinstance(n, Dep) else n
    return transform(phi, f)


def rewrite_dep_to_entropy(phi: Formula) -> Formula:
    def f(n):
        return EntropyEq(n.lhs, n.lhs + n.rhs) if isinstance(n, Dep) else n
    return transform(phi, f)


def _implies(guard: Formula, guard_dual: Formula, body: Formula) -> Formula:
    # guard -> body, read as (dual of guard) split-or (guard and body)
    return SplitOr(guard_dual, And(guard, body))


def _conj(parts: list[Formula]) -> Formula:
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def indep_template(xs: tuple[str, ...], ys: tuple[str, ...], avoid: Iterable[str] = ()) -> Formula:
    """Entropy/dependence formula equivalent to marginal independence of xs and ys.

    Structure constants ``zero`` and ``one`` label two slices: on the first, u
    copies xs and v copies xs ys; on the second, u copies ys and v is constant.
    Independence then amounts to equal entropy of (u, z) and (v, z).
    """
    names = fresh_names(set(avoid) | set(xs) | set(ys), "z")
    z = next(names)
    us = tuple(next(fresh_names(set(avoid) | set(xs) | set(ys) | {z}, f"u{i}")) for i in range(max(len(xs), len(ys))))
    taken = set(avoid) | set(xs) | set(ys) | {z} | set(us)
    vs = tuple(next(fresh_names(taken, f"v{i}")) for i in range(len(xs) + len(ys)))
    xy = xs + ys
    z0, z1 = Eq(z, "@zero"), Eq(z, "@one")
    nz0, nz1 = Eq(z, "@zero", True), Eq(z, "@one", True)
    first = _conj([Dep(us, xs), Dep(xs, us), Dep(vs, xy), Dep(xy, vs)])
    second = _conj([Dep(us, ys), Dep(ys, us)] + [Eq(v, "@zero") for v in vs])
    body = _conj([
        _implies(z0, nz0, first),
        _implies(z1, nz1, second),
        _implies(SplitOr(z0, z1), And(nz0, nz1), EntropyEq(us + (z,), vs + (z,))),
    ])
    for v in reversed(vs):
        body = Exists(v, body)
    for u in reversed(us):
        body = Exists(u, body)
    return Forall(z, body)


def rewrite_indep_to_entropy(phi: Formula) -> Formula:
    avoid = set(all_vars(phi))

    def f(n):
        if not isinstance(n, Indep):
            return n
        if n.cond:
            raise ConditionNotEmpty(f"only marginal independence can be rewritten: {n}")
        t = indep_template(n.left, n.right, avoid)
        avoid.update(all_vars(t))
        return t

    return rewrite_dep_to_entropy(transform(phi, f))
