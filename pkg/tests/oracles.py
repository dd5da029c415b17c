"""Brute-force reference implementations used to cross-check the library.

These deliberately avoid the library's own evaluation code: every quantity is
recomputed by enumerating all value tuples over the domain.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

from ptl.syntax import And, Eq, Exists, Forall, Neg, Rel, SplitOr


def _val(A, s, term):
    if term.startswith("@"):
        return A.constants[term[1:]]
    return s[term]


def tarski(A, s, phi) -> bool:
    if isinstance(phi, Rel):
        args = tuple(_val(A, s, a) for a in phi.args)
        return (args in A.relations[phi.name][1]) != phi.negated
    if isinstance(phi, Eq):
        return (_val(A, s, phi.left) == _val(A, s, phi.right)) != phi.negated
    if isinstance(phi, Neg):
        return not tarski(A, s, phi.body)
    if isinstance(phi, And):
        return tarski(A, s, phi.left) and tarski(A, s, phi.right)
    if isinstance(phi, SplitOr):
        return tarski(A, s, phi.left) or tarski(A, s, phi.right)
    if isinstance(phi, Exists):
        return any(tarski(A, {**s, phi.var: a}, phi.body) for a in A.domain)
    if isinstance(phi, Forall):
        return all(tarski(A, {**s, phi.var: a}, phi.body) for a in A.domain)
    raise TypeError(type(phi).__name__)


def mass(X, fixed: dict) -> Fraction:
    """Total weight of rows agreeing with ``fixed`` (variable -> value)."""
    tot = Fraction(0)
    for t, w in X.rows:
        row = dict(zip(X.vars, t))
        if all(row[v] == a for v, a in fixed.items()):
            tot += w
    return tot


def indep(A, X, cond, left, right) -> bool:
    """Product identity checked on every assignment of the atom's variables."""
    vs = sorted(set(cond) | set(left) | set(right))
    for vals in itertools.product(A.domain, repeat=len(vs)):
        s = dict(zip(vs, vals))

        def m(group):
            return mass(X, {v: s[v] for v in group})

        if m(cond + left) * m(cond + right) != m(cond + left + right) * m(cond):
            return False
    return True


def dep(X, lhs, rhs) -> bool:
    sup = [dict(zip(X.vars, t)) for t, w in X.rows if w]
    for s, r in itertools.product(sup, repeat=2):
        if all(s[v] == r[v] for v in lhs) and any(s[v] != r[v] for v in rhs):
            return False
    return True


def marg(A, X, lhs, rhs) -> bool:
    for vals in itertools.product(A.domain, repeat=len(lhs)):
        def m(vs):
            tot = Fraction(0)
            for t, w in X.rows:
                row = dict(zip(X.vars, t))
                if all(row[v] == a for v, a in zip(vs, vals)):
                    tot += w
            return tot
        if m(lhs) != m(rhs):
            return False
    return True


def entropy_of(probs) -> float:
    return -sum(p * math.log2(p) for p in probs if p > 0)


def marginal_entropy(X, vs) -> float:
    tot = sum(w for _, w in X.rows)
    acc: dict = {}
    for t, w in X.rows:
        row = dict(zip(X.vars, t))
        k = tuple(row[v] for v in vs)
        acc[k] = acc.get(k, 0) + w
    return entropy_of([float(w / tot) for w in acc.values()])
