"""Seeded random structures, teams and formulas within small size bounds."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Sequence

from .core import Structure, WeightedTeam
from .syntax import (And, BoolNeg, Cmp, Dep, DotNeg, EntropyEq, Eq, Exists, Exists1, Forall,
                     Forall1, Formula, GlobalOr, Indep, Marg, Neg, Rel, SplitOr)

ELEMENTS = ("a", "b", "c", "d")
VARS = ("x", "y", "z", "w", "u", "v")
RELATIONS = (("P", 1), ("Q", 1), ("R", 2))


def random_structure(rng: random.Random, size: int | None = None, max_size: int = 4) -> Structure:
    n = size if size is not None else rng.randint(1, max_size)
    dom = ELEMENTS[:n]
    rels = {}
    for name, ar in RELATIONS:
        tuples = [t for t in itertools.product(dom, repeat=ar) if rng.random() < 0.5]
        rels[name] = (ar, tuple(tuples))
    return Structure(dom, rels, {})


def random_weight(rng: random.Random, max_den: int = 12) -> Fraction:
    return Fraction(rng.randint(1, max_den), rng.randint(1, max_den))


def random_team(rng: random.Random, A: Structure, vars: Sequence[str], max_rows: int = 30,
                max_den: int = 12, normalize: bool = False) -> WeightedTeam:
    """Nonempty team with positive weights of denominator at most ``max_den``."""
    vars = tuple(vars)
    space = list(itertools.product(A.domain, repeat=len(vars)))
    k = rng.randint(1, min(max_rows, len(space)))
    rows = [(t, random_weight(rng, max_den)) for t in rng.sample(space, k)]
    X = WeightedTeam(vars, rows, A.domain)
    return X.normalize() if normalize else X


def product_team(rng: random.Random, A: Structure, left: Sequence[str], right: Sequence[str],
                 max_den: int = 6) -> WeightedTeam:
    """Team whose marginals on ``left`` and ``right`` are independent."""
    def side(vs):
        space = list(itertools.product(A.domain, repeat=len(vs)))
        return {t: random_weight(rng, max_den) for t in rng.sample(space, rng.randint(1, len(space)))}
    p, q = side(left), side(right)
    rows = [(a + b, wa * wb) for a, wa in p.items() for b, wb in q.items()]
    return WeightedTeam(tuple(left) + tuple(right), rows, A.domain)


def _args(rng, pool, n):
    return tuple(rng.choice(pool) for _ in range(n))


def random_literal(rng: random.Random, pool: Sequence[str]) -> Formula:
    if rng.random() < 0.3:
        return Eq(rng.choice(pool), rng.choice(pool), rng.random() < 0.5)
    name, ar = rng.choice(RELATIONS)
    return Rel(name, _args(rng, pool, ar), rng.random() < 0.5)


def random_condition(rng: random.Random, pool: Sequence[str], depth: int = 2) -> Formula:
    """Quantifier- and disjunction-free first-order formula."""
    r = rng.random()
    if depth <= 0 or r < 0.5:
        return random_literal(rng, pool)
    if r < 0.7:
        return Neg(random_condition(rng, pool, depth - 1))
    return And(random_condition(rng, pool, depth - 1), random_condition(rng, pool, depth - 1))


def _fresh(pool: Sequence[str]) -> str:
    return next(v for v in VARS + tuple(f"v{i}" for i in range(50)) if v not in pool)


def random_fo(rng: random.Random, pool: Sequence[str], depth: int) -> Formula:
    """First-order formula over the variables in ``pool``."""
    if depth <= 0 or not pool and rng.random() < 0.3:
        if not pool:
            v = _fresh(pool)
            return Exists(v, random_literal(rng, (v,)))
        return random_literal(rng, pool)
    r = rng.random()
    if r < 0.25 and pool:
        return random_literal(rng, pool)
    if r < 0.45:
        return And(random_fo(rng, pool, depth - 1), random_fo(rng, pool, depth - 1))
    if r < 0.65:
        return SplitOr(random_fo(rng, pool, depth - 1), random_fo(rng, pool, depth - 1))
    if r < 0.75 and pool:
        return Neg(random_fo(rng, pool, depth - 1))
    v = _fresh(pool) if len(pool) < 3 or rng.random() < 0.5 else rng.choice(pool)
    q = Exists if rng.random() < 0.5 else Forall
    return q(v, random_fo(rng, tuple(dict.fromkeys(tuple(pool) + (v,))), depth - 1))


def random_fopt(rng: random.Random, pool: Sequence[str], depth: int) -> Formula:
    """Formula of the comparison logic (conditions, comparisons, negation, one-point quantifiers)."""
    r = rng.random()
    if depth <= 0 or r < 0.2:
        if not pool or rng.random() < 0.6:
            p = pool or ("x",)
            atom = Cmp(*(random_condition(rng, p, 1) for _ in range(4)))
            return atom if pool else Exists1("x", atom)
        return random_condition(rng, pool, 1)
    if r < 0.35:
        return DotNeg(random_fopt(rng, pool, depth - 1))
    if r < 0.5:
        return And(random_fopt(rng, pool, depth - 1), random_fopt(rng, pool, depth - 1))
    if r < 0.65:
        return GlobalOr(random_fopt(rng, pool, depth - 1), random_fopt(rng, pool, depth - 1))
    v = _fresh(pool) if len(pool) < 3 or rng.random() < 0.6 else rng.choice(pool)
    q = Exists1 if rng.random() < 0.5 else Forall1
    return q(v, random_fopt(rng, tuple(dict.fromkeys(tuple(pool) + (v,))), depth - 1))


def random_team_atom(rng: random.Random, pool: Sequence[str],
                     kinds: Sequence[str] = ("indep", "marg", "dep")) -> Formula:
    kind = rng.choice(tuple(kinds))

    def tup(lo=1, hi=2):
        return tuple(rng.sample(list(pool), min(len(pool), rng.randint(lo, hi))))

    if kind == "indep":
        return Indep(tup(0, 1), tup(), tup())
    if kind == "dep":
        return Dep(tup(), tup())
    if kind == "entropy":
        return EntropyEq(tup(), tup())
    n = rng.randint(1, 2)
    return Marg(_args(rng, pool, n), _args(rng, pool, n))


def random_team_formula(rng: random.Random, pool: Sequence[str], depth: int,
                        kinds: Sequence[str] = ("indep", "marg", "dep"), boolneg: bool = False,
                        quantifiers: bool = True) -> Formula:
    """Formula with team atoms, split disjunction and (optionally) Boolean negation."""
    r = rng.random()
    if depth <= 0 or r < 0.25 or not pool:
        if not pool:
            v = _fresh(pool)
            return Exists(v, random_team_atom(rng, (v,), kinds))
        return random_team_atom(rng, pool, kinds) if rng.random() < 0.6 else random_literal(rng, pool)
    if r < 0.45:
        return And(random_team_formula(rng, pool, depth - 1, kinds, boolneg, quantifiers),
                   random_team_formula(rng, pool, depth - 1, kinds, boolneg, quantifiers))
    if r < 0.65:
        return SplitOr(random_team_formula(rng, pool, depth - 1, kinds, boolneg, quantifiers),
                       random_team_formula(rng, pool, depth - 1, kinds, boolneg, quantifiers))
    if boolneg and r < 0.75:
        return BoolNeg(random_team_formula(rng, pool, depth - 1, kinds, boolneg, quantifiers))
    if not quantifiers:
        return random_team_atom(rng, pool, kinds)
    v = _fresh(pool)
    q = Exists if rng.random() < 0.6 else Forall
    return q(v, random_team_formula(rng, tuple(pool) + (v,), depth - 1, kinds, boolneg, quantifiers))
