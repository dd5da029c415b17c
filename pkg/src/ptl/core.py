"""Finite structures, weighted teams and the team algebra.

Weights are exact ``Fraction`` values throughout.  A team keeps only the rows it
was built with; absent rows weigh zero, and two teams compare equal when they
have the same variables and the same nonzero weights.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .syntax import (And, Eq, Exists, Forall, Formula, Neg, Rel, SplitOr,
                     const_name, free_vars, is_const)


class TeamError(ValueError):
    pass


class UnboundVariable(TeamError):
    pass


class InstanceError(ValueError):
    pass


_POS_CACHE: dict[tuple, dict] = {}


def _positions(domain: tuple) -> dict:
    pos = _POS_CACHE.get(domain)
    if pos is None:
        pos = _POS_CACHE[domain] = {a: i for i, a in enumerate(domain)}
    return pos


def as_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, float):
        raise TypeError("float weights are not accepted; use Fraction or a 'p/q' string")
    return Fraction(w)


# ---------------------------------------------------------------- structures


@dataclass(frozen=True)
class Structure:
    domain: tuple[str, ...]
    relations: Mapping[str, tuple[int, frozenset]] = field(default_factory=dict)
    constants: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.domain:
            raise InstanceError("domain must be nonempty")
        if len(set(self.domain)) != len(self.domain):
            raise InstanceError("duplicate domain elements")
        elems = set(self.domain)
        rels = {}
        for name, (arity, tuples) in self.relations.items():
            ts = frozenset(tuple(t) for t in tuples)
            for t in ts:
                if len(t) != arity:
                    raise InstanceError(f"relation {name}: tuple {t} does not have arity {arity}")
                if not set(t) <= elems:
                    raise InstanceError(f"relation {name}: tuple {t} leaves the domain")
            rels[name] = (arity, ts)
        object.__setattr__(self, "relations", rels)
        for c, a in self.constants.items():
            if a not in elems:
                raise InstanceError(f"constant {c} is mapped outside the domain")
        object.__setattr__(self, "constants", dict(self.constants))
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.domain)})

    @property
    def size(self) -> int:
        return len(self.domain)

    def index(self, a: str) -> int:
        return self._index[a]

    def resolve(self, term: str, s: Mapping[str, str]) -> str:
        if is_const(term):
            try:
                return self.constants[const_name(term)]
            except KeyError:
                raise InstanceError(f"unknown constant {const_name(term)!r}") from None
        try:
            return s[term]
        except KeyError:
            raise UnboundVariable(f"unbound variable {term!r}") from None

    def holds_rel(self, name: str, args: tuple[str, ...]) -> bool:
        try:
            arity, tuples = self.relations[name]
        except KeyError:
            raise InstanceError(f"unknown relation symbol {name!r}") from None
        if arity != len(args):
            raise InstanceError(f"relation {name} has arity {arity}, used with {len(args)}")
        return args in tuples


def holds(A: Structure | None, s: Mapping[str, str], phi: Formula) -> bool:
    """Tarski satisfaction of a classical first-order formula."""
    if isinstance(phi, Rel):
        if A is None:
            raise InstanceError("relation atoms need a structure")
        r = A.holds_rel(phi.name, tuple(A.resolve(t, s) for t in phi.args))
        return r != phi.negated
    if isinstance(phi, Eq):
        if A is None:
            if is_const(phi.left) or is_const(phi.right):
                raise InstanceError("constants need a structure")
            try:
                r = s[phi.left] == s[phi.right]
            except KeyError as e:
                raise UnboundVariable(f"unbound variable {e.args[0]!r}") from None
        else:
            r = A.resolve(phi.left, s) == A.resolve(phi.right, s)
        return r != phi.negated
    if isinstance(phi, Neg):
        return not holds(A, s, phi.body)
    if isinstance(phi, And):
        return holds(A, s, phi.left) and holds(A, s, phi.right)
    if isinstance(phi, SplitOr):
        return holds(A, s, phi.left) or holds(A, s, phi.right)
    if isinstance(phi, (Exists, Forall)):
        if A is None:
            raise InstanceError("quantifiers need a structure")
        test = any if isinstance(phi, Exists) else all
        return test(holds(A, {**s, phi.var: a}, phi.body) for a in A.domain)
    raise TypeError(f"not a first-order formula: {type(phi).__name__}")


# ---------------------------------------------------------------- teams


class WeightedTeam:
    """Finite map from value tuples over ``vars`` to nonnegative rationals."""

    __slots__ = ("vars", "rows", "domain", "_map", "_hash")

    def __init__(self, vars: Iterable[str], rows: Iterable[tuple[Iterable[str], object]] = (),
                 domain: Iterable[str] | None = None):
        self.vars = tuple(vars)
        if len(set(self.vars)) != len(self.vars):
            raise TeamError(f"duplicate variables in {self.vars}")
        self.domain = tuple(domain) if domain is not None else None
        m: dict[tuple, Fraction] = {}
        for t, w in rows:
            t = tuple(t)
            w = as_fraction(w)
            if len(t) != len(self.vars):
                raise TeamError(f"row {t} does not match variables {self.vars}")
            if w < 0:
                raise TeamError(f"negative weight {w} for row {t}")
            if t in m:
                raise TeamError(f"duplicate row {t}")
            m[t] = w
        self._finish(m)

    def _finish(self, m: dict) -> None:
        self._map = m
        if self.domain is not None:
            pos = _positions(self.domain)
            n = len(pos)
            key = lambda r: (tuple(pos.get(a, n) for a in r[0]), r[0])  # noqa: E731
        else:
            key = lambda r: r[0]  # noqa: E731
        self.rows = tuple(sorted(m.items(), key=key))
        self._hash = None

    @classmethod
    def _from_map(cls, vars, m: dict, domain) -> "WeightedTeam":
        """Build from an already validated row map (no copying or checks)."""
        team = cls.__new__(cls)
        team.vars = tuple(vars)
        team.domain = tuple(domain) if domain is not None else None
        team._finish(m)
        return team

    # -- views

    @property
    def total(self) -> Fraction:
        return sum((w for _, w in self.rows), Fraction(0))

    @property
    def normalized(self) -> bool:
        return self.total == 1

    @property
    def is_empty(self) -> bool:
        return all(w == 0 for _, w in self.rows)

    def support(self) -> list[tuple]:
        return [t for t, w in self.rows if w != 0]

    def support_rows(self) -> list[tuple[tuple, Fraction]]:
        return [(t, w) for t, w in self.rows if w != 0]

    def weight_of(self, t: Iterable[str]) -> Fraction:
        return self._map.get(tuple(t), Fraction(0))

    def assignments(self):
        """Yield (assignment dict, weight) for every stored row."""
        for t, w in self.rows:
            yield dict(zip(self.vars, t)), w

    def as_dict(self) -> dict[tuple, Fraction]:
        return {t: w for t, w in self.rows if w != 0}

    def col(self, var: str) -> int:
        try:
            return self.vars.index(var)
        except ValueError:
            raise UnboundVariable(f"variable {var!r} not in team {self.vars}") from None

    def project(self, t: tuple, vs: Iterable[str]) -> tuple:
        return tuple(t[self.col(v)] for v in vs)

    def with_domain(self, domain) -> "WeightedTeam":
        return WeightedTeam(self.vars, self.rows, domain)

    def normalize(self) -> "WeightedTeam":
        tot = self.total
        if tot == 0:
            raise TeamError("cannot normalize a team of total weight 0")
        return scale(self, 1 / tot)

    # -- identity

    def __eq__(self, other):
        if not isinstance(other, WeightedTeam):
            return NotImplemented
        return self.vars == other.vars and self.as_dict() == other.as_dict()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.as_dict().items())))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{t}: {w}" for t, w in self.rows)
        return f"WeightedTeam({self.vars}, {{{body}}})"

    def to_json(self) -> dict:
        return {"vars": list(self.vars),
                "rows": [{"t": list(t), "w": str(w)} for t, w in self.rows]}


def unit_team(domain=None) -> WeightedTeam:
    """The distribution putting weight 1 on the empty assignment."""
    return WeightedTeam((), [((), 1)], domain)


def uniform_team(vars, tuples, domain=None) -> WeightedTeam:
    tuples = list(tuples)
    return WeightedTeam(vars, [(t, Fraction(1, len(tuples))) for t in tuples], domain)


def scale(team: WeightedTeam, c) -> WeightedTeam:
    c = as_fraction(c)
    if c < 0:
        raise TeamError("scale factor must be nonnegative")
    return WeightedTeam(team.vars, [(t, w * c) for t, w in team.rows], team.domain)


# ---------------------------------------------------------------- team algebra


def restrict(team: WeightedTeam, V: Iterable[str]) -> WeightedTeam:
    V = set(V)
    unknown = V - set(team.vars)
    if unknown:
        raise UnboundVariable(f"cannot restrict to unknown variables {sorted(unknown)}")
    keep = [i for i, v in enumerate(team.vars) if v in V]
    acc: dict[tuple, Fraction] = defaultdict(Fraction)
    for t, w in team.rows:
        acc[tuple(t[i] for i in keep)] += w
    return WeightedTeam._from_map(tuple(team.vars[i] for i in keep), acc, team.domain)


def weight(team: WeightedTeam, cond: Formula | None = None, A: Structure | None = None) -> Fraction:
    """Total weight of the rows satisfying ``cond`` (all rows when ``cond`` is None)."""
    if cond is None:
        return team.total
    missing = free_vars(cond) - set(team.vars)
    if missing:
        raise UnboundVariable(f"condition mentions variables outside the team: {sorted(missing)}")
    return sum((w for s, w in team.assignments() if w and holds(A, s, cond)), Fraction(0))


def _set_column(team: WeightedTeam, x: str):
    """Output variables and a function replacing/appending column ``x``."""
    if x in team.vars:
        i = team.vars.index(x)
        return team.vars, lambda t, a: t[:i] + (a,) + t[i + 1:]
    return team.vars + (x,), lambda t, a: t + (a,)


def duplicate(team: WeightedTeam, x: str, B: Iterable[str]) -> WeightedTeam:
    B = tuple(dict.fromkeys(B))
    if not B:
        raise TeamError("duplicate needs a nonempty value set")
    out_vars, put = _set_column(team, x)
    share = Fraction(1, len(B))
    acc: dict[tuple, Fraction] = defaultdict(Fraction)
    for t, w in team.rows:
        for a in B:
            acc[put(t, a)] += w * share
    return WeightedTeam._from_map(out_vars, acc, team.domain)


def extend(team: WeightedTeam, x: str, F: Mapping[tuple, Mapping[str, object]]) -> WeightedTeam:
    """Extend a distribution by ``x`` drawn from ``F(row)`` for each support row."""
    if not team.normalized:
        raise TeamError("extend requires a normalized team")
    return extend_weighted(team, x, F)


def extend_weighted(team: WeightedTeam, x: str, F: Mapping[tuple, Mapping[str, object]]) -> WeightedTeam:
    """``extend`` without the normalization precondition (scale-equivariant)."""
    out_vars, put = _set_column(team, x)
    acc: dict[tuple, Fraction] = defaultdict(Fraction)
    for t, w in team.rows:
        if w == 0 and tuple(t) not in F:
            continue
        try:
            dist = F[tuple(t)]
        except KeyError:
            raise TeamError(f"no distribution given for row {t}") from None
        check_distribution(dist, t)
        for a, p in dist.items():
            acc[put(t, a)] += w * as_fraction(p)
    return WeightedTeam._from_map(out_vars, acc, team.domain)


def check_distribution(dist: Mapping[str, object], where=None) -> None:
    ps = [as_fraction(p) for p in dist.values()]
    if any(p < 0 for p in ps) or sum(ps, Fraction(0)) != 1:
        raise TeamError(f"not a distribution{' for row ' + str(where) if where is not None else ''}: "
                        f"{ {a: str(p) for a, p in dist.items()} }")


def scaled_union(X: WeightedTeam, Y: WeightedTeam, k) -> WeightedTeam:
    k = as_fraction(k)
    if not 0 <= k <= 1:
        raise TeamError("k must lie in [0, 1]")
    if X.vars != Y.vars:
        raise TeamError(f"scaled union of teams over different variables {X.vars} / {Y.vars}")
    acc: dict[tuple, Fraction] = defaultdict(Fraction)
    for t, w in X.rows:
        acc[t] += k * w
    for t, w in Y.rows:
        acc[t] += (1 - k) * w
    return WeightedTeam._from_map(X.vars, acc, X.domain or Y.domain)


# ---------------------------------------------------------------- instance files


def parse_weight(w) -> Fraction:
    if isinstance(w, bool) or not isinstance(w, (str, int)):
        raise InstanceError(f"weight must be a decimal or 'p/q' string, got {w!r}")
    try:
        f = Fraction(str(w).strip())
    except (ValueError, ZeroDivisionError):
        raise InstanceError(f"bad weight {w!r}") from None
    if f < 0:
        raise InstanceError(f"negative weight {w!r}")
    return f


def structure_from_json(data: Mapping) -> Structure:
    try:
        rels = {name: (int(r["arity"]), [tuple(t) for t in r.get("tuples", [])])
                for name, r in data.get("relations", {}).items()}
        return Structure(tuple(data["domain"]), rels, dict(data.get("constants", {})))
    except (KeyError, TypeError) as e:
        raise InstanceError(f"malformed structure: {e}") from None


def team_from_json(data: Mapping, A: Structure | None = None) -> WeightedTeam:
    try:
        rows = [(tuple(r["t"]), parse_weight(r["w"])) for r in data.get("rows", [])]
        team = WeightedTeam(data["vars"], rows, A.domain if A else None)
    except (KeyError, TypeError) as e:
        raise InstanceError(f"malformed team: {e}") from None
    except TeamError as e:
        raise InstanceError(str(e)) from None
    if A is not None:
        for t, _ in team.rows:
            if not set(t) <= set(A.domain):
                raise InstanceError(f"team row {t} leaves the domain")
    return team


def load_instance(src) -> tuple[Structure, WeightedTeam | None]:
    """Read an instance (path or already-decoded JSON object)."""
    if isinstance(src, Mapping):
        data = src
    else:
        with open(src, encoding="utf-8") as fh:
            data = json.load(fh)
    A = structure_from_json(data)
    team = team_from_json(data["team"], A) if data.get("team") is not None else None
    return A, team


def instance_to_json(A: Structure, team: WeightedTeam | None = None) -> dict:
    out = {"domain": list(A.domain),
           "relations": {n: {"arity": ar, "tuples": sorted(([list(t) for t in ts]),
                                                           key=lambda t: [A.index(a) for a in t])}
                         for n, (ar, ts) in sorted(A.relations.items())},
           "constants": dict(sorted(A.constants.items()))}
    if team is not None:
        out["team"] = team.to_json()
    return out
