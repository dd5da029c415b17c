"""Team semantics for independence logic with Boolean negation.

Two strategies are offered.  ``eval_exact`` handles formulas whose only split
disjunctions and probabilistic quantifiers sit inside first-order subformulas
(those are flat and evaluated row by row).  ``eval_bounded`` searches split
ratios and quantifier distributions on a rational grid with denominator D.

Subteams are kept unnormalized: every clause is invariant under positive
scaling, and a split with k = 0 or k = 1 leaves an empty side.  The empty team
satisfies every formula without Boolean negation, matching the real-arithmetic
encoding where an all-zero weight vector satisfies each atom's constraints.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Mapping

from .atoms import ENTROPY_EPS, eval_atom
from .core import (Structure, TeamError, UnboundVariable, WeightedTeam, check_distribution,
                   duplicate, extend_weighted, holds, parse_weight, restrict)
from .syntax import (ATOMS, And, BoolNeg, Dep, Dialect, DialectError, EntropyEq, Exists, Forall,
                     Formula, Neg, SplitOr, child_path, children, dialect_of, free_vars, is_fo, nnf)


class SearchRequired(ValueError):
    pass


class Overflow(RuntimeError):
    pass


class WitnessError(ValueError):
    pass


class ShapeMismatch(WitnessError):
    pass


class NonDistribution(WitnessError):
    pass


class SplitMismatch(WitnessError):
    pass


class WitnessInsufficient(WitnessError):
    pass


DEFAULT_BUDGET = 10 ** 7


# ---------------------------------------------------------------- shared helpers


def needs_search(phi: Formula) -> bool:
    """True when a split or a probabilistic quantifier occurs outside FO subformulas."""
    if is_fo(phi):
        return False
    if isinstance(phi, (SplitOr, Exists)):
        return True
    return any(needs_search(k) for k in children(phi))


def empty_truth(phi: Formula) -> bool:
    """Truth value on a team with no positive weight."""
    if isinstance(phi, BoolNeg):
        return not empty_truth(phi.body)
    if isinstance(phi, (And, SplitOr)):
        return empty_truth(phi.left) and empty_truth(phi.right)
    if isinstance(phi, (Exists, Forall)):
        return empty_truth(phi.body)
    return True


def _flat(A: Structure, X: WeightedTeam, phi: Formula) -> bool:
    return all(holds(A, s, phi) for s, w in X.assignments() if w)


def _check_input(X: WeightedTeam, phi: Formula) -> None:
    missing = free_vars(phi) - set(X.vars)
    if missing:
        raise UnboundVariable(f"free variables outside the team: {sorted(missing)}")
    if dialect_of(phi) is Dialect.FOPT:
        raise DialectError("comparison-logic formulas are evaluated by the fopt module")


def _atom(A, X, phi, eps):
    if isinstance(phi, EntropyEq) and X.is_empty:
        return True
    return eval_atom(A, X, phi, eps)


# ---------------------------------------------------------------- exact evaluation


def eval_exact(A: Structure, X: WeightedTeam, phi: Formula, eps: float = ENTROPY_EPS) -> bool:
    _check_input(X, phi)
    if needs_search(phi):
        raise SearchRequired("formula contains split disjunction or a probabilistic "
                             "existential outside first-order subformulas")
    return _exact(A, X, phi, eps)


def _exact(A, X, phi, eps) -> bool:
    if X.is_empty:
        return empty_truth(phi)
    if is_fo(phi):
        return _flat(A, X, phi)
    if isinstance(phi, ATOMS):
        return _atom(A, X, phi, eps)
    if isinstance(phi, BoolNeg):
        return not _exact(A, X, phi.body, eps)
    if isinstance(phi, And):
        return _exact(A, X, phi.left, eps) and _exact(A, X, phi.right, eps)
    if isinstance(phi, Forall):
        return _exact(A, duplicate(X, phi.var, A.domain), phi.body, eps)
    raise SearchRequired(f"cannot evaluate {type(phi).__name__} without search")


# ---------------------------------------------------------------- bounded oracle


def grid_distributions(n: int, D: int) -> list[tuple[Fraction, ...]]:
    """All distributions on n points with probabilities in {0, 1/D, ..., 1}; point masses first."""
    out = []
    for bars in itertools.combinations(range(D + n - 1), n - 1):
        parts, prev = [], -1
        for b in bars + (D + n - 1,):
            parts.append(b - prev - 1)
            prev = b
        out.append(tuple(Fraction(p, D) for p in parts))
    points = [d for d in out if max(d) == 1]
    points.sort(key=lambda d: d.index(1))
    return points + [d for d in out if max(d) != 1]


def _dc_part(phi: Formula) -> Formula | None:
    """A downward-closed formula implied by phi, or None when nothing useful is known.

    Support-determined formulas (first-order, dependence, conjunction, split,
    quantifiers) are downward closed.  An entropy equality between nested tuples
    holds exactly when the larger tuple is determined by the smaller one.
    """
    if is_fo(phi) or isinstance(phi, Dep):
        return phi
    if isinstance(phi, EntropyEq):
        l, r = set(phi.lhs), set(phi.rhs)
        if l <= r:
            return Dep(phi.lhs, phi.rhs)
        if r <= l:
            return Dep(phi.rhs, phi.lhs)
        return None
    if isinstance(phi, And):
        a, b = _dc_part(phi.left), _dc_part(phi.right)
        if a is None or b is None:
            return a if b is None else b
        return phi if (a is phi.left and b is phi.right) else And(a, b)
    if isinstance(phi, SplitOr):
        a, b = _dc_part(phi.left), _dc_part(phi.right)
        if a is None or b is None:
            return None
        return phi if (a is phi.left and b is phi.right) else SplitOr(a, b)
    if isinstance(phi, Forall):
        a = _dc_part(phi.body)
        if a is None:
            return None
        return phi if a is phi.body else Forall(phi.var, a)
    if isinstance(phi, Exists):
        a = _dc_part(phi.body)
        return None if a is None else _project(a, phi.var)
    return None


def _project(phi: Formula, v: str) -> Formula | None:
    """A quantifier-free-in-v consequence of exists v. phi, for downward-closed phi.

    Conjuncts that cannot be kept are dropped (weakened to true); a dependence
    atom keeps the part of its determined tuple that avoids v.
    """
    if v not in free_vars(phi):
        return phi
    if isinstance(phi, Dep) and v not in phi.lhs:
        rest = tuple(y for y in phi.rhs if y != v)
        return Dep(phi.lhs, rest) if rest else None
    if isinstance(phi, And):
        a, b = _project(phi.left, v), _project(phi.right, v)
        if a is None or b is None:
            return a if b is None else b
        return And(a, b)
    if isinstance(phi, SplitOr):
        a, b = _project(phi.left, v), _project(phi.right, v)
        return None if a is None or b is None else SplitOr(a, b)
    if isinstance(phi, (Exists, Forall)) and phi.var != v:
        a = _project(phi.body, v)
        return None if a is None else type(phi)(phi.var, a)
    return None


class _Oracle:
    def __init__(self, A: Structure, D: int, budget: int, flat_fo: bool, eps: float):
        if D < 1:
            raise ValueError("grid denominator must be at least 1")
        self.A, self.D, self.budget, self.flat, self.eps = A, D, budget, flat_fo, eps
        self.count = 0
        self.memo: dict = {}
        self._fv: dict[int, frozenset] = {}
        self._fo: dict[int, bool] = {}
        self._dc: dict[int, Formula | None] = {}
        self._keep: list = []
        self.grid = grid_distributions(len(A.domain), D)
        by_support: dict[tuple, list] = {}
        for dist in self.grid:
            by_support.setdefault(tuple(i for i, p in enumerate(dist) if p), []).append(dist)
        self.groups = list(by_support.values())
        self.hints: Mapping = {}
        self.paths: dict[int, str] = {}

    def set_hints(self, phi: Formula, hints: Mapping | None) -> None:
        """Register a witness whose choices are tried first (ordering only)."""
        self.hints = hints or {}
        stack = [(phi, "")]
        while stack:
            node, path = stack.pop()
            if isinstance(node, (SplitOr, Exists)):
                self.paths.setdefault(id(node), path)
                self._keep.append(node)
            stack.extend((k, child_path(path, i)) for i, k in enumerate(children(node)))

    # -- caches keyed by node identity (nodes are kept alive in _keep)

    def fv(self, phi):
        k = id(phi)
        if k not in self._fv:
            self._keep.append(phi)
            self._fv[k] = free_vars(phi)
        return self._fv[k]

    def fo(self, phi):
        k = id(phi)
        if k not in self._fo:
            self._keep.append(phi)
            self._fo[k] = self.flat and is_fo(phi)
        return self._fo[k]

    def dc(self, phi):
        k = id(phi)
        if k not in self._dc:
            d = _dc_part(phi)
            self._keep.extend((phi, d))
            self._dc[k] = d
        return self._dc[k]

    def tick(self):
        self.count += 1
        if self.count > self.budget:
            raise Overflow(f"search budget of {self.budget} clause evaluations exhausted")

    def local(self, phi, X):
        fv = self.fv(phi)
        return X if len(X.vars) == len(fv) else restrict(X, fv)

    # -- semantics

    def sat(self, phi: Formula, X: WeightedTeam) -> bool:
        self.tick()
        X = self.local(phi, X)
        key = (id(phi), X)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        v = self._sat(phi, X)
        self.memo[key] = v
        return v

    def _sat(self, phi, X) -> bool:
        if X.is_empty:
            return empty_truth(phi)
        if self.fo(phi) or isinstance(phi, Neg):
            return _flat(self.A, X, phi)
        if isinstance(phi, ATOMS):
            return _atom(self.A, X, phi, self.eps)
        if isinstance(phi, BoolNeg):
            return not self.sat(phi.body, X)
        if isinstance(phi, And):
            return self.sat(phi.left, X) and self.sat(phi.right, X)
        if isinstance(phi, Forall):
            return self.sat(phi.body, duplicate(X, phi.var, self.A.domain))
        if isinstance(phi, SplitOr):
            return self.split_search(phi, X) is not None
        if isinstance(phi, Exists):
            return self.exists_search(phi, X) is not None
        raise DialectError(f"unsupported node {type(phi).__name__}")

    def _hint(self, phi, key):
        e = self.hints.get(self.paths.get(id(phi)))
        return e.get(key) if isinstance(e, Mapping) else None

    def split_search(self, phi: SplitOr, X: WeightedTeam):
        """Return per-row numerators m (Y gets m/D of the row) or None.

        Candidates are grouped by which sides receive weight; the downward-closed
        parts depend only on that, so they are checked once per group.
        """
        A, D = self.A, self.D
        rows = X.support_rows()
        L, R = phi.left, phi.right
        lfo, rfo = self.fo(L), self.fo(R)
        dl = None if lfo else self.dc(L)
        dr = None if rfo else self.dc(R)
        both_full = dl is L and dr is R
        groups = [[D], [0], list(range(1, D))] if D > 1 else [[D], [0]]
        opts = []
        for t, _ in rows:
            s = dict(zip(X.vars, t))
            g = groups
            if lfo and not holds(A, s, L):
                g = [[0]]
            if rfo and not holds(A, s, R):
                g = [[D]] if g is groups else []
            if not g:
                return None
            opts.append(g)
        hint = self._split_hint(phi, X, rows)
        Y: dict = {}
        Z: dict = {}
        chosen: list[int] = []

        def team(acc):
            return WeightedTeam._from_map(X.vars, dict(acc), A.domain)

        def put(t, w, m):
            y = w * m / D
            z = w - y
            if y:
                Y[t] = y
            if z:
                Z[t] = z
            return y, z

        def dfs(i):
            if i == len(rows):
                return ((lfo or dl is L or self.sat(L, team(Y)))
                        and (rfo or dr is R or self.sat(R, team(Z))))
            t, w = rows[i]
            gs = opts[i]
            if hint is not None and any(hint[i] in g for g in gs):
                gs = [[hint[i]]] + gs
            for g in gs:
                self.tick()
                y, z = put(t, w, g[0])
                ok = ((not y or dl is None or self.sat(dl, team(Y)))
                      and (not z or dr is None or self.sat(dr, team(Z))))
                Y.pop(t, None)
                Z.pop(t, None)
                if not ok:
                    continue
                for m in (g[:1] if both_full else g):
                    self.tick()
                    put(t, w, m)
                    chosen.append(m)
                    if dfs(i + 1):
                        return True
                    chosen.pop()
                    Y.pop(t, None)
                    Z.pop(t, None)
            return False

        return list(chosen) if dfs(0) else None

    def _split_hint(self, phi, X, rows):
        e = self.hints.get(self.paths.get(id(phi)))
        if not isinstance(e, Mapping):
            return None
        try:
            k = Fraction(str(e["k"]))
            yw = [Fraction(str(v)) for v in e["yw"]]
            tot = X.total
            ms = [k * y / (w / tot) * self.D for (_, w), y in zip(rows, yw)]
        except (KeyError, TypeError, ValueError, ZeroDivisionError):
            return None
        if len(ms) != len(rows) or any(m.denominator != 1 or not 0 <= m <= self.D for m in ms):
            return None
        return [int(m) for m in ms]

    def _exists_hint(self, phi, rows):
        e = self.hints.get(self.paths.get(id(phi)))
        if not isinstance(e, Mapping) or not isinstance(e.get("F"), Mapping):
            return None
        out = []
        for i in range(len(rows)):
            dist = e["F"].get(str(i))
            if not isinstance(dist, Mapping):
                return None
            try:
                d = tuple(Fraction(str(dist.get(a, 0))) for a in self.A.domain)
            except (ValueError, ZeroDivisionError):
                return None
            if sum(d) != 1 or any(p < 0 or (p * self.D).denominator != 1 for p in d):
                return None
            out.append(d)
        return out

    def exists_search(self, phi: Exists, X: WeightedTeam):
        """Return per-row grid distributions (tuples aligned with the domain) or None.

        Grid points are grouped by support: the downward-closed part of the body
        depends only on supports, and when the body is itself downward closed one
        distribution per support suffices.
        """
        A = self.A
        x, body = phi.var, phi.body
        rows = X.support_rows()
        if x not in self.fv(body):
            return [self.grid[0]] * len(rows) if self.sat(body, X) else None
        d = self.dc(body)
        hint = self._exists_hint(phi, rows)
        out_vars = X.vars + (x,)
        acc: dict = {}
        chosen: list = []

        def team():
            return WeightedTeam._from_map(out_vars, dict(acc), A.domain)

        def put(t, w, dist):
            added = []
            for a, p in zip(A.domain, dist):
                if p:
                    acc[t + (a,)] = w * p
                    added.append(t + (a,))
            return added

        def dfs(i):
            if i == len(rows):
                return d is body or self.sat(body, team())
            t, w = rows[i]
            gs = self.groups
            if hint is not None:
                gs = [[hint[i]]] + gs
            for g in gs:
                self.tick()
                added = put(t, w, g[0])
                ok = d is None or self.sat(d, team())
                for r in added:
                    del acc[r]
                if not ok:
                    continue
                for dist in (g[:1] if d is body else g):
                    self.tick()
                    added = put(t, w, dist)
                    chosen.append(dist)
                    if dfs(i + 1):
                        return True
                    chosen.pop()
                    for r in added:
                        del acc[r]
            return False

        return list(chosen) if dfs(0) else None

    # -- witness extraction

    def witness(self, phi: Formula, X: WeightedTeam, path: str, out: dict) -> None:
        X = self.local(phi, X)
        if X.is_empty or self.fo(phi) or isinstance(phi, (Neg,) + ATOMS):
            return
        if isinstance(phi, BoolNeg):
            if needs_search(phi.body):
                raise WitnessInsufficient(f"Boolean negation over a search node at path {path!r}")
            return
        if isinstance(phi, And):
            self.witness(phi.left, X, child_path(path, 0), out)
            self.witness(phi.right, X, child_path(path, 1), out)
        elif isinstance(phi, Forall):
            self.witness(phi.body, duplicate(X, phi.var, self.A.domain), child_path(path, 0), out)
        elif isinstance(phi, SplitOr):
            ms = self.split_search(phi, X)
            rows = X.support_rows()
            ys = [w * m / self.D for (_, w), m in zip(rows, ms)]
            zs = [w - y for (_, w), y in zip(rows, ys)]
            ty, tz = sum(ys, Fraction(0)), sum(zs, Fraction(0))
            out[path] = {"k": str(ty / X.total),
                         "yw": [str(y / ty if ty else 0) for y in ys],
                         "zw": [str(z / tz if tz else 0) for z in zs]}
            Y = WeightedTeam(X.vars, [(t, y) for (t, _), y in zip(rows, ys)], X.domain)
            Z = WeightedTeam(X.vars, [(t, z) for (t, _), z in zip(rows, zs)], X.domain)
            self.witness(phi.left, Y, child_path(path, 0), out)
            self.witness(phi.right, Z, child_path(path, 1), out)
        elif isinstance(phi, Exists):
            dists = self.exists_search(phi, X)
            rows = X.support_rows()
            F = {r: {a: p for a, p in zip(self.A.domain, dist) if p} for (r, _), dist in zip(rows, dists)}
            out[path] = {"F": {str(i): {a: str(p) for a, p in F[r].items()}
                               for i, (r, _) in enumerate(rows)}}
            self.witness(phi.body, extend_weighted(X, phi.var, F), child_path(path, 0), out)


def _prepare(A, X, phi, flat_fo):
    _check_input(X, phi)
    return phi if flat_fo else nnf(phi)


def eval_bounded(A: Structure, X: WeightedTeam, phi: Formula, D: int, budget: int = DEFAULT_BUDGET,
                 flat_fo: bool = True, eps: float = ENTROPY_EPS, hint: Mapping | None = None) -> bool:
    """Decide phi with split ratios and distributions restricted to multiples of 1/D.

    With ``flat_fo`` first-order subformulas are evaluated row by row; otherwise
    they go through the clause-by-clause search like every other node.  A
    ``hint`` (witness format) only changes the order in which choices are tried.
    """
    phi = _prepare(A, X, phi, flat_fo)
    o = _Oracle(A, D, budget, flat_fo, eps)
    if flat_fo:
        o.set_hints(phi, hint)
    return o.sat(phi, X)


def find_witness(A: Structure, X: WeightedTeam, phi: Formula, D: int, budget: int = DEFAULT_BUDGET,
                 eps: float = ENTROPY_EPS) -> dict | None:
    """A witness in the ``check_witness`` format found on the grid, or None."""
    _check_input(X, phi)
    o = _Oracle(A, D, budget, True, eps)
    if not o.sat(phi, X):
        return None
    out: dict = {}
    o.witness(phi, X, "", out)
    return out


# ---------------------------------------------------------------- witness checking


def _entry(w: Mapping, path: str, key: str):
    e = w.get(path)
    if not isinstance(e, Mapping) or key not in e:
        raise ShapeMismatch(f"missing {key!r} witness at path {path!r}")
    return e


def _weights(ws, n: int, path: str) -> list[Fraction]:
    if not isinstance(ws, (list, tuple)) or len(ws) != n:
        raise ShapeMismatch(f"split at path {path!r} must list {n} weights")
    try:
        return [parse_weight(v) if not isinstance(v, Fraction) else v for v in ws]
    except ValueError as e:
        raise ShapeMismatch(str(e)) from None


def check_witness(A: Structure, X: WeightedTeam, phi: Formula, w: Mapping,
                  eps: float = ENTROPY_EPS) -> bool:
    """Verify phi on X using the supplied split and quantifier witnesses, exactly.

    Witness rows refer to the support of the node's team restricted to the
    node's free variables and normalized, in canonical row order.
    """
    _check_input(X, phi)
    return _chk(A, X, phi, w, "", eps)


def _chk(A, X, phi, w, path, eps) -> bool:
    X = restrict(X, free_vars(phi))
    if X.is_empty:
        return empty_truth(phi)
    X = X.normalize()
    if is_fo(phi) or isinstance(phi, Neg):
        return _flat(A, X, phi)
    if isinstance(phi, ATOMS):
        return _atom(A, X, phi, eps)
    if isinstance(phi, BoolNeg):
        if needs_search(phi.body):
            raise WitnessInsufficient(f"Boolean negation over a search node at path {path!r}")
        return not _exact(A, X, phi.body, eps)
    if isinstance(phi, And):
        return (_chk(A, X, phi.left, w, child_path(path, 0), eps)
                and _chk(A, X, phi.right, w, child_path(path, 1), eps))
    if isinstance(phi, Forall):
        return _chk(A, duplicate(X, phi.var, A.domain), phi.body, w, child_path(path, 0), eps)
    rows = X.support_rows()
    if isinstance(phi, SplitOr):
        e = _entry(w, path, "k")
        try:
            k = parse_weight(e["k"]) if not isinstance(e["k"], Fraction) else e["k"]
        except ValueError as err:
            raise ShapeMismatch(str(err)) from None
        if k > 1:
            raise ShapeMismatch(f"split ratio {k} exceeds 1 at path {path!r}")
        yw = _weights(e.get("yw"), len(rows), path)
        zw = _weights(e.get("zw"), len(rows), path)
        if k > 0 and sum(yw) != 1:
            raise NonDistribution(f"left part of split at path {path!r} is not a distribution")
        if k < 1 and sum(zw) != 1:
            raise NonDistribution(f"right part of split at path {path!r} is not a distribution")
        for (t, x), y, z in zip(rows, yw, zw):
            if k * y + (1 - k) * z != x:
                raise SplitMismatch(f"split at path {path!r} does not reproduce row {t}")
        Y = WeightedTeam(X.vars, [(t, k * y) for (t, _), y in zip(rows, yw)], X.domain)
        Z = WeightedTeam(X.vars, [(t, (1 - k) * z) for (t, _), z in zip(rows, zw)], X.domain)
        return (_chk(A, Y, phi.left, w, child_path(path, 0), eps)
                and _chk(A, Z, phi.right, w, child_path(path, 1), eps))
    if isinstance(phi, Exists):
        F_raw = _entry(w, path, "F")["F"]
        if not isinstance(F_raw, Mapping) or set(map(str, F_raw)) != {str(i) for i in range(len(rows))}:
            raise ShapeMismatch(f"quantifier witness at path {path!r} must cover rows 0..{len(rows) - 1}")
        F = {}
        for i, (t, _) in enumerate(rows):
            dist = F_raw.get(str(i), F_raw.get(i))
            if not isinstance(dist, Mapping) or not set(dist) <= set(A.domain):
                raise ShapeMismatch(f"bad distribution for row {i} at path {path!r}")
            try:
                dist = {a: parse_weight(p) if not isinstance(p, Fraction) else p for a, p in dist.items()}
                check_distribution(dist, t)
            except (ValueError, TeamError) as err:
                raise NonDistribution(f"path {path!r}: {err}") from None
            F[t] = dist
        return _chk(A, extend_weighted(X, phi.var, F), phi.body, w, child_path(path, 0), eps)
    raise DialectError(f"unsupported node {type(phi).__name__}")


def witness_to_json(w: Mapping) -> dict:
    return dict(sorted(w.items()))


def indep_template_witness(A: Structure, X: WeightedTeam, template: Formula,
                           xs: tuple[str, ...], ys: tuple[str, ...]) -> dict:
    """Point-mass witness for the entropy template of marginal independence.

    On the ``zero`` slice u copies xs and v copies xs ys; on the ``one`` slice u
    copies ys and v is the constant ``zero`` tuple; other slices use the first
    domain element.  Short copies are padded with ``zero``.
    """
    if not isinstance(template, Forall):
        raise ShapeMismatch("template must start with a universal quantifier")
    z = template.var
    chain = []
    node = template.body
    while isinstance(node, Exists):
        chain.append(node)
        node = node.body
    n_u = max(len(xs), len(ys))
    us = [e.var for e in chain[:n_u]]
    zero, one = A.constants["zero"], A.constants["one"]

    def value(var, s):
        if s[z] not in (zero, one):
            return A.domain[0]
        if var in us:
            src = xs if s[z] == zero else ys
            i = us.index(var)
            return s[src[i]] if i < len(src) else zero
        if s[z] == one:
            return zero
        return s[(xs + ys)[chain.index(next(e for e in chain if e.var == var)) - n_u]]

    out: dict = {}
    T = duplicate(restrict(X, free_vars(template)), z, A.domain)
    path = "0"
    for e in chain:
        T = restrict(T, free_vars(e)).normalize()
        F = {}
        for t, _ in T.support_rows():
            F[t] = {value(e.var, dict(zip(T.vars, t))): Fraction(1)}
        out[path] = {"F": {str(i): {a: str(p) for a, p in F[t].items()}
                           for i, (t, _) in enumerate(T.support_rows())}}
        T = extend_weighted(T, e.var, F)
        path = child_path(path, 0)
    _guard_splits(A, T, node, path, out)
    return out


def _guard_splits(A: Structure, T: WeightedTeam, phi: Formula, path: str, out: dict) -> None:
    r"""Witness entries for splits of the form (first-order guard) \/ rest:
    rows satisfying the guard go left, the others right."""
    if isinstance(phi, And):
        _guard_splits(A, T, phi.left, child_path(path, 0), out)
        _guard_splits(A, T, phi.right, child_path(path, 1), out)
    elif isinstance(phi, SplitOr) and not is_fo(phi) and is_fo(phi.left):
        T = restrict(T, free_vars(phi))
        if T.is_empty:
            return
        T = T.normalize()
        rows = T.support_rows()
        ys = [w if holds(A, dict(zip(T.vars, t)), phi.left) else Fraction(0) for t, w in rows]
        zs = [w - y for (_, w), y in zip(rows, ys)]
        ty, tz = sum(ys, Fraction(0)), sum(zs, Fraction(0))
        out[path] = {"k": str(ty),
                     "yw": [str(y / ty if ty else 0) for y in ys],
                     "zw": [str(z / tz if tz else 0) for z in zs]}
        Z = WeightedTeam(T.vars, [(t, z) for (t, _), z in zip(rows, zs)], T.domain)
        _guard_splits(A, Z, phi.right, child_path(path, 1), out)
