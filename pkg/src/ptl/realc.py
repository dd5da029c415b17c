"""Compilation of team-logic formulas into first-order real arithmetic.

One real variable stands for the weight of each assignment of the free
variables; split disjunction and the quantifiers introduce auxiliary weight
vectors, and each atom becomes polynomial (or entropy) constraints on
marginal sums of those weights.
"""
from __future__ import annotations

import enum
import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .atoms import rewrite_dep_to_indep
from .core import Structure, WeightedTeam, holds, restrict
from .syntax import (And, BoolNeg, Dialect, EntropyEq, Exists, Forall, Formula, Indep,
                     LITERALS, Marg, SplitOr, alpha_rename, child_path, dialect_of, free_vars,
                     is_fo, nnf, to_text, walk)


class CompileError(ValueError):
    pass


class LogUnsupported(CompileError):
    pass


class TeamMismatch(CompileError):
    pass


class EmptyTeam(CompileError):
    pass


class Fragment(enum.Enum):
    EXISTENTIAL = "EXISTENTIAL"
    FULL = "FULL"
    EXISTENTIAL_LOG = "EXISTENTIAL_LOG"
    FULL_LOG = "FULL_LOG"


class Mode(enum.Enum):
    SAT = "sat"
    CHECK = "check"


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    terms: tuple


@dataclass(frozen=True)
class Mul:
    factors: tuple


@dataclass(frozen=True)
class XLogX:
    """arg * log2(arg), continuous at 0."""
    arg: object


ZERO, ONE = Const(Fraction(0)), Const(Fraction(1))


def _term_of(t):
    # bare numbers are accepted wherever a term is expected
    if isinstance(t, (int, Fraction)):
        return Const(Fraction(t))
    return t


def add(*terms) -> object:
    flat, c = [], Fraction(0)
    for t in map(_term_of, terms):
        parts = t.terms if isinstance(t, Add) else (t,)
        for p in parts:
            if isinstance(p, Const):
                c += p.value
            else:
                flat.append(p)
    if c:
        flat.append(Const(c))
    if not flat:
        return ZERO
    return flat[0] if len(flat) == 1 else Add(tuple(flat))


def mul(*factors) -> object:
    flat, c = [], Fraction(1)
    for f in map(_term_of, factors):
        parts = f.factors if isinstance(f, Mul) else (f,)
        for p in parts:
            if isinstance(p, Const):
                c *= p.value
            else:
                flat.append(p)
    if c == 0:
        return ZERO
    if c != 1 or not flat:
        flat.insert(0, Const(c))
    return flat[0] if len(flat) == 1 else Mul(tuple(flat))


def xlogx(arg) -> object:
    arg = _term_of(arg)
    if isinstance(arg, Const):
        if arg.value in (0, 1):
            return ZERO
    return XLogX(arg)


def term_vars(t) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Add):
        return set().union(*(term_vars(x) for x in t.terms))
    if isinstance(t, Mul):
        return set().union(*(term_vars(x) for x in t.factors))
    if isinstance(t, XLogX):
        return term_vars(t.arg)
    return set()


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Atom:
    op: str  # "=" or "<="
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class Conj:
    parts: tuple


@dataclass(frozen=True)
class Disj:
    parts: tuple


@dataclass(frozen=True)
class Ex:
    vars: tuple
    body: object


@dataclass(frozen=True)
class All:
    vars: tuple
    body: object


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


TOP, BOT = Top(), Bot()


def _has_log(t) -> bool:
    if isinstance(t, XLogX):
        return True
    if isinstance(t, Add):
        return any(_has_log(x) for x in t.terms)
    if isinstance(t, Mul):
        return any(_has_log(x) for x in t.factors)
    return False


def atom(op: str, lhs, rhs):
    lhs, rhs = _term_of(lhs), _term_of(rhs)
    if isinstance(lhs, Const) and isinstance(rhs, Const):
        ok = lhs.value == rhs.value if op == "=" else lhs.value <= rhs.value
        return TOP if ok else BOT
    return Atom(op, lhs, rhs)


def conj(parts: Iterable) -> object:
    out = []
    for p in parts:
        if isinstance(p, Bot):
            return BOT
        if isinstance(p, Top):
            continue
        out.extend(p.parts if isinstance(p, Conj) else (p,))
    if not out:
        return TOP
    return out[0] if len(out) == 1 else Conj(tuple(out))


def negate(f) -> object:
    if isinstance(f, Top):
        return BOT
    if isinstance(f, Bot):
        return TOP
    return Not(f)


def exists(vs: tuple, body) -> object:
    if isinstance(body, (Top, Bot)) or not vs:
        return body
    return Ex(tuple(vs), body)


# ---------------------------------------------------------------- systems


@dataclass(frozen=True)
class CompileStats:
    num_vars: int
    num_outer: int
    num_products: int
    num_sums: int
    num_constraints: int
    depth: int

    def to_json(self) -> dict:
        return {"num_vars": self.num_vars, "num_outer": self.num_outer,
                "num_products": self.num_products, "num_sums": self.num_sums,
                "num_constraints": self.num_constraints, "depth": self.depth}


@dataclass(frozen=True)
class RealSystem:
    body: object
    outer: tuple[str, ...]
    fragment: Fragment
    mode: Mode
    stats: CompileStats
    var_map: Mapping[str, Mapping[str, str]] = field(default_factory=dict)
    team_vars: tuple[str, ...] = ()
    source: str = ""

    def sidecar(self) -> dict:
        return {"mode": self.mode.value, "fragment": self.fragment.value,
                "formula": self.source, "team_vars": list(self.team_vars),
                "stats": self.stats.to_json(),
                "outer": {n: dict(self.var_map[n]) for n in self.outer}}


def system(body, outer: tuple[str, ...] = (), fragment: Fragment = Fragment.EXISTENTIAL,
           mode: Mode = Mode.SAT) -> RealSystem:
    """Wrap a hand-written body (outer variables existentially bound) as a system."""
    body = exists(tuple(outer), body)
    return RealSystem(body, tuple(outer), fragment, mode, _collect_stats(body, tuple(outer)),
                      {}, (), "")


def classify(sys: RealSystem) -> Fragment:
    return sys.fragment


def _fragment(phi: Formula) -> Fragment:
    neg = any(isinstance(n, BoolNeg) for n in walk(phi))
    log = any(isinstance(n, EntropyEq) for n in walk(phi))
    if log:
        return Fragment.FULL_LOG if neg else Fragment.EXISTENTIAL_LOG
    return Fragment.FULL if neg else Fragment.EXISTENTIAL


def _collect_stats(body, outer) -> CompileStats:
    names, prods, sums, cons = set(outer), 0, 0, 0

    def term(t):
        nonlocal prods, sums
        if isinstance(t, Mul):
            prods += 1
            for x in t.factors:
                term(x)
        elif isinstance(t, Add):
            sums += 1
            for x in t.terms:
                term(x)
        elif isinstance(t, XLogX):
            term(t.arg)

    def form(f, d):
        nonlocal cons
        if isinstance(f, Atom):
            cons += 1
            term(f.lhs)
            term(f.rhs)
            return d
        if isinstance(f, (Ex, All)):
            names.update(f.vars)
            return form(f.body, d + 1)
        if isinstance(f, Not):
            return form(f.body, d + 1)
        if isinstance(f, (Conj, Disj)):
            return max((form(p, d + 1) for p in f.parts), default=d)
        return d

    depth = form(body, 0)
    return CompileStats(len(names), len(outer), prods, sums, cons, depth)


# ---------------------------------------------------------------- compiler


_SAFE = re.compile(r"[^A-Za-z0-9_]")


def element_tokens(A: Structure) -> dict[str, str]:
    """Symbol-safe, collision-free spellings of the domain elements."""
    out, used = {}, set()
    for a in A.domain:
        tok = _SAFE.sub("_", a) or "e"
        base, i = tok, 1
        while tok in used:
            tok = f"{base}_{i}"
            i += 1
        used.add(tok)
        out[a] = tok
    return out


class _Compiler:
    def __init__(self, A: Structure, witness: Mapping | None = None):
        self.A = A
        self.tok = element_tokens(A)
        self.n = 0
        self.witness = witness
        self.values: dict[str, Fraction] = {}

    def names(self, prefix: str, vs: tuple, tuples) -> dict[tuple, str]:
        return {t: prefix + "_v" + "".join("_" + self.tok[a] for a in t) for t in tuples}

    def tuples(self, k: int):
        return list(itertools.product(self.A.domain, repeat=k))

    def marginal(self, s: dict, vs: tuple, sub: tuple) -> dict[tuple, object]:
        """Sum of s over the rows with each value tuple of ``sub`` (positional)."""
        cols = [vs.index(v) for v in sub]
        groups: dict[tuple, list] = {}
        for t, e in s.items():
            groups.setdefault(tuple(t[i] for i in cols), []).append(e)
        return {k: add(*es) for k, es in groups.items()}

    def msum(self, s: dict, vs: tuple, fixed: Mapping[str, str]):
        cols = [(vs.index(v), a) for v, a in fixed.items()]
        return add(*(e for t, e in s.items() if all(t[i] == a for i, a in cols)))

    # -- numeric companions (witness translation)

    def _num(self, vals, t):
        return None if vals is None else vals[t]

    def comp(self, phi: Formula, vs: tuple, s: dict, path: str, vals: dict | None):
        A = self.A
        if isinstance(phi, LITERALS):
            return conj(atom("=", s[t], ZERO) for t in s if not holds(A, dict(zip(vs, t)), phi))
        if isinstance(phi, Indep):
            v0, v1, v2 = phi.cond, phi.left, phi.right
            allv = tuple(dict.fromkeys(v0 + v1 + v2))
            parts = []
            for c in self.tuples(len(allv)):
                asg = dict(zip(allv, c))
                pick = lambda ws: {v: asg[v] for v in dict.fromkeys(ws)}  # noqa: E731
                lhs = mul(self.msum(s, vs, pick(v0 + v1)), self.msum(s, vs, pick(v0 + v2)))
                rhs = mul(self.msum(s, vs, pick(v0 + v1 + v2)), self.msum(s, vs, pick(v0)))
                parts.append(atom("=", lhs, rhs))
            return conj(parts)
        if isinstance(phi, Marg):
            ml, mr = self.marginal(s, vs, phi.lhs), self.marginal(s, vs, phi.rhs)
            return conj(atom("=", ml.get(k, ZERO), mr.get(k, ZERO))
                        for k in self.tuples(len(phi.lhs)))
        if isinstance(phi, EntropyEq):
            ml, mr = self.marginal(s, vs, phi.lhs), self.marginal(s, vs, phi.rhs)
            return atom("=", add(*(xlogx(e) for e in ml.values())), add(*(xlogx(e) for e in mr.values())))
        if isinstance(phi, BoolNeg):
            return negate(self.comp(phi.body, vs, s, child_path(path, 0), None))
        if isinstance(phi, And):
            return conj([self.comp(phi.left, vs, s, child_path(path, 0), vals),
                         self.comp(phi.right, vs, s, child_path(path, 1), vals)])
        if isinstance(phi, SplitOr):
            self.n += 1
            tn = self.names(f"t{self.n}", vs, s)
            rn = self.names(f"r{self.n}", vs, s)
            t = {k: Var(tn[k]) for k in s}
            r = {k: Var(rn[k]) for k in s}
            tv = rv = None
            if vals is not None:
                tv, rv = self._split_values(phi, vs, vals, path)
                self.values.update({tn[k]: tv[k] for k in s})
                self.values.update({rn[k]: rv[k] for k in s})
            body = conj(
                [conj([atom("<=", ZERO, t[k]), atom("<=", ZERO, r[k]), atom("=", s[k], add(t[k], r[k]))])
                 for k in s]
                + [self.comp(phi.left, vs, t, child_path(path, 0), tv),
                   self.comp(phi.right, vs, r, child_path(path, 1), rv)])
            return exists(tuple(tn[k] for k in s) + tuple(rn[k] for k in s), body)
        if isinstance(phi, (Exists, Forall)):
            self.n += 1
            x = phi.var
            vs2 = vs + (x,)
            keys = [k + (c,) for k in s for c in A.domain]
            tn = self.names(f"t{self.n}", vs2, keys)
            t = {k: Var(tn[k]) for k in keys}
            tv = None
            if vals is not None:
                tv = self._quant_values(phi, vs, vals, path)
                self.values.update({tn[k]: tv[k] for k in keys})
            parts = [atom("<=", ZERO, t[k]) for k in keys]
            parts += [atom("=", s[k], add(*(t[k + (c,)] for c in A.domain))) for k in s]
            if isinstance(phi, Forall):
                parts += [atom("=", t[k + (c,)], t[k + (d,)])
                          for k in s for c, d in itertools.combinations(A.domain, 2)]
            parts.append(self.comp(phi.body, vs2, t, child_path(path, 0), tv))
            return exists(tuple(tn[k] for k in keys), conj(parts))
        raise CompileError(f"cannot compile {type(phi).__name__}")

    # -- numeric values of auxiliaries from a witness (or flatness for FO nodes)

    def _node_rows(self, phi, vs, vals):
        fv = [v for v in vs if v in free_vars(phi)]
        cols = [vs.index(v) for v in fv]
        team = WeightedTeam(vs, vals.items(), self.A.domain)
        node = restrict(team, fv)
        return fv, cols, node

    def _split_values(self, phi, vs, vals, path):
        fv, cols, node = self._node_rows(phi, vs, vals)
        ratio: dict[tuple, Fraction] = {}
        if is_fo(phi):
            for r, _ in node.support_rows():
                ratio[r] = Fraction(int(holds(self.A, dict(zip(fv, r)), phi.left)))
        else:
            e = (self.witness or {}).get(path)
            rows = node.support_rows()
            if rows and not isinstance(e, Mapping):
                raise CompileError(f"witness has no split entry at path {path!r}")
            if rows:
                tot = node.total
                k = Fraction(str(e["k"]))
                for (r, w), y in zip(rows, e["yw"]):
                    ratio[r] = k * Fraction(str(y)) / (w / tot)
        tv, rv = {}, {}
        for a, w in vals.items():
            rho = ratio.get(tuple(a[i] for i in cols), Fraction(0))
            tv[a] = w * rho
            rv[a] = w - tv[a]
        return tv, rv

    def _quant_values(self, phi, vs, vals, path):
        A = self.A
        fv, cols, node = self._node_rows(phi, vs, vals)
        dist: dict[tuple, dict] = {}
        if isinstance(phi, Forall):
            uni = {c: Fraction(1, len(A.domain)) for c in A.domain}
            dist = {r: uni for r, _ in node.rows}
        elif is_fo(phi):
            for r, _ in node.rows:
                s = dict(zip(fv, r))
                c = next((c for c in A.domain if holds(A, {**s, phi.var: c}, phi.body)), A.domain[0])
                dist[r] = {c: Fraction(1)}
        else:
            e = (self.witness or {}).get(path)
            rows = node.support_rows()
            if rows and not (isinstance(e, Mapping) and isinstance(e.get("F"), Mapping)):
                raise CompileError(f"witness has no quantifier entry at path {path!r}")
            for i, (r, _) in enumerate(rows):
                dist[r] = {a: Fraction(str(p)) for a, p in e["F"][str(i)].items()}
        out = {}
        for a, w in vals.items():
            d = dist.get(tuple(a[i] for i in cols), {A.domain[0]: Fraction(1)})
            for c in A.domain:
                out[a + (c,)] = w * d.get(c, Fraction(0))
        return out


def _prepare(phi: Formula) -> Formula:
    if dialect_of(phi) is Dialect.FOPT:
        raise CompileError("comparison-logic formulas are decided by the fopt module")
    return alpha_rename(rewrite_dep_to_indep(nnf(phi)))


def _team_values(X: WeightedTeam, vs: tuple, fv: frozenset) -> dict[tuple, Fraction]:
    if set(X.vars) != set(fv):
        raise TeamMismatch(f"team variables {sorted(X.vars)} differ from free variables {sorted(fv)}")
    if X.is_empty:
        raise EmptyTeam("the team has no positive weight; compiled systems require a nonempty team")
    cols = [X.vars.index(v) for v in vs]
    return {tuple(t[i] for i in cols): w for t, w in X.rows}


def compile_formula(A: Structure, phi: Formula, mode: Mode | str = Mode.SAT,
                    X: WeightedTeam | None = None, witness: Mapping | None = None
                    ) -> tuple[RealSystem, dict[str, Fraction]]:
    """Compile and, when ``witness`` is given (check mode), also return values for
    the auxiliary variables translated from it."""
    mode = Mode(mode)
    src = to_text(phi)
    fragment = _fragment(phi)
    psi = _prepare(phi)
    fv = free_vars(psi)
    vs = tuple(sorted(fv))
    c = _Compiler(A, witness)
    keys = c.tuples(len(vs))
    names = c.names("s", vs, keys)
    var_map = {names[k]: dict(zip(vs, k)) for k in keys}
    if mode is Mode.SAT:
        s = {k: Var(names[k]) for k in keys}
        core = c.comp(psi, vs, s, "", None)
        outer = tuple(names[k] for k in keys)
        body = exists(outer, conj([conj(atom("<=", ZERO, s[k]) for k in keys),
                                   negate(atom("=", ZERO, add(*s.values()))),
                                   core]))
        if isinstance(body, (Top, Bot)):
            outer = ()
    else:
        if X is None:
            if fv:
                raise TeamMismatch("check mode on an open formula needs a team")
            X = WeightedTeam((), [((), 1)], A.domain)
        vals0 = _team_values(X, vs, fv)
        vals = {k: vals0.get(k, Fraction(0)) for k in keys}
        s = {k: Const(vals[k]) for k in keys}
        core = c.comp(psi, vs, s, "", vals if witness is not None else None)
        body = conj([conj(atom("<=", ZERO, s[k]) for k in keys),
                     negate(atom("=", ZERO, add(*s.values()))),
                     core])
        outer = ()
    sys = RealSystem(body, outer, fragment, mode, _collect_stats(body, outer), var_map, vs, src)
    return sys, c.values


def compile(A: Structure, phi: Formula, mode: Mode | str = Mode.SAT,
            X: WeightedTeam | None = None) -> RealSystem:
    try:
        return compile_formula(A, phi, mode, X)[0]
    except CompileError:
        raise
    except (KeyError, TypeError) as e:
        raise CompileError(str(e)) from None


def witness_to_assignment(A: Structure, phi: Formula, X: WeightedTeam | None, witness: Mapping
                          ) -> dict[str, Fraction]:
    """Values of the check-mode auxiliaries induced by a split/quantifier witness."""
    return compile_formula(A, phi, Mode.CHECK, X, witness)[1]


def constant_verdict(sys: RealSystem) -> bool | None:
    """True/False when the system folded to a constant, else None."""
    if isinstance(sys.body, Top):
        return True
    if isinstance(sys.body, Bot):
        return False
    return None


# ---------------------------------------------------------------- SMT-LIB2


def _num(q: Fraction) -> str:
    mag = abs(q)
    s = str(mag.numerator) if mag.denominator == 1 else f"(/ {mag.numerator} {mag.denominator})"
    return f"(- {s})" if q < 0 else s


def _term(t) -> str:
    if isinstance(t, Const):
        return _num(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Add):
        return "(+ " + " ".join(_term(x) for x in t.terms) + ")"
    if isinstance(t, Mul):
        return "(* " + " ".join(_term(x) for x in t.factors) + ")"
    raise LogUnsupported("entropy terms cannot be written in SMT-LIB2")


def _form(f, lower: bool) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Atom):
        return f"({f.op} {_term(f.lhs)} {_term(f.rhs)})"
    if isinstance(f, Not):
        return f"(not {_form(f.body, False)})"
    if isinstance(f, (Conj, Disj)):
        op = "and" if isinstance(f, Conj) else "or"
        return f"({op} " + " ".join(_form(p, lower) for p in f.parts) + ")"
    if isinstance(f, (Ex, All)):
        if lower and isinstance(f, Ex):
            return _form(f.body, lower)
        q = "exists" if isinstance(f, Ex) else "forall"
        binders = " ".join(f"({v} Real)" for v in f.vars)
        return f"({q} ({binders}) {_form(f.body, False)})"
    raise CompileError(f"unknown node {type(f).__name__}")


def _lowered_vars(f, acc: list) -> list:
    """Existential variables reachable through conjunctions only."""
    if isinstance(f, Ex):
        acc.extend(f.vars)
        _lowered_vars(f.body, acc)
    elif isinstance(f, Conj):
        for p in f.parts:
            _lowered_vars(p, acc)
    return acc


def emit_smtlib2(sys: RealSystem) -> str:
    if sys.fragment in (Fragment.EXISTENTIAL_LOG, Fragment.FULL_LOG):
        raise LogUnsupported("entropy constraints need logarithms, which SMT-LIB2 lacks")
    lines = [f"; mode {sys.mode.value}, fragment {sys.fragment.value}",
             f"; formula: {sys.source}"]
    if sys.fragment is Fragment.EXISTENTIAL:
        lines.append("(set-logic QF_NRA)")
        for v in _lowered_vars(sys.body, []):
            lines.append(f"(declare-const {v} Real)")
        lines.append(f"(assert {_form(sys.body, True)})")
        lines += ["(check-sat)", "(get-model)"]
    else:
        lines.append("(set-logic NRA)")
        lines.append(f"(assert {_form(sys.body, False)})")
        lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def sidecar_json(sys: RealSystem) -> str:
    return json.dumps(sys.sidecar(), indent=2, sort_keys=True)
