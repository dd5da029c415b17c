"""Translation of independence-logic formulas into second-order sentences over
distributions, and evaluation of function-quantifier-free sentences on tables.

The translation is compositional in the formula. The team is represented by one
free function variable ``f`` whose arity is the number of free variables of the input.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .core import Structure, TeamError, WeightedTeam
from .syntax import (And, BoolNeg, Dep, EntropyEq, Eq, Exists, Forall, Formula, Indep, Marg, Rel,
                     SplitOr, alpha_rename, all_vars, free_vars, fresh_names, is_const, nnf, to_text)


class TranslationError(ValueError):
    pass


class FunctionQuantifierUnsupported(ValueError):
    pass


class SOParseError(ValueError):
    pass


# ---------------------------------------------------------------- AST: numeric terms


@dataclass(frozen=True)
class FApp:
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Times:
    left: object
    right: object


@dataclass(frozen=True)
class Plus:
    left: object
    right: object


@dataclass(frozen=True)
class Sum:
    vars: tuple[str, ...]
    body: object


@dataclass(frozen=True)
class Log:
    body: object


# ---------------------------------------------------------------- AST: formulas


@dataclass(frozen=True)
class NumEq:
    left: object
    right: object
    negated: bool = False


@dataclass(frozen=True)
class SRel:
    name: str
    args: tuple[str, ...]
    negated: bool = False


@dataclass(frozen=True)
class SEq:
    left: str
    right: str
    negated: bool = False


@dataclass(frozen=True)
class SAnd:
    left: object
    right: object


@dataclass(frozen=True)
class SOr:
    left: object
    right: object


@dataclass(frozen=True)
class SExists:
    var: str
    body: object


@dataclass(frozen=True)
class SForall:
    var: str
    body: object


@dataclass(frozen=True)
class FExists:
    name: str
    arity: int
    body: object


@dataclass(frozen=True)
class FForall:
    name: str
    arity: int
    body: object


@dataclass(frozen=True)
class FunctionTable:
    name: str
    arity: int
    values: Mapping[tuple, Fraction] = field(default_factory=dict)
    distribution: bool = False

    def __post_init__(self):
        for k in self.values:
            if len(k) != self.arity:
                raise ValueError(f"table {self.name}: key {k} does not have arity {self.arity}")
        if self.distribution and sum(self.values.values(), Fraction(0)) != 1:
            raise ValueError(f"table {self.name} is flagged as a distribution but does not sum to 1")

    def __call__(self, args: tuple) -> Fraction:
        return self.values.get(tuple(args), Fraction(0))


# ---------------------------------------------------------------- helpers


def _forall(vs: Iterable[str], body):
    for v in reversed(tuple(vs)):
        body = SForall(v, body)
    return body


def _and(*parts):
    out = parts[0]
    for p in parts[1:]:
        out = SAnd(out, p)
    return out


def _or(*parts):
    out = parts[0]
    for p in parts[1:]:
        out = SOr(out, p)
    return out


def negate_so(phi):
    """Negation pushed to the atoms (numeric identities and relational literals)."""
    if isinstance(phi, NumEq):
        return NumEq(phi.left, phi.right, not phi.negated)
    if isinstance(phi, SRel):
        return SRel(phi.name, phi.args, not phi.negated)
    if isinstance(phi, SEq):
        return SEq(phi.left, phi.right, not phi.negated)
    if isinstance(phi, SAnd):
        return SOr(negate_so(phi.left), negate_so(phi.right))
    if isinstance(phi, SOr):
        return SAnd(negate_so(phi.left), negate_so(phi.right))
    if isinstance(phi, SExists):
        return SForall(phi.var, negate_so(phi.body))
    if isinstance(phi, SForall):
        return SExists(phi.var, negate_so(phi.body))
    if isinstance(phi, FExists):
        return FForall(phi.name, phi.arity, negate_so(phi.body))
    if isinstance(phi, FForall):
        return FExists(phi.name, phi.arity, negate_so(phi.body))
    raise TypeError(type(phi).__name__)


def _uniq(vs) -> tuple[str, ...]:
    return tuple(dict.fromkeys(vs))


def normalize_indep(atom: Indep) -> tuple[tuple, tuple, tuple]:
    """Rewrite y indep_x z into disjoint tuples, or the y indep_x y form.

    Variables of the condition are dropped from both sides, which does not
    change the marginals involved.
    """
    x = _uniq(atom.cond)
    y = tuple(v for v in _uniq(atom.left) if v not in x)
    z = tuple(v for v in _uniq(atom.right) if v not in x)
    if set(y) == set(z):
        return x, y, y
    if set(y) & set(z):
        raise TranslationError(f"independence atom with partially overlapping sides: {to_text(atom)}")
    return x, y, z


def free_functions(phi) -> set[str]:
    if isinstance(phi, FApp):
        return {phi.name}
    if isinstance(phi, (Num, SRel, SEq)):
        return set()
    if isinstance(phi, (Times, Plus, NumEq, SAnd, SOr)):
        return free_functions(phi.left) | free_functions(phi.right)
    if isinstance(phi, (Sum, Log, SExists, SForall)):
        return free_functions(phi.body)
    if isinstance(phi, (FExists, FForall)):
        return free_functions(phi.body) - {phi.name}
    raise TypeError(type(phi).__name__)


# ---------------------------------------------------------------- translation


class _Translator:
    def __init__(self, avoid: set[str]):
        self.n = 0
        self.avoid = set(avoid)

    def fresh_fn(self) -> str:
        self.n += 1
        return f"g#{self.n}"

    def fresh_var(self, base: str) -> str:
        v = next(fresh_names(self.avoid, base))
        self.avoid.add(v)
        return v

    def tr(self, phi: Formula, vs: tuple[str, ...], f: str):
        fv = FApp(f, vs)
        zero = Num(Fraction(0))
        if isinstance(phi, Rel):
            return _forall(vs, SOr(NumEq(fv, zero), SRel(phi.name, phi.args, phi.negated)))
        if isinstance(phi, Eq):
            return _forall(vs, SOr(NumEq(fv, zero), SEq(phi.left, phi.right, phi.negated)))
        if isinstance(phi, Indep):
            v0, v1, v2 = normalize_indep(phi)

            def marg(keep):
                return Sum(tuple(v for v in vs if v not in keep), fv)

            if v1 == v2:
                m01 = marg(set(v0 + v1))
                return _forall(v0 + v1, SOr(NumEq(m01, zero), NumEq(m01, marg(set(v0)))))
            return _forall(v0 + v1 + v2, NumEq(
                Times(marg(set(v0 + v1)), marg(set(v0 + v2))),
                Times(marg(set(v0 + v1 + v2)), marg(set(v0)))))
        if isinstance(phi, BoolNeg):
            return negate_so(self.tr(phi.body, vs, f))
        if isinstance(phi, And):
            return SAnd(self.tr(phi.left, vs, f), self.tr(phi.right, vs, f))
        if isinstance(phi, SplitOr):
            g0, g1, g2, g3 = (self.fresh_fn() for _ in range(4))
            x = self.fresh_var("x")
            l, r = "@zero", "@one"
            slots = FApp(g3, vs + (x,))
            side = _forall(vs + (x,), _or(SEq(x, l), SEq(x, r),
                                         SAnd(NumEq(FApp(g0, (x,)), Num(Fraction(0))),
                                              NumEq(slots, Num(Fraction(0))))))
            mix = _forall(vs, SAnd(NumEq(FApp(g3, vs + (l,)), Times(FApp(g1, vs), FApp(g0, (l,)))),
                                   NumEq(FApp(g3, vs + (r,)), Times(FApp(g2, vs), FApp(g0, (r,))))))
            total = _forall(vs, NumEq(Sum((x,), slots), FApp(f, vs)))
            body = _and(side, mix, total, self.tr(phi.left, vs, g1), self.tr(phi.right, vs, g2))
            k = len(vs)
            quant = FExists(g0, 1, FExists(g1, k, FExists(g2, k, FExists(g3, k + 1, body))))
            return _or(self.tr(phi.left, vs, f), self.tr(phi.right, vs, f), quant)
        if isinstance(phi, (Exists, Forall)):
            g = self.fresh_fn()
            x = phi.var
            ext = FApp(g, vs + (x,))
            total = NumEq(Sum((x,), ext), FApp(f, vs))
            if isinstance(phi, Forall):
                y = self.fresh_var("y")
                same = SForall(x, SForall(y, NumEq(ext, FApp(g, vs + (y,)))))
                total = SAnd(same, total)
            return FExists(g, len(vs) + 1, SAnd(_forall(vs, total), self.tr(phi.body, vs + (x,), g)))
        if isinstance(phi, Dep):
            raise TranslationError("dependence atoms must be rewritten to independence atoms first")
        if isinstance(phi, (Marg, EntropyEq)):
            raise TranslationError(f"atom not covered by the translation: {to_text(phi)}")
        raise TranslationError(f"cannot translate {type(phi).__name__}")


def thm3_translate(phi: Formula, fname: str = "f") -> object:
    """Second-order sentence with one free function variable ``fname`` whose
    distributions are exactly the teams satisfying ``phi``."""
    psi = alpha_rename(nnf(phi))
    vs = tuple(sorted(free_vars(psi)))
    t = _Translator(set(all_vars(psi)) | {fname})
    return t.tr(psi, vs, fname)


def team_to_table(X: WeightedTeam, name: str = "f") -> FunctionTable:
    """Arguments follow the sorted variable names, the order used by ``thm3_translate``."""
    if not X.normalized:
        raise TeamError("team_to_table needs a normalized team")
    order = sorted(range(len(X.vars)), key=lambda i: X.vars[i])
    return FunctionTable(name, len(X.vars), {tuple(t[i] for i in order): w for t, w in X.rows if w}, True)


# ---------------------------------------------------------------- evaluation


def _resolve(A: Structure, s: Mapping[str, str], v: str) -> str:
    if is_const(v):
        return A.resolve(v, s)
    if v not in s:
        raise TeamError(f"unbound variable {v}")
    return s[v]


def _term(A, tables, s, t):
    if isinstance(t, Num):
        return t.value
    if isinstance(t, FApp):
        if t.name not in tables:
            raise KeyError(f"no table for function {t.name}")
        tab = tables[t.name]
        if tab.arity != len(t.args):
            raise ValueError(f"{t.name} has arity {tab.arity}, applied to {len(t.args)} arguments")
        return tab(tuple(_resolve(A, s, a) for a in t.args))
    if isinstance(t, Times):
        return _term(A, tables, s, t.left) * _term(A, tables, s, t.right)
    if isinstance(t, Plus):
        return _term(A, tables, s, t.left) + _term(A, tables, s, t.right)
    if isinstance(t, Sum):
        tot = Fraction(0)
        for vals in itertools.product(A.domain, repeat=len(t.vars)):
            tot += _term(A, tables, {**s, **dict(zip(t.vars, vals))}, t.body)
        return tot
    if isinstance(t, Log):
        return math.log2(_term(A, tables, s, t.body))
    raise TypeError(type(t).__name__)


def _so(A, tables, s, phi) -> bool:
    if isinstance(phi, NumEq):
        return (_term(A, tables, s, phi.left) == _term(A, tables, s, phi.right)) != phi.negated
    if isinstance(phi, SRel):
        return A.holds_rel(phi.name, tuple(_resolve(A, s, a) for a in phi.args)) != phi.negated
    if isinstance(phi, SEq):
        return (_resolve(A, s, phi.left) == _resolve(A, s, phi.right)) != phi.negated
    if isinstance(phi, SAnd):
        return _so(A, tables, s, phi.left) and _so(A, tables, s, phi.right)
    if isinstance(phi, SOr):
        return _so(A, tables, s, phi.left) or _so(A, tables, s, phi.right)
    if isinstance(phi, SExists):
        return any(_so(A, tables, {**s, phi.var: a}, phi.body) for a in A.domain)
    if isinstance(phi, SForall):
        return all(_so(A, tables, {**s, phi.var: a}, phi.body) for a in A.domain)
    if isinstance(phi, (FExists, FForall)):
        raise FunctionQuantifierUnsupported(f"cannot evaluate the quantifier over {phi.name}")
    raise TypeError(type(phi).__name__)


def eval_so(A: Structure, tables: Mapping[str, FunctionTable] | Iterable[FunctionTable], phi) -> bool:
    if not isinstance(tables, Mapping):
        tables = {t.name: t for t in tables}
    return _so(A, dict(tables), {}, phi)


# ---------------------------------------------------------------- text format


def _args(args) -> str:
    return "(" + ", ".join(args) + ")"


def so_term_text(t) -> str:
    if isinstance(t, Num):
        return str(t.value)
    if isinstance(t, FApp):
        return t.name + _args(t.args)
    if isinstance(t, Times):
        return f"({so_term_text(t.left)} * {so_term_text(t.right)})"
    if isinstance(t, Plus):
        return f"({so_term_text(t.left)} + {so_term_text(t.right)})"
    if isinstance(t, Sum):
        return f"SUM[{' '.join(t.vars)}] {so_term_text(t.body)}"
    if isinstance(t, Log):
        return f"log({so_term_text(t.body)})"
    raise TypeError(type(t).__name__)


def so_to_text(phi) -> str:
    if isinstance(phi, NumEq):
        op = "!=" if phi.negated else "="
        return f"{so_term_text(phi.left)} {op} {so_term_text(phi.right)}"
    if isinstance(phi, SRel):
        return ("!" if phi.negated else "") + phi.name + _args(phi.args)
    if isinstance(phi, SEq):
        return f"{phi.left} {'!=' if phi.negated else '='} {phi.right}"
    if isinstance(phi, SAnd):
        return f"({so_to_text(phi.left)} & {so_to_text(phi.right)})"
    if isinstance(phi, SOr):
        return f"({so_to_text(phi.left)} \\/ {so_to_text(phi.right)})"
    if isinstance(phi, SExists):
        return f"exists {phi.var}. {so_to_text(phi.body)}"
    if isinstance(phi, SForall):
        return f"forall {phi.var}. {so_to_text(phi.body)}"
    if isinstance(phi, FExists):
        return f"E{phi.name}:{phi.arity}. {so_to_text(phi.body)}"
    if isinstance(phi, FForall):
        return f"A{phi.name}:{phi.arity}. {so_to_text(phi.body)}"
    raise TypeError(type(phi).__name__)


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<fq>[EA][A-Za-z_][\w#]*:\d+)"
                    r"|(?P<name>@?[A-Za-z_][\w#']*)|(?P<op>\\/|!=|[()\[\],.&*+=!]))")


def _tokens(text: str) -> list[tuple[str, str]]:
    out, i = [], 0
    text = text.rstrip()
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            raise SOParseError(f"unexpected character at offset {i}: {text[i:i + 10]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        i = m.end()
    return out


class _SOParser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else ("eof", "")

    def take(self, value=None):
        tok = self.peek()
        if value is not None and tok[1] != value:
            raise SOParseError(f"expected {value!r}, found {tok[1]!r}")
        self.i += 1
        return tok

    def formula(self):
        kind, val = self.peek()
        if kind == "name" and val in ("forall", "exists"):
            self.take()
            v = self.take()[1]
            self.take(".")
            body = self.formula()
            return SForall(v, body) if val == "forall" else SExists(v, body)
        if kind == "fq":
            self.take()
            name, ar = val[1:].rsplit(":", 1)
            self.take(".")
            body = self.formula()
            return (FExists if val[0] == "E" else FForall)(name, int(ar), body)
        if val == "(" and not self._paren_term():
            self.take("(")
            left = self.formula()
            op = self.take()[1]
            right = self.formula()
            self.take(")")
            if op == "&":
                return SAnd(left, right)
            if op == "\\/":
                return SOr(left, right)
            raise SOParseError(f"unknown connective {op!r}")
        if val == "!":
            self.take()
            name = self.take()[1]
            return SRel(name, self.arglist(), True)
        if kind == "name" and self.peek(1)[1] == "(" and val != "log":
            name = self.take()[1]
            args = self.arglist()
            if self.peek()[1] in ("=", "!="):
                return self._numeq(FApp(name, args))
            return SRel(name, args)
        if kind == "name" and val not in ("SUM", "log"):
            left = self.take()[1]
            op = self.take()[1]
            right = self.take()[1]
            if op not in ("=", "!="):
                raise SOParseError(f"expected an equality, found {op!r}")
            return SEq(left, right, op == "!=")
        return self._numeq(self.term())

    def _paren_term(self) -> bool:
        """Whether the parenthesis at the cursor opens a numeric term."""
        depth, j = 0, self.i
        while j < len(self.toks):
            v = self.toks[j][1]
            if v == "(":
                depth += 1
            elif v == ")":
                depth -= 1
                if depth == 0:
                    return self.toks[j + 1][1] in ("=", "!=") if j + 1 < len(self.toks) else False
            elif depth == 1 and v in ("&", "\\/"):
                return False
            elif depth == 1 and v in ("*", "+"):
                return True
            j += 1
        return False

    def _numeq(self, left):
        op = self.take()[1]
        if op not in ("=", "!="):
            raise SOParseError(f"expected '=' or '!=', found {op!r}")
        return NumEq(left, self.term(), op == "!=")

    def arglist(self) -> tuple[str, ...]:
        self.take("(")
        args = []
        while self.peek()[1] != ")":
            args.append(self.take()[1])
            if self.peek()[1] == ",":
                self.take()
        self.take(")")
        return tuple(args)

    def term(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return Num(Fraction(val))
        if val == "SUM":
            self.take()
            self.take("[")
            vs = []
            while self.peek()[1] != "]":
                vs.append(self.take()[1])
            self.take("]")
            return Sum(tuple(vs), self.term())
        if val == "log":
            self.take()
            self.take("(")
            t = self.term()
            self.take(")")
            return Log(t)
        if val == "(":
            self.take()
            left = self.term()
            op = self.take()[1]
            right = self.term()
            self.take(")")
            if op == "*":
                return Times(left, right)
            if op == "+":
                return Plus(left, right)
            raise SOParseError(f"unknown operator {op!r}")
        if kind == "name":
            self.take()
            return FApp(val, self.arglist())
        raise SOParseError(f"unexpected token {val!r}")


def parse_so(text: str):
    p = _SOParser(text)
    phi = p.formula()
    if p.i != len(p.toks):
        raise SOParseError(f"trailing input: {p.peek()[1]!r}")
    return phi
