"""Formula AST, concrete grammar, printer and syntactic analyses.

Concrete syntax::

    exists x y. phi   forall x. phi   E1 x. phi   A1 x. phi
    phi & psi                      conjunction (binds tighter than the ors)
    phi \\/ psi                     split (team) disjunction
    phi || psi                     global disjunction (FOPT)
    ~phi   not phi                 Boolean negation / dot negation (FOPT)
    !R(x)  !(delta)                classical negation of a literal / condition
    R(x, @c)   x = y   x != y      literals; ``@name`` denotes a structure constant
    indep(xs ; ys ; zs)            ys independent of zs given xs (xs may be empty)
    dep(xs ; ys)  marg(xs ; ys)  entropy(xs ; ys)
    cmp(d0 | d1 <= d2 | d3)        conditional probability comparison

Variable lists inside atoms are space separated.  ``#`` starts a line comment.
"""
from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


class DialectError(ValueError):
    pass


class MixedDialect(DialectError):
    pass


# ---------------------------------------------------------------- AST


@dataclass(frozen=True)
class Formula:
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False, kw_only=True)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Rel(Formula):
    name: str
    args: tuple[str, ...]
    negated: bool = False


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str
    negated: bool = False


@dataclass(frozen=True)
class Neg(Formula):
    """Classical negation of a first-order formula."""
    body: Formula


@dataclass(frozen=True)
class Indep(Formula):
    cond: tuple[str, ...]
    left: tuple[str, ...]
    right: tuple[str, ...]


@dataclass(frozen=True)
class Dep(Formula):
    lhs: tuple[str, ...]
    rhs: tuple[str, ...]


@dataclass(frozen=True)
class Marg(Formula):
    lhs: tuple[str, ...]
    rhs: tuple[str, ...]


@dataclass(frozen=True)
class EntropyEq(Formula):
    lhs: tuple[str, ...]
    rhs: tuple[str, ...]


@dataclass(frozen=True)
class Cmp(Formula):
    d0: Formula
    d1: Formula
    d2: Formula
    d3: Formula


@dataclass(frozen=True)
class BoolNeg(Formula):
    body: Formula


@dataclass(frozen=True)
class DotNeg(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class SplitOr(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class GlobalOr(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists1(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall1(Formula):
    var: str
    body: Formula


LITERALS = (Rel, Eq)
TEAM_ATOMS = (Indep, Dep, Marg, EntropyEq)
ATOMS = LITERALS + TEAM_ATOMS
BINARY = (And, SplitOr, GlobalOr)
QUANTIFIERS = (Exists, Forall, Exists1, Forall1)
UNARY = (Neg, BoolNeg, DotNeg)


def is_const(term: str) -> bool:
    return term.startswith("@")


def const_name(term: str) -> str:
    return term[1:]


def children(phi: Formula) -> tuple[Formula, ...]:
    if isinstance(phi, BINARY):
        return (phi.left, phi.right)
    if isinstance(phi, UNARY) or isinstance(phi, QUANTIFIERS):
        return (phi.body,)
    if isinstance(phi, Cmp):
        return (phi.d0, phi.d1, phi.d2, phi.d3)
    return ()


def with_children(phi: Formula, kids: tuple[Formula, ...]) -> Formula:
    if isinstance(phi, BINARY):
        return replace(phi, left=kids[0], right=kids[1])
    if isinstance(phi, UNARY) or isinstance(phi, QUANTIFIERS):
        return replace(phi, body=kids[0])
    if isinstance(phi, Cmp):
        return replace(phi, d0=kids[0], d1=kids[1], d2=kids[2], d3=kids[3])
    return phi


def transform(phi: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    """Bottom-up rewrite: children first, then ``fn`` on the rebuilt node."""
    kids = children(phi)
    if kids:
        phi = with_children(phi, tuple(transform(k, fn) for k in kids))
    return fn(phi)


def walk(phi: Formula) -> Iterator[Formula]:
    yield phi
    for k in children(phi):
        yield from walk(k)


def subformula_at(phi: Formula, path: str) -> Formula:
    for step in path.split(".") if path else ():
        phi = children(phi)[int(step)]
    return phi


def child_path(path: str, i: int) -> str:
    return f"{path}.{i}" if path else str(i)


# ---------------------------------------------------------------- analyses


def atom_vars(phi: Formula) -> tuple[str, ...]:
    """Variables occurring in an atom, in order of first occurrence."""
    if isinstance(phi, Rel):
        seq: Iterable[str] = phi.args
    elif isinstance(phi, Eq):
        seq = (phi.left, phi.right)
    elif isinstance(phi, Indep):
        seq = phi.cond + phi.left + phi.right
    elif isinstance(phi, (Dep, Marg, EntropyEq)):
        seq = phi.lhs + phi.rhs
    else:
        raise TypeError(f"not an atom: {type(phi).__name__}")
    return tuple(dict.fromkeys(v for v in seq if not is_const(v)))


def free_vars(phi: Formula) -> frozenset[str]:
    if isinstance(phi, ATOMS):
        return frozenset(atom_vars(phi))
    if isinstance(phi, QUANTIFIERS):
        return free_vars(phi.body) - {phi.var}
    out: frozenset[str] = frozenset()
    for k in children(phi):
        out |= free_vars(k)
    return out


def all_vars(phi: Formula) -> frozenset[str]:
    out = set()
    for node in walk(phi):
        if isinstance(node, ATOMS):
            out.update(atom_vars(node))
        elif isinstance(node, QUANTIFIERS):
            out.add(node.var)
    return frozenset(out)


def constants_used(phi: Formula) -> frozenset[str]:
    out = set()
    for node in walk(phi):
        if isinstance(node, Rel):
            out.update(const_name(a) for a in node.args if is_const(a))
        elif isinstance(node, Eq):
            out.update(const_name(a) for a in (node.left, node.right) if is_const(a))
    return frozenset(out)


def is_condition(phi: Formula) -> bool:
    """Quantifier- and disjunction-free first-order formula (literals, !, &)."""
    if isinstance(phi, LITERALS):
        return True
    if isinstance(phi, Neg):
        return is_condition(phi.body)
    if isinstance(phi, And):
        return is_condition(phi.left) and is_condition(phi.right)
    return False


def is_fo(phi: Formula) -> bool:
    """Classical first-order formula (no team atoms, no team-level negations)."""
    if isinstance(phi, LITERALS):
        return True
    if isinstance(phi, (Neg, Exists, Forall)):
        return is_fo(phi.body)
    if isinstance(phi, (And, SplitOr)):
        return is_fo(phi.left) and is_fo(phi.right)
    return False


def is_search_free(phi: Formula) -> bool:
    """No split disjunction and no probabilistic existential (outside FO subformulas
    written with classical negation, which are pushed to literals first)."""
    return not any(isinstance(n, (SplitOr, Exists)) for n in walk(phi))


def has_boolneg(phi: Formula) -> bool:
    return any(isinstance(n, BoolNeg) for n in walk(phi))


class Dialect(enum.Enum):
    FO = "FO"
    FO_ATOMS = "FO_ATOMS"
    FO_ATOMS_NEG = "FO_ATOMS_NEG"
    FOPT = "FOPT"


_FOPT_ONLY = (Cmp, DotNeg, GlobalOr, Exists1, Forall1)
_TEAM_ONLY = TEAM_ATOMS + (BoolNeg, SplitOr, Exists, Forall)


def _check_neg(phi: Formula) -> None:
    for node in walk(phi):
        if isinstance(node, Neg) and not is_fo(node.body):
            raise DialectError(f"classical negation over a non first-order formula: {node}")


def dialect_of(phi: Formula) -> Dialect:
    nodes = list(walk(phi))
    fopt = [n for n in nodes if isinstance(n, _FOPT_ONLY)]
    team = [n for n in nodes if isinstance(n, _TEAM_ONLY)]
    if fopt and team:
        raise MixedDialect(
            f"{type(fopt[0]).__name__} (FOPT) and {type(team[0]).__name__} (team logic) in one formula")
    _check_neg(phi)
    if fopt:
        for n in nodes:
            if isinstance(n, Neg) and not is_condition(n.body):
                raise MixedDialect("FOPT admits ! only over conditions")
        return Dialect.FOPT
    if any(isinstance(n, BoolNeg) for n in nodes):
        return Dialect.FO_ATOMS_NEG
    if any(isinstance(n, TEAM_ATOMS) for n in nodes):
        return Dialect.FO_ATOMS
    return Dialect.FO


def is_fopt(phi: Formula) -> bool:
    """Admissible in FOPT: FOPT constructs, conditions and conjunctions only."""
    if is_condition(phi):
        return True
    if isinstance(phi, Cmp):
        return True
    if isinstance(phi, (DotNeg, Exists1, Forall1)):
        return is_fopt(phi.body)
    if isinstance(phi, (And, GlobalOr)):
        return is_fopt(phi.left) and is_fopt(phi.right)
    return False


# ---------------------------------------------------------------- rewrites


def negate_literal(phi: Formula) -> Formula:
    return replace(phi, negated=not phi.negated)


def neg(phi: Formula) -> Formula:
    """Classical negation, absorbed into literals where possible."""
    if isinstance(phi, LITERALS):
        return negate_literal(phi)
    if isinstance(phi, Neg):
        return phi.body
    return Neg(phi)


def push_neg(phi: Formula) -> Formula:
    """The dual of a classical FO formula with negation pushed to the literals."""
    if isinstance(phi, LITERALS):
        return negate_literal(phi)
    if isinstance(phi, Neg):
        return nnf(phi.body)
    if isinstance(phi, And):
        return SplitOr(push_neg(phi.left), push_neg(phi.right))
    if isinstance(phi, SplitOr):
        return And(push_neg(phi.left), push_neg(phi.right))
    if isinstance(phi, Exists):
        return Forall(phi.var, push_neg(phi.body))
    if isinstance(phi, Forall):
        return Exists(phi.var, push_neg(phi.body))
    raise DialectError(f"cannot push classical negation through {type(phi).__name__}")


def nnf(phi: Formula) -> Formula:
    """Eliminate every classical ``Neg`` node by pushing it onto literals."""
    if isinstance(phi, Neg):
        return push_neg(phi.body)
    kids = children(phi)
    if not kids:
        return phi
    return with_children(phi, tuple(nnf(k) for k in kids))


def star_translate(phi: Formula) -> Formula:
    """Classical FO counterpart of an FOPT formula."""
    if not is_fopt(phi):
        raise DialectError(f"not an FOPT formula: {phi}")
    return _star(phi)


def _star(phi: Formula) -> Formula:
    if isinstance(phi, Cmp):
        return SplitOr(SplitOr(SplitOr(neg(phi.d0), neg(phi.d1)), phi.d2), neg(phi.d3))
    if isinstance(phi, DotNeg):
        return neg(_star(phi.body))
    if isinstance(phi, GlobalOr):
        return SplitOr(_star(phi.left), _star(phi.right))
    if isinstance(phi, And):
        return And(_star(phi.left), _star(phi.right))
    if isinstance(phi, Exists1):
        return Exists(phi.var, _star(phi.body))
    if isinstance(phi, Forall1):
        return Forall(phi.var, _star(phi.body))
    return phi


def fresh_names(avoid: Iterable[str], base: str) -> Iterator[str]:
    taken = set(avoid)
    for i in itertools.count():
        name = f"{base}{i}" if i else base
        if name not in taken:
            taken.add(name)
            yield name


def _rename_atom(phi: Formula, m: dict[str, str]) -> Formula:
    r = lambda t: m.get(t, t)  # noqa: E731
    rt = lambda ts: tuple(r(t) for t in ts)  # noqa: E731
    if isinstance(phi, Rel):
        return replace(phi, args=rt(phi.args))
    if isinstance(phi, Eq):
        return replace(phi, left=r(phi.left), right=r(phi.right))
    if isinstance(phi, Indep):
        return replace(phi, cond=rt(phi.cond), left=rt(phi.left), right=rt(phi.right))
    return replace(phi, lhs=rt(phi.lhs), rhs=rt(phi.rhs))


def rename_free(phi: Formula, m: dict[str, str]) -> Formula:
    if not m:
        return phi
    if isinstance(phi, ATOMS):
        return _rename_atom(phi, m)
    if isinstance(phi, QUANTIFIERS):
        inner = {k: v for k, v in m.items() if k != phi.var}
        return replace(phi, body=rename_free(phi.body, inner))
    return with_children(phi, tuple(rename_free(k, m) for k in children(phi)))


def alpha_rename(phi: Formula, avoid: Iterable[str] = ()) -> Formula:
    """Rename bound variables apart from each other, from the free variables of
    ``phi`` and from ``avoid``."""
    taken = set(avoid) | set(free_vars(phi))

    def go(f: Formula) -> Formula:
        if isinstance(f, QUANTIFIERS):
            if f.var in taken:
                new = next(fresh_names(taken | all_vars(f), f.var))
                body = rename_free(f.body, {f.var: new})
            else:
                new, body = f.var, f.body
            taken.add(new)
            return replace(f, var=new, body=go(body))
        kids = children(f)
        return with_children(f, tuple(go(k) for k in kids)) if kids else f

    return go(phi)


# ---------------------------------------------------------------- printer

_PREC = {And: 2, SplitOr: 1, GlobalOr: 1}
_BINOP = {And: "&", SplitOr: "\\/", GlobalOr: "||"}
_QUANT = {Exists: "exists", Forall: "forall", Exists1: "E1", Forall1: "A1"}


def _vs(vs: tuple[str, ...]) -> str:
    return " ".join(vs)


def _open_ended(phi: Formula) -> bool:
    if isinstance(phi, QUANTIFIERS):
        return True
    if isinstance(phi, (BoolNeg, DotNeg)):
        return _open_ended(phi.body)
    return False


def to_text(phi: Formula) -> str:
    if isinstance(phi, Rel):
        s = f"{phi.name}({', '.join(phi.args)})"
        return "!" + s if phi.negated else s
    if isinstance(phi, Eq):
        return f"{phi.left} {'!=' if phi.negated else '='} {phi.right}"
    if isinstance(phi, Indep):
        return f"indep({_vs(phi.cond)} ; {_vs(phi.left)} ; {_vs(phi.right)})".replace("( ;", "(;")
    if isinstance(phi, Dep):
        return f"dep({_vs(phi.lhs)} ; {_vs(phi.rhs)})"
    if isinstance(phi, Marg):
        return f"marg({_vs(phi.lhs)} ; {_vs(phi.rhs)})"
    if isinstance(phi, EntropyEq):
        return f"entropy({_vs(phi.lhs)} ; {_vs(phi.rhs)})"
    if isinstance(phi, Cmp):
        d = [to_text(x) for x in (phi.d0, phi.d1, phi.d2, phi.d3)]
        return f"cmp({d[0]} | {d[1]} <= {d[2]} | {d[3]})"
    if isinstance(phi, Neg):
        return f"!({to_text(phi.body)})"
    if isinstance(phi, (BoolNeg, DotNeg)):
        op = "~" if isinstance(phi, BoolNeg) else "not "
        inner = to_text(phi.body)
        if isinstance(phi.body, BINARY):
            inner = f"({inner})"
        return op + inner
    if isinstance(phi, QUANTIFIERS):
        return f"{_QUANT[type(phi)]} {phi.var}. {to_text(phi.body)}"
    if isinstance(phi, BINARY):
        p = _PREC[type(phi)]
        left, right = to_text(phi.left), to_text(phi.right)
        if _open_ended(phi.left) or (isinstance(phi.left, BINARY) and _PREC[type(phi.left)] < p):
            left = f"({left})"
        if _open_ended(phi.right) or (isinstance(phi.right, BINARY) and _PREC[type(phi.right)] <= p):
            right = f"({right})"
        return f"{left} {_BINOP[type(phi)]} {right}"
    raise TypeError(type(phi).__name__)


# ---------------------------------------------------------------- parser

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<op>\\/|\|\||!=|<=|[()\[\];,.|&~!=])
  | (?P<name>@?[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)

_KEYWORDS = {"exists", "forall", "E1", "A1", "not", "indep", "dep", "marg", "entropy", "cmp"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[_Tok]:
    toks = []
    i, line, line_start = 0, 1, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), line, i - line_start + 1))
        for j, ch in enumerate(m.group()):
            if ch == "\n":
                line, line_start = line + 1, i + j + 1
        i = m.end()
    toks.append(_Tok("eof", "", line, i - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        tok = self.tok
        if not self.accept(text):
            raise self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return tok

    def name(self, what: str = "variable", const_ok: bool = False) -> str:
        tok = self.tok
        if tok.kind != "name" or tok.text in _KEYWORDS or (is_const(tok.text) and not const_ok):
            raise self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok.text

    def formula(self) -> Formula:
        left = self.conj()
        while self.tok.text in ("\\/", "||"):
            tok = self.tok
            self.i += 1
            right = self.conj()
            cls = SplitOr if tok.text == "\\/" else GlobalOr
            left = cls(left, right, pos=(tok.line, tok.col))
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.tok.text == "&":
            tok = self.tok
            self.i += 1
            left = And(left, self.unary(), pos=(tok.line, tok.col))
        return left

    def unary(self) -> Formula:
        tok = self.tok
        pos = (tok.line, tok.col)
        if self.accept("~"):
            return BoolNeg(self.unary(), pos=pos)
        if tok.kind == "name" and tok.text == "not":
            self.i += 1
            return DotNeg(self.unary(), pos=pos)
        if self.accept("!"):
            if self.tok.text == "(":
                self.i += 1
                body = self.formula()
                self.expect(")")
                return Neg(body, pos=pos)
            atom = self.atom()
            if not isinstance(atom, Rel):
                raise self.error("'!' applies to relation atoms or parenthesised formulas", tok)
            return replace(atom, negated=not atom.negated, pos=pos)
        if tok.kind == "name" and tok.text in ("exists", "forall", "E1", "A1"):
            self.i += 1
            vs = [self.name()]
            while self.tok.text != ".":
                vs.append(self.name())
            self.expect(".")
            body = self.formula()
            cls = {"exists": Exists, "forall": Forall, "E1": Exists1, "A1": Forall1}[tok.text]
            for v in reversed(vs):
                body = cls(v, body, pos=pos)
            return body
        if self.accept("("):
            phi = self.formula()
            self.expect(")")
            return phi
        return self.atom()

    def varlist(self, stops: tuple[str, ...]) -> tuple[str, ...]:
        vs = []
        while self.tok.text not in stops:
            vs.append(self.name())
        return tuple(vs)

    def atom(self) -> Formula:
        tok = self.tok
        pos = (tok.line, tok.col)
        if tok.kind != "name":
            raise self.error(f"expected a formula, found {tok.text or 'end of input'!r}")
        kw = tok.text
        if kw == "indep":
            self.i += 1
            self.expect("(")
            xs = self.varlist((";",))
            self.expect(";")
            ys = self.varlist((";",))
            self.expect(";")
            zs = self.varlist((")",))
            self.expect(")")
            if not ys or not zs:
                raise ParseError("indep needs nonempty independent tuples", *pos)
            return Indep(xs, ys, zs, pos=pos)
        if kw in ("dep", "marg", "entropy"):
            self.i += 1
            self.expect("(")
            xs = self.varlist((";",))
            self.expect(";")
            ys = self.varlist((")",))
            self.expect(")")
            if not xs or not ys:
                raise ParseError(f"{kw} needs nonempty tuples", *pos)
            if kw == "marg" and len(xs) != len(ys):
                raise ParseError(f"marg arity mismatch: {len(xs)} vs {len(ys)}", *pos)
            return {"dep": Dep, "marg": Marg, "entropy": EntropyEq}[kw](xs, ys, pos=pos)
        if kw == "cmp":
            self.i += 1
            self.expect("(")
            ds = [self.formula()]
            self.expect("|")
            ds.append(self.formula())
            self.expect("<=")
            ds.append(self.formula())
            self.expect("|")
            ds.append(self.formula())
            self.expect(")")
            for d in ds:
                if not is_condition(d):
                    raise ParseError(f"cmp arguments must be quantifier- and disjunction-free: {d}", *pos)
            return Cmp(*ds, pos=pos)
        if self.peek().text == "(" and not is_const(kw):
            name = self.name("relation symbol")
            self.expect("(")
            args = []
            if self.tok.text != ")":
                args.append(self.name("term", const_ok=True))
                while self.accept(","):
                    args.append(self.name("term", const_ok=True))
            self.expect(")")
            return Rel(name, tuple(args), pos=pos)
        left = self.name("term", const_ok=True)
        op = self.tok
        if op.text not in ("=", "!="):
            raise self.error("expected '=' or '!='")
        self.i += 1
        right = self.name("term", const_ok=True)
        return Eq(left, right, op.text == "!=", pos=pos)


def parse(text: str) -> Formula:
    p = _Parser(text)
    phi = p.formula()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return phi


def parse_file(path) -> Formula:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def strip_pos(phi: Formula) -> Formula:
    """Copy without source positions (positions never affect equality)."""
    return transform(phi, lambda f: replace(f, pos=None))

