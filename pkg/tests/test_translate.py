import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptl import gen
from ptl.atoms import eval_atom
from ptl.core import Structure, TeamError, WeightedTeam, restrict, unit_team
from ptl.syntax import BoolNeg, Indep, free_vars, parse
from ptl.translate import (FApp, FunctionQuantifierUnsupported, FunctionTable, Num, NumEq, SForall,
                           SOParseError, Sum, TranslationError, eval_so, free_functions,
                           normalize_indep, parse_so, so_to_text, team_to_table, thm3_translate)

seeds = st.integers(min_value=0, max_value=10**9)


@pytest.fixture
def A():
    return Structure(("a", "b", "c"), {"P": (1, [("a",)]), "R": (2, [("a", "b")])},
                     {"zero": "a", "one": "b"})


def _atom_instance(seed):
    """Random team and independence atom whose free variables are exactly the team's."""
    rng = random.Random(seed)
    S = gen.random_structure(rng, max_size=3)
    pool = ("x", "y", "z")
    while True:
        a = gen.random_team_atom(rng, pool, ("indep",))
        try:
            normalize_indep(a)
            break
        except TranslationError:
            continue
    vs = tuple(sorted(free_vars(a)))
    if rng.random() < 0.5 and not a.cond and not set(a.left) & set(a.right):
        X = gen.product_team(rng, S, a.left, a.right)
        X = restrict(X, vs).normalize()
    else:
        X = gen.random_team(rng, S, vs, max_rows=8, max_den=6, normalize=True)
    return S, X, a


class TestCases:
    def test_literal(self):
        assert so_to_text(thm3_translate(parse("R(x)"))) == "forall x. (f(x) = 0 \\/ R(x))"

    def test_negated_literal(self):
        assert so_to_text(thm3_translate(parse("~ R(x)"))) == "exists x. (f(x) != 0 & !R(x))"

    def test_conditional_independence(self):
        out = so_to_text(thm3_translate(parse("indep(z ; x ; y)")))
        assert out == ("forall z. forall x. forall y. (SUM[y] f(x, y, z) * SUM[x] f(x, y, z)) = "
                       "(SUM[] f(x, y, z) * SUM[x y] f(x, y, z))")

    def test_self_independence(self):
        out = so_to_text(thm3_translate(parse("indep(z ; y ; y)")))
        assert out == "forall z. forall y. (SUM[] f(y, z) = 0 \\/ SUM[] f(y, z) = SUM[y] f(y, z))"

    def test_split_introduces_four_functions(self):
        out = so_to_text(thm3_translate(parse("indep(; x ; y) \\/ P(x)")))
        assert "Eg#1:1. Eg#2:2. Eg#3:2. Eg#4:3." in out

    @pytest.mark.parametrize("text", [
        "R(x)", "~ R(x)", "indep(; x ; y)", "exists y. indep(; x ; y)",
        "forall y. indep(; x ; y)", "indep(; x ; y) \\/ P(x)", "~ (P(x) & ~ indep(;x;y))",
        "exists x. P(x)",
    ])
    def test_exactly_one_free_function(self, text):
        assert free_functions(thm3_translate(parse(text))) == {"f"}

    def test_deterministic_names(self):
        phi = parse("exists y. (indep(; x ; y) \\/ P(y))")
        assert so_to_text(thm3_translate(phi)) == so_to_text(thm3_translate(phi))

    @pytest.mark.parametrize("text", ["marg(x ; y)", "entropy(x ; y)", "dep(x ; y)"])
    def test_unsupported_atoms(self, text):
        with pytest.raises(TranslationError):
            thm3_translate(parse(text))

    def test_partial_overlap_rejected(self):
        with pytest.raises(TranslationError):
            thm3_translate(parse("indep(; x y ; y z)"))

    def test_normalization(self):
        assert normalize_indep(Indep(("x",), ("x", "y"), ("z", "x"))) == (("x",), ("y",), ("z",))
        assert normalize_indep(Indep((), ("y",), ("y",))) == ((), ("y",), ("y",))


class TestTables:
    def test_unit(self):
        t = team_to_table(unit_team())
        assert t.arity == 0 and t(()) == 1

    def test_transcription(self):
        t = team_to_table(WeightedTeam(("x",), [(("a",), F(1, 3)), (("b",), F(2, 3))]))
        assert (t(("a",)), t(("b",)), t(("c",))) == (F(1, 3), F(2, 3), 0)

    def test_columns_sorted_by_name(self):
        t = team_to_table(WeightedTeam(("y", "x"), [(("a", "b"), 1)]))
        assert t(("b", "a")) == 1 and t(("a", "b")) == 0

    def test_requires_normalized(self):
        with pytest.raises(TeamError):
            team_to_table(WeightedTeam(("x",), [(("a",), F(2))]))

    def test_distribution_flag_checked(self):
        with pytest.raises(ValueError):
            FunctionTable("f", 1, {("a",): F(1, 2)}, True)

    def test_sum_is_one(self, A):
        t = team_to_table(WeightedTeam(("x",), [(("a",), F(1, 3)), (("b",), F(2, 3))]))
        phi = NumEq(Sum(("x",), FApp("f", ("x",))), Num(F(1)))
        assert eval_so(A, [t], phi)

    def test_reflexive(self, A):
        t = team_to_table(WeightedTeam(("x",), [(("a",), 1)]))
        assert eval_so(A, {"f": t}, SForall("x", NumEq(FApp("f", ("x",)), FApp("f", ("x",)))))

    def test_function_quantifier_unsupported(self, A):
        t = team_to_table(unit_team())
        phi = thm3_translate(parse("exists x. P(x)"))
        with pytest.raises(FunctionQuantifierUnsupported):
            eval_so(A, [t], phi)


class TestProperties:
    @given(seeds)
    def test_atomic_adequacy(self, seed):
        S, X, a = _atom_instance(seed)
        f = team_to_table(X)
        assert eval_so(S, [f], thm3_translate(a)) == eval_atom(S, X, a)

    @given(seeds)
    def test_negation_is_complement(self, seed):
        S, X, a = _atom_instance(seed)
        f = team_to_table(X)
        assert eval_so(S, [f], thm3_translate(BoolNeg(a))) != eval_so(S, [f], thm3_translate(a))

    @given(seeds)
    def test_literal_adequacy(self, seed):
        rng = random.Random(seed)
        S = gen.random_structure(rng, max_size=3)
        lit = gen.random_literal(rng, ("x", "y"))
        X = gen.random_team(rng, S, tuple(sorted(free_vars(lit))), max_rows=6, normalize=True)
        expect = eval_atom(S, X, lit)
        assert eval_so(S, [team_to_table(X)], thm3_translate(lit)) == expect

    @given(seeds)
    def test_text_round_trip(self, seed):
        rng = random.Random(seed)
        phi = gen.random_team_formula(rng, ("x",), 3, ("indep",), boolneg=True)
        try:
            so = thm3_translate(phi)
        except TranslationError:
            return
        text = so_to_text(so)
        assert parse_so(text) == so
        assert so_to_text(parse_so(text)) == text


class TestParse:
    def test_sum(self):
        t = parse_so("SUM[y z] (f(x, y) * g(z)) = 1")
        assert isinstance(t, NumEq) and isinstance(t.left, Sum) and t.left.vars == ("y", "z")

    def test_error(self):
        with pytest.raises(SOParseError):
            parse_so("forall x. (f(x) = ")
