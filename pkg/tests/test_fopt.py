import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptl import gen
from ptl.core import Structure, UnboundVariable, WeightedTeam, restrict, scale, unit_team
from ptl.fopt import check_sentence_fopt, eval_fo, eval_fopt, fo_as_fopt
from ptl.syntax import DialectError, Exists1, Forall1, free_vars, parse, star_translate

seeds = st.integers(min_value=0, max_value=10**9)
POOL = ("x", "y")


def _setup(seed, rows=None):
    rng = random.Random(seed)
    A = gen.random_structure(rng)
    phi = gen.random_fopt(rng, POOL, 4)
    X = gen.random_team(rng, A, POOL + ("z",), max_rows=rows or 12, max_den=8)
    return rng, A, X, phi


@pytest.fixture
def two():
    return Structure(("a", "b"), {"R": (1, [("a",)])}, {"a": "a", "b": "b"})


class TestExamples:
    def test_dot_negation_on_empty_team(self, two):
        E = WeightedTeam(("x",), [], two.domain)
        for text in ["not x = x", "not cmp(x=x | x=x <= x=x | x=x)", "not R(x)"]:
            assert eval_fopt(two, E, parse(text))

    def test_reflexive_comparison(self, two):
        X = WeightedTeam(("x",), [(("a",), F(1, 5)), (("b",), F(3))])
        assert eval_fopt(two, X, parse("cmp(R(x) | x = @b <= R(x) | x = @b)"))

    def test_hand_weights(self, two):
        X = WeightedTeam(("x",), [(("a",), F(1, 3)), (("b",), F(2, 3))])
        assert eval_fopt(two, X, parse("cmp(x = @a | x = x <= x = @b | x = x)"))
        assert not eval_fopt(two, X, parse("cmp(x = @b | x = x <= x = @a | x = x)"))

    def test_trace(self, two):
        X = WeightedTeam(("x",), [(("a",), F(1, 3)), (("b",), F(2, 3))])
        v = eval_fopt(two, X, parse("cmp(x = @a | x = x <= x = @b | x = x)"), trace_depth=3)
        assert v.trace.weights == (F(1, 3), 1, F(2, 3), 1)

    def test_rejects_team_atoms(self, two):
        with pytest.raises(DialectError):
            eval_fopt(two, unit_team(two.domain), parse("dep(x ; x)"))

    def test_unbound(self, two):
        with pytest.raises(UnboundVariable):
            eval_fopt(two, unit_team(two.domain), parse("cmp(x=x | x=x <= x=x | x=x)"))


class TestEvalFO:
    def test_basics(self, two):
        assert eval_fo(two, {"x": "b"}, parse("x = x"))
        assert not eval_fo(two, {"x": "b"}, parse("R(x)"))
        assert eval_fo(two, {}, parse("forall y. exists x. x = y"))

    def test_unbound(self, two):
        with pytest.raises(UnboundVariable):
            eval_fo(two, {}, parse("R(x)"))


class TestSentences:
    def test_examples(self, two):
        assert check_sentence_fopt(two, parse("E1 x. R(x)"))
        assert not check_sentence_fopt(two, parse("A1 x. not R(x)"))

    def test_open_formula(self, two):
        with pytest.raises(UnboundVariable):
            check_sentence_fopt(two, parse("R(x)"))

    @given(seeds)
    def test_both_routes(self, seed):
        rng = random.Random(seed)
        A = gen.random_structure(rng)
        phi = gen.random_fopt(rng, (), 5)
        assert check_sentence_fopt(A, phi) == eval_fopt(A, unit_team(A.domain), phi).value


class TestProperties:
    @given(seeds, st.fractions(min_value=F(1, 20), max_value=20, max_denominator=20))
    def test_singleton_support(self, seed, w):
        rng = random.Random(seed)
        A = gen.random_structure(rng)
        phi = gen.random_fopt(rng, POOL, 5)
        s = {v: rng.choice(A.domain) for v in POOL}
        X = WeightedTeam(POOL, [((s["x"], s["y"]), w)], A.domain)
        assert eval_fopt(A, X, phi).value == eval_fo(A, s, star_translate(phi))

    @given(seeds)
    def test_locality(self, seed):
        _, A, X, phi = _setup(seed)
        assert eval_fopt(A, X, phi).value == eval_fopt(A, restrict(X, free_vars(phi)), phi).value

    @given(seeds, st.fractions(min_value=F(1, 10), max_value=10, max_denominator=10))
    def test_scale_invariance(self, seed, c):
        _, A, X, phi = _setup(seed)
        assert eval_fopt(A, scale(X, c), phi).value == eval_fopt(A, X, phi).value

    @given(seeds)
    def test_one_point_quantifiers_commute(self, seed):
        _, A, X, phi = _setup(seed)
        for q in (Exists1, Forall1):
            a = eval_fopt(A, X, q("u", q("w", phi)))
            b = eval_fopt(A, X, q("w", q("u", phi)))
            assert a.value == b.value

    @given(seeds)
    def test_fo_as_fopt_on_unit_team(self, seed):
        rng = random.Random(seed)
        A = gen.random_structure(rng)
        psi = gen.random_fo(rng, (), 4)
        assert eval_fopt(A, unit_team(A.domain), fo_as_fopt(psi)).value == eval_fo(A, {}, psi)
