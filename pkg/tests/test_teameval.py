import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptl import gen
from ptl.core import Structure, WeightedTeam, restrict, unit_team
from ptl.fopt import eval_fo
from ptl.syntax import DialectError, free_vars, parse
from ptl.teameval import (NonDistribution, Overflow, SearchRequired, ShapeMismatch, SplitMismatch,
                          WitnessInsufficient, check_witness, eval_bounded, eval_exact, find_witness,
                          grid_distributions)

seeds = st.integers(min_value=0, max_value=10**9)
POOL = ("x", "y")


@pytest.fixture
def A():
    return Structure(("a", "b"), {"P": (1, [("a",)]), "R": (2, [("a", "a"), ("b", "b")])},
                     {"zero": "a", "one": "b"})


@pytest.fixture
def corr():
    return WeightedTeam(("x", "y"), [(("a", "a"), F(1, 2)), (("b", "b"), F(1, 2))])


@pytest.fixture
def third():
    return WeightedTeam(("x",), [(("a",), F(1, 3)), (("b",), F(2, 3))])


def _lcm_den(X):
    return math.lcm(*(w.denominator for _, w in X.rows)) if X.rows else 1


class TestExact:
    def test_negated_independence(self, A, corr):
        assert eval_exact(A, corr, parse("~ indep(; x ; y)"))

    def test_universal_marg(self, A, corr):
        assert eval_exact(A, corr, parse("forall z. marg(x ; x)"))

    def test_literals(self, A, corr):
        assert eval_exact(A, corr, parse("R(x, y) & x = y"))
        assert not eval_exact(A, corr, parse("R(x, y) & P(x)"))

    def test_search_required(self, A, corr):
        with pytest.raises(SearchRequired):
            eval_exact(A, corr, parse("dep(x ; y) \\/ dep(y ; x)"))
        with pytest.raises(SearchRequired):
            eval_exact(A, corr, parse("exists z. dep(x ; z)"))

    def test_split_inside_fo_is_flat(self, A, corr):
        assert eval_exact(A, corr, parse("P(x) \\/ !P(x)"))

    def test_rejects_fopt(self, A, corr):
        with pytest.raises(DialectError):
            eval_exact(A, corr, parse("cmp(x=x | x=x <= x=x | x=x)"))


class TestBounded:
    def test_grid(self):
        g = grid_distributions(2, 2)
        assert set(g) == {(1, 0), (0, 1), (F(1, 2), F(1, 2))}
        assert all(sum(d) == 1 for d in grid_distributions(3, 4))
        assert len(grid_distributions(3, 4)) == math.comb(6, 2)

    def test_indep_or_itself(self, A):
        X = WeightedTeam(("x", "y"), [((a, b), F(1, 4)) for a in "ab" for b in "ab"])
        assert eval_exact(A, X, parse("indep(; x ; y)"))
        for D in (1, 2, 3):
            assert eval_bounded(A, X, parse("indep(;x;y) \\/ indep(;x;y)"), D)

    def test_exists_copy(self, A, third):
        phi = parse("exists y. marg(x ; y)")
        assert eval_bounded(A, third, phi, _lcm_den(third))

    def test_split_needs_search(self, A, corr):
        # each row alone is a singleton team, where independence is trivial
        assert not eval_exact(A, corr, parse("indep(; x ; y)"))
        assert eval_bounded(A, corr, parse("indep(;x;y) \\/ indep(;x;y)"), 2)

    def test_negated_split(self, A, corr):
        assert not eval_bounded(A, corr, parse("~ (indep(;x;y) \\/ indep(;x;y))"), 2)

    def test_overflow(self, A, corr):
        phi = parse("exists z. exists w. (dep(z ; w) \\/ dep(w ; x)) & ~ dep(z ; x)")
        with pytest.raises(Overflow):
            eval_bounded(A, corr, phi, 6, budget=5)

    def test_bad_denominator(self, A, corr):
        with pytest.raises(ValueError):
            eval_bounded(A, corr, parse("dep(x ; y)"), 0)


class TestWitness:
    def test_split_k_one(self, A, corr):
        phi = parse("indep(x ; y ; y) \\/ dep(y ; x)")
        w = {"": {"k": "1", "yw": ["1/2", "1/2"], "zw": ["0", "0"]}}
        assert check_witness(A, corr, phi, w)

    def test_found_witness_checks(self, A, third):
        phi = parse("P(x) \\/ !P(x) & dep(x ; x)")
        w = find_witness(A, third, phi, 3)
        assert check_witness(A, third, phi, w)

    def test_non_distribution(self, A, third):
        phi = parse("exists y. marg(x ; y)")
        w = {"": {"F": {"0": {"a": "9/10"}, "1": {"b": "1"}}}}
        with pytest.raises(NonDistribution):
            check_witness(A, third, phi, w)

    def test_tampered_split(self, A, corr):
        phi = parse("indep(;x;y) \\/ indep(;x;y)")
        w = find_witness(A, corr, phi, 2)
        assert check_witness(A, corr, phi, w)
        e = w[""]
        yw = [F(v) for v in e["yw"]]
        i = yw.index(max(yw))
        yw[i] -= F(1, 100)
        yw[1 - i] += F(1, 100)
        bad = [str(v) for v in yw]
        with pytest.raises(SplitMismatch):
            check_witness(A, corr, phi, {"": dict(e, yw=bad)})

    def test_missing_entry(self, A, third):
        with pytest.raises(ShapeMismatch):
            check_witness(A, third, parse("exists y. marg(x ; y)"), {})

    def test_negation_over_search(self, A, third):
        with pytest.raises(WitnessInsufficient):
            check_witness(A, third, parse("~ exists y. marg(x ; y)"), {})

    @given(seeds)
    def test_witness_implies_bounded(self, seed):
        rng = random.Random(seed)
        S = gen.random_structure(rng, max_size=2)
        phi = gen.random_team_formula(rng, ("x",), 2, ("indep", "marg", "dep"))
        X = gen.random_team(rng, S, ("x",), max_den=3, normalize=True)
        w = find_witness(S, X, phi, 2, budget=200_000)
        if w is not None:
            assert check_witness(S, X, phi, w)
            assert eval_bounded(S, X, phi, 4, budget=2_000_000)


class TestProperties:
    @given(seeds)
    def test_exact_locality(self, seed):
        rng = random.Random(seed)
        S = gen.random_structure(rng, max_size=3)
        phi = gen.random_team_formula(rng, POOL, 3, ("indep", "marg", "dep"), boolneg=True,
                                      quantifiers=False)
        X = gen.random_team(rng, S, POOL + ("z",), max_rows=10, max_den=6, normalize=True)
        try:
            v = eval_exact(S, X, phi)
        except SearchRequired:
            return
        assert eval_exact(S, restrict(X, free_vars(phi)), phi) == v

    @given(seeds)
    def test_bounded_is_exact_without_search(self, seed):
        rng = random.Random(seed)
        S = gen.random_structure(rng, max_size=3)
        phi = gen.random_team_formula(rng, POOL, 3, ("indep", "marg", "dep"), boolneg=True,
                                      quantifiers=False)
        X = gen.random_team(rng, S, POOL, max_rows=6, max_den=6, normalize=True)
        try:
            v = eval_exact(S, X, phi)
        except SearchRequired:
            return
        for D in (1, 2):
            assert eval_bounded(S, X, phi, D) == v

    @given(seeds)
    def test_monotone_in_grid(self, seed):
        rng = random.Random(seed)
        S = gen.random_structure(rng, max_size=2)
        phi = gen.random_team_formula(rng, ("x",), 2, ("indep", "marg", "dep"))
        X = gen.random_team(rng, S, ("x",), max_den=4, normalize=True)
        if eval_bounded(S, X, phi, 2, budget=500_000):
            assert eval_bounded(S, X, phi, 4, budget=5_000_000)

    @given(seeds)
    def test_fo_sentences_agree(self, seed):
        rng = random.Random(seed)
        S = gen.random_structure(rng, max_size=3)
        psi = gen.random_fo(rng, (), 3)
        expect = eval_fo(S, {}, psi)
        U = unit_team(S.domain)
        for D in (1, 2):
            assert eval_bounded(S, U, psi, D, flat_fo=False, budget=2_000_000) == expect
