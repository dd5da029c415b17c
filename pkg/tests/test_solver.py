import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptl import gen
from ptl.core import Structure, WeightedTeam
from ptl.realc import (Mode, Var, add, atom, compile, conj, constant_verdict, exists, mul, system,
                       witness_to_assignment)
from ptl.solver import NonExistentialSystem, Status, flatten, solve, verify
from ptl.syntax import parse
from ptl.teameval import eval_bounded, find_witness

seeds = st.integers(min_value=0, max_value=10**9)
s, t = Var("s"), Var("t")
ZERO, ONE = F(0), F(1)


def _sys(*parts, vars=("s",)):
    return system(exists(vars, conj(parts)))


@pytest.fixture
def A():
    return Structure(("a", "b"), {"P": (1, [("a",)])}, {"zero": "a", "one": "b"})


class TestExamples:
    def test_forced(self):
        r = solve(_sys(atom("<=", ZERO, s), atom("=", s, ONE)))
        assert r.status is Status.SAT and r.witness == {"s": 1}
        assert r.residual == 0

    def test_infeasible_is_unknown(self):
        r = solve(_sys(atom("<=", ZERO, s), atom("=", add(s, ONE), ZERO)), restarts=4)
        assert r.status is Status.UNKNOWN and r.witness is None

    def test_disequality(self):
        r = solve(_sys(atom("<=", ZERO, s), atom("<=", ZERO, t), atom("=", add(s, t), ONE),
                       atom("=", mul(s, t), F(2, 9)), vars=("s", "t")))
        assert r.status is Status.SAT
        assert sorted(r.witness.values()) == [F(1, 3), F(2, 3)]

    def test_empty_system(self):
        v = verify(system(conj([])), {})
        assert v.ok and v.residual == 0
        assert solve(system(conj([]))).status is Status.SAT

    def test_independence_or_dependence(self, A):
        X = WeightedTeam(("x", "y"), [((a, b), F(1, 4)) for a in "ab" for b in "ab"])
        phi = parse("indep(; x ; y) \\/ dep(x ; y)")
        sys = compile(A, phi, Mode.CHECK, X)
        r = solve(sys, seed=0)
        assert r.status is Status.SAT and verify(sys, r.witness).ok
        assert eval_bounded(A, X, phi, 2)
        grid = witness_to_assignment(A, phi, X, find_witness(A, X, phi, 2))
        assert verify(sys, grid).residual == 0

    def test_full_rejected(self, A):
        with pytest.raises(NonExistentialSystem):
            solve(compile(A, parse("~ dep(x ; x)")))


class TestVerify:
    def test_perturbed_product(self):
        sys = _sys(atom("=", mul(s, t), F(1, 4)), atom("=", s, t), vars=("s", "t"))
        assert verify(sys, {"s": F(1, 2), "t": F(1, 2)}).residual == 0
        v = verify(sys, {"s": F(1, 2) + F(1, 1000), "t": F(1, 2)})
        assert not v.ok
        # |s*t - 1/4| = 1/2000 and |s - t| = 1/1000
        assert v.residual == pytest.approx(1e-3)
        assert len(v.failures) == 2

    def test_missing_variable(self):
        with pytest.raises(KeyError):
            verify(_sys(atom("=", s, ONE)), {})

    def test_log_terms(self, A):
        equal = WeightedTeam(("x", "y"), [(("a", "a"), F(1, 2)), (("b", "b"), F(1, 2))])
        sys = compile(A, parse("entropy(x ; y)"), Mode.CHECK, equal)
        assert constant_verdict(sys) is None
        assert verify(sys, {}).ok
        skewed = WeightedTeam(("x", "y"), [(("a", "a"), F(1, 2)), (("a", "b"), F(1, 2))])
        v = verify(compile(A, parse("entropy(x ; y)"), Mode.CHECK, skewed), {})
        # H(x) = 0 and H(y) = 1 bit
        assert not v.ok and v.residual == pytest.approx(1.0)

    def test_flatten_counts(self):
        names, cons = flatten(_sys(atom("<=", ZERO, s), atom("=", s, ONE)))
        assert names == ["s"] and [c.kind for c in cons] == ["le", "eq"]


class TestProperties:
    def _random_system(self, seed):
        rng = random.Random(seed)
        S = gen.random_structure(rng, max_size=2)
        phi = gen.random_team_formula(rng, ("x",), 2, ("indep", "marg", "dep"))
        return compile(S, phi)

    @settings(max_examples=25)
    @given(seeds)
    def test_sat_is_verified(self, seed):
        sys = self._random_system(seed)
        r = solve(sys, seed=seed % 1000, restarts=8)
        if r.status is Status.SAT:
            assert verify(sys, r.witness).ok

    @settings(max_examples=10)
    @given(seeds)
    def test_deterministic(self, seed):
        sys = self._random_system(seed)
        assert solve(sys, seed=3, restarts=4) == solve(sys, seed=3, restarts=4)

    @settings(max_examples=10)
    @given(seeds)
    def test_more_restarts_keep_sat(self, seed):
        sys = self._random_system(seed)
        if solve(sys, seed=5, restarts=2).status is Status.SAT:
            assert solve(sys, seed=5, restarts=8).status is Status.SAT
