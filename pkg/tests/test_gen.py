import random

from ptl import gen
from ptl.syntax import free_vars, is_fo, parse, to_text


def test_seeded():
    a = gen.random_team_formula(random.Random(3), ("x",), 4)
    b = gen.random_team_formula(random.Random(3), ("x",), 4)
    assert a == b


def test_team_bounds():
    rng = random.Random(0)
    for _ in range(50):
        A = gen.random_structure(rng)
        X = gen.random_team(rng, A, ("x", "y"), max_rows=5, max_den=12, normalize=True)
        assert 1 <= len(X.support()) <= 5 and X.normalized
        assert 1 <= A.size <= 4


def test_product_team_is_independent():
    from ptl.atoms import eval_atom
    rng = random.Random(1)
    for _ in range(30):
        A = gen.random_structure(rng, size=3)
        X = gen.product_team(rng, A, ("x",), ("y", "z"))
        assert eval_atom(A, X, parse("indep(; x ; y z)"))


def test_fo_sentences_are_closed():
    rng = random.Random(2)
    for _ in range(50):
        psi = gen.random_fo(rng, (), 4)
        assert is_fo(psi) and not free_vars(psi)
        assert parse(to_text(psi)) == psi
