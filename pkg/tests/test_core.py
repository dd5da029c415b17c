import itertools
import json
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptl.core import (InstanceError, Structure, TeamError, UnboundVariable, WeightedTeam, duplicate,
                      extend, instance_to_json, load_instance, parse_weight, restrict, scale,
                      scaled_union, unit_team, weight)
from ptl.syntax import parse

DOM = ("a", "b", "c")


@st.composite
def teams(draw, vars=("x", "y"), allow_zero=False):
    space = list(itertools.product(DOM, repeat=len(vars)))
    chosen = draw(st.lists(st.sampled_from(space), min_size=1, max_size=len(space), unique=True))
    lo = 0 if allow_zero else 1
    ws = draw(st.lists(st.fractions(min_value=lo, max_value=5, max_denominator=12),
                       min_size=len(chosen), max_size=len(chosen)))
    return WeightedTeam(vars, list(zip(chosen, ws)), DOM)


class TestStructure:
    def test_rejects_bad_arity(self):
        with pytest.raises(InstanceError):
            Structure(("a",), {"R": (2, [("a",)])})

    def test_rejects_foreign_elements(self):
        with pytest.raises(InstanceError):
            Structure(("a",), {"P": (1, [("z",)])})

    def test_rejects_empty_domain(self):
        with pytest.raises(InstanceError):
            Structure(())

    def test_constants_must_map_into_domain(self):
        with pytest.raises(InstanceError):
            Structure(("a",), {}, {"zero": "b"})


class TestTeam:
    def test_rows_sorted_by_domain_order(self):
        X = WeightedTeam(("x",), [(("b",), 1), (("a",), 2)], ("b", "a"))
        assert [t for t, _ in X.rows] == [("b",), ("a",)]

    def test_rejects_negative_and_duplicates(self):
        with pytest.raises(TeamError):
            WeightedTeam(("x",), [(("a",), -1)])
        with pytest.raises(TeamError):
            WeightedTeam(("x",), [(("a",), 1), (("a",), 2)])

    def test_rejects_floats(self):
        with pytest.raises(TypeError):
            WeightedTeam(("x",), [(("a",), 0.5)])

    def test_zero_rows_do_not_affect_equality(self):
        X = WeightedTeam(("x",), [(("a",), 1), (("b",), 0)])
        assert X == WeightedTeam(("x",), [(("a",), 1)])


class TestRestrict:
    def test_identity(self):
        X = WeightedTeam(("x", "y"), [(("a", "b"), F(1, 3)), (("a", "c"), F(2, 3))], DOM)
        assert restrict(X, X.vars) == X

    def test_sums_preimages(self):
        X = WeightedTeam(("x", "y"), [(("a", "b"), F(1, 3)), (("a", "c"), F(2, 3))], DOM)
        assert restrict(X, {"x"}).as_dict() == {("a",): 1}

    def test_all_zero(self):
        X = WeightedTeam(("x", "y"), [(("a", "b"), 0)], DOM)
        assert restrict(X, {"x"}).is_empty

    def test_keeps_original_variable_order(self):
        X = WeightedTeam(("z", "x", "y"), [(("a", "b", "c"), 1)])
        assert restrict(X, ["y", "z"]).vars == ("z", "y")

    def test_unknown_variable(self):
        with pytest.raises(UnboundVariable):
            restrict(unit_team(), {"x"})

    @given(teams(), st.sampled_from([(), ("x",), ("y",), ("x", "y")]))
    def test_preserves_total(self, X, V):
        assert restrict(X, V).total == X.total


class TestWeight:
    def test_true_condition_gives_total(self):
        X = WeightedTeam(("x",), [(("a",), F(1, 4)), (("b",), F(3, 4))])
        assert weight(X) == 1
        assert weight(X, parse("x = x")) == 1

    def test_equality_condition(self):
        A = Structure(("a", "b"), {}, {"a": "a"})
        X = WeightedTeam(("x",), [(("a",), F(1, 4)), (("b",), F(3, 4))])
        assert weight(X, parse("x = @a"), A) == F(1, 4)

    def test_contradictory_condition(self):
        A = Structure(("a", "b"), {}, {"a": "a", "b": "b"})
        X = WeightedTeam(("x",), [(("a",), F(1, 4)), (("b",), F(3, 4))])
        assert weight(X, parse("x = @a & x = @b"), A) == 0

    def test_unbound(self):
        with pytest.raises(UnboundVariable):
            weight(unit_team(), parse("x = x"))


class TestDuplicate:
    def test_singleton_fresh(self):
        X = WeightedTeam(("x",), [(("a",), F(1, 3)), (("b",), F(2, 3))])
        Y = duplicate(X, "y", ["c"])
        assert Y.as_dict() == {("a", "c"): F(1, 3), ("b", "c"): F(2, 3)}

    def test_unit_team_over_two_values(self):
        assert duplicate(unit_team(), "x", ["a", "b"]).as_dict() == {("a",): F(1, 2), ("b",): F(1, 2)}

    def test_overwrites_existing_variable(self):
        X = WeightedTeam(("x", "y"), [(("a", "a"), F(1, 2)), (("b", "a"), F(1, 4)), (("b", "b"), F(1, 4))])
        Y = duplicate(X, "x", DOM)
        # each x-slice receives |X|/|A| spread over the y-groups of X
        assert Y.as_dict() == {(c, "a"): F(1, 4) for c in DOM} | {(c, "b"): F(1, 12) for c in DOM}

    def test_empty_B(self):
        with pytest.raises(TeamError):
            duplicate(unit_team(), "x", [])

    @given(teams(), st.lists(st.sampled_from(DOM), min_size=1, max_size=3, unique=True))
    def test_total_and_restriction(self, X, B):
        Y = duplicate(X, "z", B)
        assert Y.total == X.total
        assert restrict(Y, X.vars) == X


class TestExtend:
    def test_point_mass(self):
        X = WeightedTeam(("x",), [(("a",), F(1, 3)), (("b",), F(2, 3))])
        Y = extend(X, "y", {("a",): {"c": 1}, ("b",): {"c": 1}})
        assert Y.as_dict() == {("a", "c"): F(1, 3), ("b", "c"): F(2, 3)}

    def test_uniform_from_unit(self):
        Y = extend(unit_team(), "x", {(): {"a": F(1, 2), "b": F(1, 2)}})
        assert Y.as_dict() == {("a",): F(1, 2), ("b",): F(1, 2)}

    def test_merging_rows_add(self):
        X = WeightedTeam(("x",), [(("a",), F(1, 2)), (("b",), F(1, 2))])
        Y = extend(X, "x", {("a",): {"c": 1}, ("b",): {"c": 1}})
        assert Y.as_dict() == {("c",): 1}

    def test_rejects_non_distribution(self):
        with pytest.raises(TeamError):
            extend(unit_team(), "x", {(): {"a": F(9, 10)}})

    def test_requires_normalized(self):
        with pytest.raises(TeamError):
            extend(scale(unit_team(), 2), "x", {(): {"a": 1}})

    @given(teams())
    def test_preserves_normalization(self, X):
        X = X.normalize()
        F_ = {t: {"a": F(1, 3), "b": F(2, 3)} for t in X.support()}
        assert extend(X, "z", F_).normalized


class TestScaledUnion:
    X = WeightedTeam(("x",), [(("a",), 1)])
    Y = WeightedTeam(("x",), [(("b",), 1)])

    def test_k_one(self):
        assert scaled_union(self.X, self.Y, 1) == self.X

    def test_k_zero(self):
        assert scaled_union(self.X, self.Y, 0) == self.Y

    def test_third(self):
        assert scaled_union(self.X, self.Y, F(1, 3)).as_dict() == {("a",): F(1, 3), ("b",): F(2, 3)}

    def test_mismatched_vars(self):
        with pytest.raises(TeamError):
            scaled_union(self.X, WeightedTeam(("y",), [(("a",), 1)]), F(1, 2))

    @given(teams(), teams(), st.fractions(min_value=0, max_value=1, max_denominator=10))
    def test_total(self, X, Y, k):
        assert scaled_union(X, Y, k).total == k * X.total + (1 - k) * Y.total


class TestInstances:
    def test_round_trip(self, tmp_path, ab):
        X = WeightedTeam(("x", "y"), [(("a", "b"), F(1, 3)), (("b", "b"), F(2, 3))], ab.domain)
        p = tmp_path / "i.json"
        p.write_text(json.dumps(instance_to_json(ab, X)))
        A2, X2 = load_instance(p)
        assert A2 == ab and X2 == X

    def test_weights(self):
        assert parse_weight("1/3") == F(1, 3)
        assert parse_weight("0.25") == F(1, 4)
        with pytest.raises(InstanceError):
            parse_weight("-1/2")
        with pytest.raises(InstanceError):
            parse_weight("abc")

    def test_rejects_rows_outside_domain(self):
        data = {"domain": ["a"], "team": {"vars": ["x"], "rows": [{"t": ["b"], "w": "1"}]}}
        with pytest.raises(InstanceError):
            load_instance(data)
