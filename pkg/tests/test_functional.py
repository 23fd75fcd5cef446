
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from infoclosure import (FunctionTable, LimitError, SchemaError, UnknownNameError, Variable,
                         is_functionally_closed, is_functionally_dependent, minimal_input_sets)
from infoclosure.functional import random_table

B = 2


def table(fn, k=3, out=2):
    inputs = [Variable(f"x{i + 1}", B) for i in range(k)]
    return FunctionTable.from_function(inputs, Variable("y", out), lambda *a: str(fn(*map(int, a))))


def oracle_sets(t):
    rows = [(tuple(labels), y) for labels, y in t.rows()]
    return oracles.minimal_sets_exhaustive(rows, list(t.input_names))


# -- dependency --------------------------------------------------------------

def test_all_inputs_always_determine():
    t = table(lambda a, b, c: (a + b * c) % 2)
    assert is_functionally_dependent(t, t.input_names)


def test_xor_needs_both():
    t = table(lambda a, b, c: a ^ b)
    assert not is_functionally_dependent(t, ["x1"])
    assert is_functionally_dependent(t, ["x1", "x2"])


def test_and_by_enumeration():
    t = table(lambda a, b, c: a & b)
    assert is_functionally_dependent(t, ["x1", "x2"])
    assert not is_functionally_dependent(t, ["x1", "x3"])


def test_unknown_input_name():
    with pytest.raises(UnknownNameError):
        is_functionally_dependent(table(lambda a, b, c: a), ["x9"])


# -- minimal sets ------------------------------------------------------------

def test_constant_output_minimal_set_is_empty():
    sets = minimal_input_sets(table(lambda a, b, c: 1))
    assert [m.members for m in sets] == [()]


def test_xor_with_spectator():
    t = table(lambda a, b, c: a ^ b)
    sets = minimal_input_sets(t)
    assert [m.members for m in sets] == [("x1", "x2")]
    assert {m.members for m in sets} == oracle_sets(t)


def test_projection():
    assert [m.members for m in minimal_input_sets(table(lambda a, b, c: a))] == [("x1",)]


def test_witnesses_show_each_member_is_needed():
    t = table(lambda a, b, c: a ^ b)
    m = minimal_input_sets(t)[0]
    lookup = {tuple(labels): y for labels, y in t.rows()}
    for member, (ra, rb) in m.witnesses.items():
        assert lookup[ra] != lookup[rb]
        others = [i for i, n in enumerate(t.input_names) if n in m.members and n != member]
        assert all(ra[i] == rb[i] for i in others)


def test_arity_limit():
    t = random_table(np.random.default_rng(0), 5, sizes=[2] * 5)
    with pytest.raises(LimitError):
        minimal_input_sets(t, arity_limit=4)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 6))
def test_matches_exhaustive_oracle(seed, arity):
    t = random_table(np.random.default_rng(seed), arity)
    assert {m.members for m in minimal_input_sets(t)} == oracle_sets(t)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.data())
def test_monotonicity(seed, data):
    t = random_table(np.random.default_rng(seed), 5)
    base = data.draw(st.lists(st.sampled_from(t.input_names), unique=True))
    extra = data.draw(st.lists(st.sampled_from(t.input_names), unique=True))
    if is_functionally_dependent(t, base):
        assert is_functionally_dependent(t, set(base) | set(extra))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_relabeling_keeps_minimal_sets(seed):
    rng = np.random.default_rng(seed)
    t = random_table(rng, 4)
    mapping = {v.name: {a: f"{v.name}_{a}_r" for a in v.alphabet}
               for v in t.input_vars + (t.output_var,)}
    r = t.relabeled(mapping)
    assert [m.members for m in minimal_input_sets(r)] == [m.members for m in minimal_input_sets(t)]


def test_results_are_sorted_and_stable():
    for seed in range(20):
        t = random_table(np.random.default_rng(seed), 6)
        got = [m.members for m in minimal_input_sets(t)]
        assert got == sorted(got)
        assert all(list(m) == sorted(m) for m in got)
        assert got == [m.members for m in minimal_input_sets(t)]


# -- closure -----------------------------------------------------------------

def test_closed_when_environment_is_spectator():
    fc = is_functionally_closed(table(lambda a, b, c: a ^ b), ["x3"])
    assert fc.closed and fc.evidence.members == ("x1", "x2")
    assert not fc.output_effect_checked


def test_open_when_environment_is_essential():
    fc = is_functionally_closed(table(lambda a, b, c: a ^ c), ["x3"])
    assert not fc.closed and fc.evidence is None


def test_constant_closed_against_everything():
    fc = is_functionally_closed(table(lambda a, b, c: 0), ["x1", "x2", "x3"])
    assert fc.closed and fc.evidence.members == ()


def test_closure_unknown_environment_input():
    with pytest.raises(UnknownNameError):
        is_functionally_closed(table(lambda a, b, c: a), ["zz"])


# -- csv ---------------------------------------------------------------------

def test_csv_round_trip(tmp_path):
    t = table(lambda a, b, c: a | c)
    path = tmp_path / "t.csv"
    t.to_csv(path)
    back = FunctionTable.load_csv(path)
    assert back.input_names == t.input_names
    np.testing.assert_array_equal(back.outputs, t.outputs)


def test_csv_missing_row(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("a,b,y\n0,0,0\n0,1,1\n1,0,1\n")
    with pytest.raises(SchemaError, match="not total"):
        FunctionTable.load_csv(path)


def test_csv_duplicate_row_reports_line(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("a,b,y\n0,0,0\n0,1,1\n1,0,1\n1,1,0\n0,1,0\n")
    with pytest.raises(SchemaError, match=r"t.csv:6"):
        FunctionTable.load_csv(path)


def test_csv_ragged_row(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("a,b,y\n0,0\n")
    with pytest.raises(SchemaError, match=r"t.csv:2"):
        FunctionTable.load_csv(path)
