import numpy as np
import pytest

import oracles
from infoclosure import (ArgumentError, JointDistribution, LimitError, SchemaError,
                         SystemPartition, Variable, bundled, closure_joint, empirical_closure_joint,
                         entropy, estimate_measures, load_trajectories, measure, sample,
                         scenario_from_functions)
from infoclosure.closure import measure_joint
from infoclosure.estimation import EmpiricalJoint, SAMPLER_ALGORITHM

MEASURES = ("info_closure", "func_closure", "env_coupling", "self_information", "next_entropy")


def fair_coin_scenario():
    """Context is a fresh fair coin every step; environment fixed at 0."""
    s, i, e = Variable("s", 2), Variable("i", ("0",)), Variable("e", 2)
    part = SystemPartition((s,), (i,), (e,))
    return scenario_from_functions(
        part, {("0", "0", "0"): 0.5, ("1", "0", "0"): 0.5},
        lambda c, x: {("0", "0"): 0.5, ("1", "0"): 0.5}, lambda c, x: {("0",): 1.0})


def deterministic_scenario():
    s, i, e = Variable("s", 3), Variable("i", ("0",)), Variable("e", 2)
    part = SystemPartition((s,), (i,), (e,))
    return scenario_from_functions(
        part, {("2", "0", "1"): 1.0},
        lambda c, x: {(str((int(c[0]) + int(x[0])) % 3), "0"): 1.0},
        lambda c, x: {(str(1 - int(x[0])),): 1.0})


def test_deterministic_paths_ignore_seed():
    sc = deterministic_scenario()
    a, b = sample(sc, 20, 5, seed=1), sample(sc, 20, 5, seed=99)
    assert (a.context == a.context[0]).all()
    np.testing.assert_array_equal(a.context, b.context)
    np.testing.assert_array_equal(a.outer, b.outer)


def test_deterministic_empirical_joint_is_exact():
    sc = deterministic_scenario()
    traj = sample(sc, 7, 4, seed=3)
    for n in range(3):
        emp = empirical_closure_joint(traj, n).distribution()
        np.testing.assert_array_equal(emp.table, closure_joint(sc, n).table)


def test_fair_coin_frequency_interval():
    traj = sample(fair_coin_scenario(), 10_000, 3, seed=2024)
    for n in range(4):
        f = float((traj.context[:, n] == 0).mean())
        assert 0.47 <= f <= 0.53


def test_same_seed_identical():
    sc = bundled("driven")
    a, b = sample(sc, 500, 4, 17), sample(sc, 500, 4, 17)
    assert a == b
    assert a.algorithm == SAMPLER_ALGORITHM and a.fingerprint == b.fingerprint
    assert not (a == sample(sc, 500, 4, 18))


def test_prefix_stability_across_counts():
    # trajectory-major draws: the first paths do not depend on how many follow
    sc = bundled("driven")
    small, big = sample(sc, 100, 3, 5), sample(sc, 40_000, 3, 5)
    np.testing.assert_array_equal(small.context, big.context[:100])


def test_count_one_is_point_mass():
    traj = sample(bundled("driven"), 1, 2, 0)
    d = empirical_closure_joint(traj, 0).distribution()
    assert sorted(d.table.ravel().tolist())[-1] == 1.0


def test_sample_argument_checks():
    with pytest.raises(ArgumentError):
        sample(bundled("copy"), 0, 2, 0)
    traj = sample(bundled("copy"), 10, 2, 0)
    with pytest.raises(LimitError):
        empirical_closure_joint(traj, 2)
    with pytest.raises(ArgumentError):
        empirical_closure_joint(traj, 0, "bayes")


def test_copy_estimates_within_two_centibits():
    sc = bundled("copy")
    est = estimate_measures(empirical_closure_joint(sample(sc, 100_000, 2, 0), 1)).measures
    exact = measure(sc, 1)
    for k in MEASURES:
        assert abs(getattr(est, k) - getattr(exact, k)) < 0.02, k


def test_exact_counts_reproduce_exact_measures():
    sc = bundled("driven")
    j = closure_joint(sc, 1)
    counts = (j.table * 800).round().reshape(4, 2, 4)
    emp = EmpiricalJoint(sc.partition.boundary, counts, 1)
    est = estimate_measures(emp).measures
    exact = measure_joint(j, sc.partition, 1)
    for k in MEASURES:
        assert getattr(est, k) == pytest.approx(getattr(exact, k), abs=1e-12)


def test_plug_in_matches_oracle_on_counts():
    traj = sample(bundled("decoupled"), 2000, 3, 9)
    emp = empirical_closure_joint(traj, 1)
    n_s, n_e = 4, 2
    pmf = {}
    for s, e, a in zip(traj.context[:, 1], traj.outer[:, 1], traj.context[:, 2]):
        pmf[(s, e, a)] = pmf.get((s, e, a), 0) + 1 / traj.count
    names = ["S", "E", "N"]
    est = estimate_measures(emp).measures
    assert est.info_closure == pytest.approx(oracles.CMI(pmf, names, ["N"], ["E"], ["S"]), abs=1e-12)
    assert est.env_coupling == pytest.approx(oracles.MI(pmf, names, ["S"], ["E"]), abs=1e-12)
    assert emp.counts.shape == (n_s, n_e, n_s)


def test_independent_plug_in_mi_bias_small():
    traj = sample(bundled("decoupled"), 10_000, 2, 31)
    est = estimate_measures(empirical_closure_joint(traj, 1)).measures
    assert 0.0 <= est.env_coupling <= 0.01
    assert 0.0 <= est.func_closure <= 0.01


def test_miller_madow_entropy_not_below_plug_in():
    traj = sample(bundled("driven"), 300, 3, 4)
    pi = estimate_measures(empirical_closure_joint(traj, 1, "plug_in")).measures
    mm = estimate_measures(empirical_closure_joint(traj, 1, "miller_madow")).measures
    assert mm.next_entropy >= pi.next_entropy
    assert mm.env_entropy >= pi.env_entropy


def test_empirical_joint_is_valid_distribution():
    emp = empirical_closure_joint(sample(bundled("copy"), 333, 3, 1), 2).distribution()
    assert isinstance(emp, JointDistribution)
    assert abs(emp.table.sum() - 1) < 1e-12
    assert entropy(emp, ["e"]) >= 0


# -- trajectory files --------------------------------------------------------

def test_csv_round_trip(tmp_path):
    sc = bundled("driven")
    traj = sample(sc, 50, 3, 8)
    path = tmp_path / "t.csv"
    traj.to_csv(path)
    back = load_trajectories(path, boundary=sc.partition.boundary)
    np.testing.assert_array_equal(back.context, traj.context)
    np.testing.assert_array_equal(back.outer, traj.outer)


def test_csv_inferred_alphabets(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("trajectory_id,step,s,e\n"
                    "a,0,lo,x\na,1,hi,y\nb,0,hi,y\nb,1,hi,x\n")
    traj = load_trajectories(path, outer_names=["e"])
    assert traj.boundary.context_names == ("s",) and traj.boundary.outer_names == ("e",)
    assert traj.boundary.context[0].alphabet == ("hi", "lo")
    emp = empirical_closure_joint(traj, 0)
    assert emp.sample_size == 2


@pytest.mark.parametrize("body,match", [
    ("trajectory_id,step,s\na,0,0\na,0,1\n", "t.csv:3"),
    ("id,step,s\na,0,0\n", "t.csv:1"),
    ("trajectory_id,step,s\na,x,0\n", "t.csv:2"),
    ("trajectory_id,step,s\na,0,0\na,1,0\nb,0,1\n", "different horizons"),
    ("trajectory_id,step,s\na,0,0\na,2,0\nb,0,1\nb,2,1\n", "does not cover"),
])
def test_csv_errors(tmp_path, body, match):
    path = tmp_path / "t.csv"
    path.write_text(body)
    with pytest.raises(SchemaError, match=match):
        load_trajectories(path)
