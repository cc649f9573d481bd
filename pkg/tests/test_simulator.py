import json

import numpy as np
import pytest

from gridtopo.estimation import analyze_identifiability, coefficient_from_measurements
from gridtopo.measurements import read_measurements_csv, write_measurements_csv
from gridtopo.simulator import (
    GenerationError,
    GroundTruthNetwork,
    NetworkError,
    VoltageProfileSpec,
    fixture_path,
    forward_currents,
    generate_measurements,
    generate_random_network,
    load_network,
    save_network,
)

from oracles import kcl_currents


@pytest.fixture
def ieee4():
    return load_network(fixture_path("ieee4_modified.json"))


def test_fixture_network(ieee4):
    assert ieee4.n == 4
    assert [(i, j) for i, j, _ in ieee4.edges] == [(1, 2), (2, 3), (3, 4)]
    assert dict(((i, j), y) for i, j, y in ieee4.edges)[(2, 3)] == 1.51 - 3.1j


def test_flat_voltage_gives_no_current(ieee4):
    np.testing.assert_array_equal(forward_currents(ieee4, np.full(4, 12470 + 5j)), np.zeros(4))


def test_path_hand_case():
    net = GroundTruthNetwork(3, ((1, 2, 1), (2, 3, 1)))
    np.testing.assert_array_equal(forward_currents(net, [1, 0, 0]), [1, -1, 0])


def test_forward_matches_branch_sum(rng):
    net = generate_random_network(6, 0.5, seed=4)
    V = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    expected = kcl_currents({(i, j): y for i, j, y in net.edges}, V)
    np.testing.assert_allclose(forward_currents(net, V), expected, atol=1e-12)


def test_forward_dimension_check(ieee4):
    with pytest.raises(ValueError):
        forward_currents(ieee4, [1, 2, 3])


@pytest.mark.parametrize("edges", [
    ((1, 2, 1), (1, 2, 2)),
    ((2, 1, 1),),
    ((1, 5, 1),),
    ((1, 2, 0),),
])
def test_invalid_networks(edges):
    with pytest.raises(NetworkError):
        GroundTruthNetwork(4, edges)


def test_network_json_roundtrip(tmp_path, ieee4):
    path = tmp_path / "net.json"
    save_network(ieee4, path)
    assert load_network(path) == ieee4
    assert set(json.loads(path.read_text())) == {"n", "edges", "name"}


def test_malformed_network_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 3, "edges": [{"i": 1}]}')
    with pytest.raises(NetworkError):
        load_network(path)
    path.write_text("not json")
    with pytest.raises(NetworkError):
        load_network(path)


def test_generation_is_deterministic(ieee4):
    spec = VoltageProfileSpec(seed=7)
    assert generate_measurements(ieee4, spec, 3) == generate_measurements(ieee4, spec, 3)
    assert generate_random_network(6, 0.4, seed=2) == generate_random_network(6, 0.4, seed=2)


def test_perturbed_profile_near_nominal():
    V = VoltageProfileSpec("perturbed", nominal=12470, perturbation=0.05, seed=1).draw(4, 3)
    assert np.all(np.abs(V - 12470) <= 12470 * 0.05 * np.sqrt(2))


def test_explicit_profile_shape(ieee4):
    with pytest.raises(ValueError):
        generate_measurements(ieee4, VoltageProfileSpec("explicit", profiles=np.ones((2, 4))), 3)


def test_bad_spec():
    with pytest.raises(ValueError):
        VoltageProfileSpec("perturbed", perturbation=1.5)
    with pytest.raises(ValueError):
        VoltageProfileSpec("sinusoid")


@pytest.mark.parametrize("mode", ["random", "perturbed"])
def test_identifiability_at_and_below_threshold(mode):
    for n in range(3, 8):
        for seed in range(5):
            net = generate_random_network(n, 0.6, seed=seed)
            spec = VoltageProfileSpec(mode, seed=seed)
            assert analyze_identifiability(coefficient_from_measurements(generate_measurements(net, spec, n - 1))).unique
            assert not analyze_identifiability(coefficient_from_measurements(generate_measurements(net, spec, n - 2))).unique


def test_simulated_data_reingests(ieee4):
    mset = generate_measurements(ieee4, VoltageProfileSpec(seed=3), 3)
    assert read_measurements_csv(write_measurements_csv(mset)) == mset


def test_complete_graph_at_full_density():
    net = generate_random_network(6, 1.0, seed=0)
    assert len(net.edges) == 15


def test_spanning_tree_when_three_edges():
    trees = []
    for seed in range(200):
        net = generate_random_network(4, 0.5, seed=seed)
        if len(net.edges) == 3:
            trees.append(net)
    assert trees
    for net in trees:
        nodes = {i for i, j, _ in net.edges} | {j for i, j, _ in net.edges}
        assert nodes == {1, 2, 3, 4}


def test_inductive_and_real_admittances():
    net = generate_random_network(6, 0.5, seed=5)
    assert all(y.imag < 0 for _, _, y in net.edges)
    real = generate_random_network(6, 0.5, seed=5, real=True)
    assert all(y.imag == 0 and y.real > 0 for _, _, y in real.edges)


def test_retry_exhaustion():
    with pytest.raises(GenerationError):
        generate_random_network(12, 0.01, seed=0)


def test_current_conservation():
    for seed in range(20):
        net = generate_random_network(7, 0.5, seed=seed)
        mset = generate_measurements(net, VoltageProfileSpec("random", seed=seed), 4)
        for s in mset.snapshots:
            assert abs(s.I.sum()) <= 1e-10 * np.abs(s.I).sum()
