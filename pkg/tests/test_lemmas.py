import json
import random

import networkx as nx
import numpy as np
import pytest

from qapfacets.facets import evaluate_at_vertex, make_triple
from qapfacets.lemmas import (
    ConfigError,
    SigmaConfig,
    TranspositionGraphSpec,
    build_sigma_set,
    build_transposition_graph,
    connectivity_sweep,
    identity_eccentricity,
    is_connected,
    lemma2_path_bound,
    secondset_parts,
    secondset_special_edge,
    transposition_graph,
    verify_zero_identity,
    zero_identity_sweep,
)
from qapfacets.perm import Permutation, enumerate_permutations, parity


def _cfg5():
    return SigmaConfig(Permutation.identity(5), (0, 1, 2), 3, 4)


def test_sigma_set_shape_and_signs():
    terms = build_sigma_set(_cfg5())
    assert len(terms) == 12
    assert sum(1 for _, s in terms if parity(s) == 1) == 6
    assert [sign for sign, _ in terms[:6]] == [1, -1, -1, 1, 1, -1]
    for sign, s in terms:
        assert sign == parity(s)


def test_sigma_set_touches_only_five_indices():
    n = 7
    rng = random.Random(3)
    base = list(range(n))
    rng.shuffle(base)
    cfg = SigmaConfig(Permutation(tuple(base)), (1, 4, 6), 0, 3)
    for _, s in build_sigma_set(cfg):
        assert s.image[2] == base[2] and s.image[5] == base[5]


def test_config_errors():
    with pytest.raises(ConfigError):
        SigmaConfig(Permutation.identity(4), (0, 1, 2), 3, 3)
    with pytest.raises(ConfigError):
        SigmaConfig(Permutation.identity(6), (0, 1, 2), 2, 4)


def test_zero_identity_and_control():
    ok, residual = verify_zero_identity(_cfg5())
    assert ok and not residual.any()
    for t in range(12):
        assert not verify_zero_identity(_cfg5(), flip=t)[0]


@pytest.mark.parametrize("n", [5, 6, 7])
def test_zero_identity_sweep(n):
    ok, failures = zero_identity_sweep(n, 30, seed=n)
    assert ok == 30 and failures == []


def test_unconstrained_graph_n4():
    g = build_transposition_graph(TranspositionGraphSpec(4))
    assert g.number_of_nodes() == 24
    assert is_connected(g) == (True, 1)


def test_lemma2_example_n5():
    spec = TranspositionGraphSpec(5, ((0, 0),), ((1, frozenset([1])),), "lemma2")
    g = build_transposition_graph(spec)
    assert is_connected(g)[0]
    assert identity_eccentricity(g, 5) <= lemma2_path_bound(spec)


def test_lemma1_example_n6():
    spec = TranspositionGraphSpec(6, ((0, 0),), ((1, frozenset([4, 5])), (2, frozenset([4, 5]))), "lemma1")
    assert is_connected(build_transposition_graph(spec))[0]


def test_lemma1_side_condition_enforced():
    with pytest.raises(ConfigError):
        TranspositionGraphSpec(4, ((0, 0),), ((1, frozenset([1, 2, 3])), (2, frozenset([1]))), "lemma1")


def test_is_connected_small_cases():
    g = nx.Graph()
    assert is_connected(g) == (True, 0)
    g.add_node("a")
    assert is_connected(g) == (True, 1)
    g.add_node("b")
    assert is_connected(g) == (False, 2)


def test_overconstrained_negative_control_n4():
    # sigma(4) = 4 and no other fixed point: the two 3-cycles, three swaps apart
    spec = TranspositionGraphSpec(
        4, ((3, 3),), ((0, frozenset([0])), (1, frozenset([1])), (2, frozenset([2]))), "free")
    g = build_transposition_graph(spec, normalize=False)
    assert sorted(g.nodes) == [(1, 2, 0, 3), (2, 0, 1, 3)]
    assert is_connected(g) == (False, 2)
    with pytest.raises(ConfigError):
        TranspositionGraphSpec(4, spec.fixed, spec.forbidden, "lemma2")


@pytest.mark.parametrize("mode", ["lemma1", "lemma2"])
def test_connectivity_sweep(mode):
    rows = connectivity_sweep(5, mode, 15, seed=1)
    assert all(r["connected"] for r in rows)
    if mode == "lemma2":
        assert all(r["eccentricity"] <= r["bound"] for r in rows if "eccentricity" in r)


def test_spec_record_roundtrip():
    spec = TranspositionGraphSpec(6, ((0, 2),), ((1, frozenset([4, 5])),), "lemma1")
    rec = json.loads(json.dumps(spec.to_record()))
    assert rec["fixed"] == [[1, 3]]
    assert TranspositionGraphSpec.from_record(rec) == spec


def test_secondset_two_components_and_bridge():
    n = 6
    args = (0, 0, 1, 1, 2, 2)
    X1, X2 = secondset_parts(n, *args)
    assert (len(X1), len(X2)) == (18, 54)
    g = make_triple(n, *args)
    loose = [s for s in enumerate_permutations(n) if evaluate_at_vertex(g, s) > 0]
    assert {s.image for s in loose} == {s.image for s in X1 + X2}
    graph = transposition_graph(X1 + X2)
    assert is_connected(graph) == (False, 2)
    a1, a2, cfg = secondset_special_edge(X1[0], *args)
    assert a2 in X2
    terms = build_sigma_set(cfg)
    assert terms[0][1] == a1 and terms[10][1] == a2
    assert verify_zero_identity(cfg)[0]
    # the other ten members of the cancellation set are tight
    assert all(evaluate_at_vertex(g, s) == 0 for t, (_, s) in enumerate(terms) if t not in (0, 10))
    graph.add_edge(a1.image, a2.image)
    assert is_connected(graph) == (True, 1)
