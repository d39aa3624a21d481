import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qapfacets.facets import (
    FamilyError,
    GenericInequality,
    LinearInequality,
    certify,
    classify_vertex,
    count_family,
    enumerate_family,
    evaluate_at_vertex,
    expand_generic,
    family_formula_term,
    make_box,
    make_mterm,
    make_nonneg,
    make_triple,
    nonneg_formula,
    vertex_sum,
)
from qapfacets.perm import enumerate_permutations, flat, is_pinned, vertex

PERMS = {n: list(enumerate_permutations(n)) for n in (4, 5, 6)}


def _reduced(lin):
    """Coefficients left after dropping coordinates pinned to zero."""
    out = {}
    for (p, q), c in lin.items():
        if c and not is_pinned(p, q, lin.n):
            out[(p, q)] = c
    return out


def test_expand_nonneg():
    g = make_nonneg(6, 0, 1, 2, 3)
    lin = expand_generic(g)
    p, q = flat(0, 1, 6), flat(2, 3, 6)
    assert dict(lin.items()) == {(p, q): 2}
    assert lin.constant == 0


def test_expand_single_coefficient_is_trivial():
    lin = expand_generic(GenericInequality(4, {(1, 2): 1}, 1))
    assert lin.is_trivial() and lin.constant == 0


def test_expand_mterm_reduces_to_pair_form():
    n = 6
    pairs = [(0, 0), (1, 1), (2, 2)]
    k, l = 3, 3
    lin = expand_generic(make_mterm(n, pairs, k, l))
    kl = flat(k, l, n)
    want = {(kl, kl): 2}
    flats = [flat(i, j, n) for i, j in pairs]
    for a, b in itertools.combinations(flats, 2):
        want[(a, b)] = 2
    for a in flats:
        want[(min(a, kl), max(a, kl))] = -2
    assert _reduced(lin) == want


def test_expand_triple_matches_stated_form():
    # Y[p1q1,kl] + Y[p2q2,kl] + Y[p1q2,kl] <= Y[kl,kl] + Y[p1q1,p2q2] on the polytope
    n = 6
    p1, q1, p2, q2, k, l = 0, 0, 1, 1, 2, 2
    lin = expand_generic(make_triple(n, p1, q1, p2, q2, k, l))
    a, b, c, d = flat(p1, q1, n), flat(p2, q2, n), flat(p1, q2, n), flat(k, l, n)
    want = {(d, d): 2, (a, b): 2, (a, d): -2, (b, d): -2, (c, d): -2}
    assert _reduced(lin) == want


def test_evaluate_examples():
    g = GenericInequality(4, {(0, 0): 1, (1, 1): 1}, 2)
    ident = PERMS[4][0]
    assert vertex_sum(g, ident) == 2
    assert evaluate_at_vertex(g, ident) == 0
    g1 = GenericInequality(4, {(0, 0): 1, (1, 1): 1}, 1)
    assert evaluate_at_vertex(g1, ident) == 2


@st.composite
def generic_inequalities(draw):
    n = draw(st.sampled_from([4, 5, 6]))
    cells = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                          min_size=1, max_size=8, unique=True))
    vals = draw(st.lists(st.integers(-3, 3).filter(bool), min_size=len(cells), max_size=len(cells)))
    beta = draw(st.integers(-5, 5))
    return GenericInequality(n, dict(zip(cells, vals)), beta)


@settings(max_examples=60, deadline=None)
@given(generic_inequalities())
def test_generic_validity_and_expansion(g):
    lin = expand_generic(g)
    for sigma in PERMS[g.n]:
        fast = evaluate_at_vertex(g, sigma)
        assert fast >= 0
        assert lin.evaluate(vertex(sigma)) == fast
        s = vertex_sum(g, sigma)
        assert (fast == 0) == (s in (g.beta - 1, g.beta))


def test_family_errors():
    with pytest.raises(FamilyError, match="i != k"):
        make_nonneg(4, 1, 0, 1, 2)
    with pytest.raises(FamilyError, match="j != l"):
        make_nonneg(4, 0, 1, 2, 1)
    with pytest.raises(FamilyError, match="distinct"):
        make_triple(6, 0, 0, 0, 1, 2, 2)
    with pytest.raises(FamilyError, match="3 <= m"):
        make_mterm(6, [(0, 0), (1, 1), (2, 2), (3, 3)], 4, 4)
    with pytest.raises(FamilyError, match="column"):
        make_mterm(6, [(0, 0), (1, 0), (2, 2)], 4, 4)
    with pytest.raises(FamilyError, match="overlap"):
        make_box(4, [0], [0], [1], [2], 1)
    with pytest.raises(FamilyError):
        make_nonneg(4, 0, 0, 5, 1)


def test_box_single_cell():
    g = make_box(4, P1=[0], P2=[], Q1=[], Q2=[0], beta=1)
    assert g.weights == {(0, 0): 1}
    assert expand_generic(g).is_trivial()


def test_box_samples_valid():
    for g in enumerate_family("box-samples", 5, samples=30, seed=3):
        assert all(evaluate_at_vertex(g, s) >= 0 for s in PERMS[5])


def test_mterm_valid_n6():
    g = make_mterm(6, [(0, 1), (1, 2), (2, 0)], 3, 3)
    assert min(evaluate_at_vertex(g, s) for s in PERMS[6]) == 0


def test_counts():
    assert count_family("nonneg", 6) == 450 == nonneg_formula(6)
    assert count_family("nonneg", 4) == 72 == nonneg_formula(4)
    assert count_family("nonneg", 5) == 200
    assert count_family("mterm", 6, 3) == 21600 == family_formula_term(6, 3)
    # the triple family has no symmetry to quotient, so it counts twice the formula term
    assert count_family("triple", 6) == 14400
    assert family_formula_term(6, 2) == 7200


def test_enumerate_guards():
    with pytest.raises(FamilyError):
        list(enumerate_family("triple", 5))
    with pytest.raises(FamilyError):
        list(enumerate_family("mterm", 6, 4))
    with pytest.raises(FamilyError):
        list(enumerate_family("bogus", 6))


def test_certify_nonneg_n5():
    cert = certify(make_nonneg(5, 0, 0, 1, 1), mode="exact")
    assert cert.valid and cert.verdict == "facet"
    assert cert.tight_affine_dim == 76 and cert.polytope_dim == 77


def test_nonneg_n5_single_orbit():
    # every nonneg instance is a row/column relabeling of the certified one,
    # and relabelings permute the vertex set, so all are facets
    base = make_nonneg(5, 0, 0, 1, 1)
    orbit = set()
    for rp in itertools.permutations(range(5)):
        for cp in itertools.permutations(range(5)):
            w = {(rp[i], cp[j]): v for (i, j), v in base.weights.items()}
            orbit.add(GenericInequality(5, w, 1).key())
    fam = {g.key() for g in enumerate_family("nonneg", 5)}
    assert fam <= orbit and len(fam) == 200
    rng = random.Random(11)
    for g in rng.sample(list(enumerate_family("nonneg", 5)), 10):
        assert certify(g).verdict == "facet"


def test_certify_triple_n6():
    cert = certify(make_triple(6, 0, 0, 1, 1, 2, 2))
    assert cert.verdict == "facet" and cert.tight_affine_dim == 205


def test_certify_trivial_and_invalid_and_face():
    cert = certify(GenericInequality(4, {(0, 0): 1}, 1))
    assert cert.valid and cert.degenerate and cert.tight_count == 24
    assert cert.verdict == "valid-not-supporting"
    bad = LinearInequality(4, {}, {(flat(0, 0, 4), flat(1, 1, 4)): Fraction(-1)}, Fraction(0))
    assert certify(bad).verdict == "invalid"
    face = certify(GenericInequality(5, {(0, 0): 1}, 0))
    assert face.verdict == "face" and face.tight_affine_dim < 76


def test_classify_partition_and_tight_set():
    g = make_mterm(6, [(0, 0), (1, 1), (2, 2)], 3, 3)
    counts = {}
    for s in PERMS[6]:
        lab = classify_vertex(g, s)
        counts[lab] = counts.get(lab, 0) + 1
        assert (lab == "S") == (evaluate_at_vertex(g, s) == 0)
    assert sum(counts.values()) == 720
    assert counts["T1"] > 0 and counts["T2,3"] > 0
    assert all(k == "S" or k == "T1" or k.startswith(("T2,", "T3,")) for k in counts)
    ident = PERMS[6][0]
    assert classify_vertex(g, ident) == "T2,3"
