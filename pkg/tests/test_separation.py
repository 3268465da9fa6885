import random
from collections import Counter

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import to_nx
from lemma_cases import (TAGS, Case, articulation, bramble_case, check_outcome, gapped, ladder,
                         suite)
from orchardkit.errors import InvalidInput
from orchardkit.graph import Graph
from orchardkit.oracles import bramble_order_exact
from orchardkit.orchards import Orchard, Section, Tree, path_orchard, sections
from orchardkit.separation import (Thresholds, separate_full, separate_orchards, separate_reach,
                                   separate_section, thresholds_eval)

SMALL = Thresholds.of(f_sep=1, g_sep=1)


# ------------------------------------------------------------------ thresholds

def test_threshold_values():
    f, g, f58, g58 = thresholds_eval(1, 1)
    assert (f, g, g58) == (81, 6561, 33210)
    assert f58 == 33210 * 33211 + 33210


def test_thresholds_grow_exactly():
    f, g, _, g58 = thresholds_eval(1, 2)
    assert f == (2 * 4 ** 4 + 1) ** 2 * 64 and g == f * f
    assert g58 == (5 * f + 5 * g) ** 2


def test_threshold_overrides():
    b = Thresholds.of(f_sep=1, g_sep=2).at(1, 1)
    assert (b.f_sep, b.g_sep, b.g_58) == (1, 2, 33210)
    assert b.z == b.f_58 - 15 * (b.g_58 + 1)
    assert Thresholds.of(f_sep=0, g_sep=0, f_58=0, g_58=0).at(5, 5).z == 0
    with pytest.raises(InvalidInput):
        Thresholds.of(h=3)
    with pytest.raises(InvalidInput):
        Thresholds.of(f_sep=-1)
    with pytest.raises(InvalidInput):
        thresholds_eval(0, 1)


# ------------------------------------------------------------------ examples

def test_no_edges_gives_empty_sees_cutset():
    g, r, r2 = ladder(3, [])
    out = separate_orchards(g, r, r2, 1, 1)
    assert out.tag == "sees-cutset" and out.X == frozenset() and out.seen_sections == ()


def test_two_joins_give_many_orchards():
    g, r, r2 = ladder(3, [(0, 0), (2, 2)])
    out = separate_orchards(g, r, r2, 1, 1, SMALL)
    assert out.tag == "many-orchards" and out.summary()["shape"] == [2, 1]
    assert check_outcome(Case("sep55", "", g, r, r2, 1, 1, SMALL), out) == []


def test_vertex_seeing_everything_enters_x():
    g = Graph(4, [(0, 1), (1, 2), (3, 0), (3, 1), (3, 2)])
    r, r2 = path_orchard(g, range(3)), path_orchard(g, [3])
    out = separate_orchards(g, r, r2, 1, 1, Thresholds.of(f_sep=0, g_sep=0))
    assert out.X == {3} and out.seen_sections == ()
    # one vertex in X is already more than f=0 allows
    assert not out.within_bound


def test_reach_across_components_is_empty():
    g, r, r2 = ladder(4, [])
    out = separate_reach(g, r, r2, 1, 2)
    assert out.tag == "reach-cutset" and out.X == frozenset() and out.reached_sections == ()


def test_articulation_vertex_is_the_cut():
    g, r, r2 = articulation(3)
    out = separate_reach(g, r, r2, 1, 2)
    assert out.X == {6} and out.reached_sections == ()
    rest = to_nx(g, set(range(g.n)) - {6})
    assert not any(nx.has_path(rest, u, v) for u in r2.vertices() for v in r.vertices())


def test_zero_thresholds_many_paths_give_orchards():
    g, r, r2 = ladder(5, [(i, i) for i in range(5)])
    out = separate_reach(g, r, r2, 1, 1, Thresholds.of(f_sep=0, g_sep=0))
    assert out.tag == "many-orchards"
    case = Case("sep56", "", g, r, r2, 1, 1, Thresholds.of(f_sep=0, g_sep=0))
    assert check_outcome(case, out) == []


def test_single_tree_section_is_trivial():
    g, r = gapped(4, [1], [(0, 3)])
    for s in sections(r):
        out = separate_section(g, r, s, 1, 1)
        assert out.X == frozenset() and len(out.reached_sections) <= 3 + 1


def test_vertical_section_of_isolated_orchard():
    host = Graph(5, [(0, 1), (2, 3), (0, 4), (4, 2)])
    o = Orchard(host, ((0, 1), (2, 3)), (Tree.of([(0, 4), (4, 2)]),))
    secs = sections(o)
    k = next(i for i, s in enumerate(secs) if s.kind == "vertical")
    out = separate_section(host, o, secs[k], 1, 2)
    assert out.X == frozenset()
    # the stem vertex 4 touches the sections holding 0 and 2
    expect = {i for i, s in enumerate(secs) if {0, 2} & set(s.vertices)}
    assert set(out.reached_sections) == expect


def test_dense_horizontal_section_gives_orchards():
    g, r = gapped(10, [0, 1, 2, 3, 9], [(5, 0), (6, 1), (7, 2)])
    secs = sections(r)
    s = next(s for s in secs if len(s.vertices) > 1)
    out = separate_section(g, r, s, 1, 1, Thresholds.of(f_sep=0, g_sep=0))
    assert out.tag == "many-orchards" and len(out.orchards) == 2


def test_full_disconnected_is_empty_cutset():
    g, r, r2 = ladder(3, [])
    out = separate_full(g, r, r2, 1, 2)
    assert out.tag == "component-cutset" and out.X == frozenset() and out.counts == (0,)


def test_full_degraded_section_cutsets_are_out_of_bound():
    # with zero thresholds adjacent sections still reach each other: out-degree 1 > 0
    g, r, r2 = ladder(2, [])
    out = separate_full(g, r, r2, 1, 1, Thresholds.of(f_sep=0, g_sep=0))
    assert out.tag == "component-cutset" and out.max_outdegree == 1
    assert not out.within_bound


def test_full_cut_vertex():
    g, r, r2 = articulation(4)
    out = separate_full(g, r, r2, 1, 2)
    assert out.tag == "component-cutset" and out.X == {8} and out.within_bound


@pytest.mark.parametrize("L", [9, 10, 11, 12])
def test_full_bramble_order_two(L):
    g, r, r2 = bramble_case(L)
    th = Thresholds.of(f_sep=100, g_sep=100, f_58=10 ** 6, g_58=10 ** 6, z=1)
    out = separate_full(g, r, r2, 1, 2, th)
    assert out.tag == "bramble"
    assert out.order == bramble_order_exact(g, out.bramble) >= 2


# ------------------------------------------------------------------ errors

def test_overlapping_orchards_rejected():
    g = Graph(3, [(0, 1), (1, 2)])
    r = path_orchard(g, range(3))
    with pytest.raises(InvalidInput, match="overlap"):
        separate_orchards(g, r, path_orchard(g, [1]), 1, 1)


def test_too_many_paths_rejected():
    host = Graph(5, [(0, 1), (2, 3), (0, 4), (4, 2)])
    o = Orchard(host, ((0, 1), (2, 3)), (Tree.of([(0, 4), (4, 2)]),))
    with pytest.raises(InvalidInput, match="more than m"):
        separate_section(host, o, sections(o)[0], 1, 1)


def test_foreign_section_rejected():
    g, r = gapped(6, [0, 2, 5], [])
    with pytest.raises(InvalidInput, match="not a section"):
        separate_section(g, r, Section("horizontal", (3, 4), ("gap", 0, 9)), 1, 1)


# ------------------------------------------------------------------ crafted suite

CASES = suite()


@pytest.mark.parametrize("case", CASES, ids=[f"{c.lemma}-{c.name}" for c in CASES])
def test_crafted_witnesses_revalidate(case):
    out = case.run()
    assert check_outcome(case, out) == []
    assert case.run() == out


def test_crafted_suite_reaches_every_tag():
    seen = Counter((c.lemma, c.run().tag) for c in CASES)
    for lemma, tags in TAGS.items():
        for tag in tags:
            assert seen[(lemma, tag)] >= 3, (lemma, tag)


# ------------------------------------------------------------------ properties

@st.composite
def ladder_cases(draw):
    L = draw(st.integers(2, 5))
    pairs = [(i, j) for i in range(L) for j in range(L)]
    joins = draw(st.lists(st.sampled_from(pairs), max_size=5, unique=True))
    f = draw(st.integers(0, 3))
    gg = draw(st.integers(0, 3))
    m = draw(st.integers(1, 2))
    lemma = draw(st.sampled_from(["sep55", "sep56", "sep58"]))
    g, r, r2 = ladder(L, joins)
    return Case(lemma, "prop", g, r, r2, 1, m, Thresholds.of(f_sep=f, g_sep=gg))


@settings(max_examples=40)
@given(ladder_cases())
def test_random_ladders_structural_claims(case):
    out = case.run()
    assert check_outcome(case, out, strict=False) == []


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6))
def test_random_sections_structural_claims(seed):
    rng = random.Random(seed)
    L = rng.randint(4, 10)
    pos = sorted(rng.sample(range(L), rng.randint(1, min(5, L))))
    chords = {tuple(rng.sample(range(L), 2)) for _ in range(rng.randint(0, 3))}
    chords = [(u, v) for u, v in chords if abs(u - v) > 1]
    g, r = gapped(L, pos, chords)
    k = rng.randrange(len(sections(r)))
    case = Case("sep57", "prop", g, r, k, 1, rng.randint(1, 2),
                Thresholds.of(f_sep=rng.randint(0, 2), g_sep=rng.randint(0, 2)))
    assert check_outcome(case, case.run(), strict=False) == []
