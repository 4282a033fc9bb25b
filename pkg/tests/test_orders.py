import random
from collections import Counter

import networkx as nx
import pytest

from utils.catalog import deletion_events
from utils.errors import StructuralAnomaly
from utils.orders import (
    CyclicWord,
    DualDigraph,
    DualEdge,
    Tables,
    eulerian_circuit,
    is_eulerian_circuit,
    loopless_dual,
    reduce_black_word,
    reduce_tables,
    reduce_white_word,
)
from utils.quad import quadrangulate, separating_edges


def w(text):
    return CyclicWord.parse(text)


def test_cyclic_word_equality_is_up_to_rotation():
    assert w("a,b,c") == w("b,c,a")
    assert w("a,b,c") != w("a,c,b")
    assert hash(w("a,b,c")) == hash(w("c,a,b"))
    assert str(w(" 1, 1' ,2")) == "1,1',2"


def test_shape_ignores_names_and_rotation():
    assert w("x,y,y").shape() == w("b,b,a").shape()
    assert w("x,y,z").shape() != w("x,y,y").shape()


def test_loopless_dual_degrees(m33):
    for c in m33:
        q = quadrangulate(c.map)
        d = loopless_dual(q)
        assert d.degrees == (4, 4, 4, 4)
        assert len(d.edges) == len(separating_edges(q))
        assert len(d.edges) + d.loops_removed == 8


def test_eulerian_circuit_of_each_white_class(m33):
    for c in m33:
        d = loopless_dual(quadrangulate(c.map))
        circuit = eulerian_circuit(d)
        assert is_eulerian_circuit(d, circuit)
        assert circuit[0].edge == min(e.edge for e in d.edges)


def test_eulerian_circuit_is_deterministic_without_rng(m33):
    d = loopless_dual(quadrangulate(m33.get("W05").map))
    assert eulerian_circuit(d) == eulerian_circuit(d)


def test_two_cycle_circuit():
    d = DualDigraph((0, 1), (DualEdge(0, 0, 1), DualEdge(1, 1, 0)), 0)
    circuit = eulerian_circuit(d)
    assert [e.edge for e in circuit] == [0, 1]


def test_disconnected_dual_is_an_anomaly():
    d = DualDigraph(
        (0, 1, 2, 3),
        (DualEdge(0, 0, 1), DualEdge(1, 1, 0), DualEdge(2, 2, 3), DualEdge(3, 3, 2)),
        0,
    )
    with pytest.raises(StructuralAnomaly):
        eulerian_circuit(d)


def _random_eulerian_digraph(rng):
    n = rng.randint(2, 6)
    edges = []
    for _ in range(rng.randint(1, 4)):
        cycle = rng.sample(range(n), rng.randint(2, n))
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            edges.append(DualEdge(len(edges), a, b))
    return DualDigraph(tuple(range(n)), tuple(edges), 0)


def test_eulerian_circuit_against_networkx(rng):
    for _ in range(50):
        d = _random_eulerian_digraph(rng)
        g = nx.MultiDiGraph()
        g.add_edges_from((e.tail, e.head) for e in d.edges)
        if not nx.is_eulerian(g):
            with pytest.raises(StructuralAnomaly):
                eulerian_circuit(d)
            continue
        for tie_break in (None, random.Random(rng.random())):
            circuit = eulerian_circuit(d, tie_break)
            assert is_eulerian_circuit(d, circuit)
            assert len(circuit) == g.number_of_edges()


def test_raw_white_words(raw_tables):
    lengths = sorted(len(x) for x in raw_tables.white.values())
    assert sum(lengths) == 136
    assert lengths.count(8) == 2
    assert min(lengths) == 4
    assert max(lengths) == 8


def test_raw_black_words(raw_tables):
    assert len(raw_tables.black) == 40
    assert all(len(x) == 3 for x in raw_tables.black.values())
    assert sum(len(x) for x in raw_tables.black.values()) == 120


def test_white_letters_match_deletion_events(m33, m446, raw_tables):
    events = deletion_events(m33)
    for c in m33:
        expected = Counter(m446.find(e.code).id for e in events if e.white_id == c.id)
        assert raw_tables.white[c.id].multiset() == expected, c.id


def test_reduced_totals(reduced_tables):
    assert sum(len(x) for x in reduced_tables.white.values()) == 104
    assert sum(len(x) for x in reduced_tables.black.values()) == 104


def test_white_reduction_reproduces_published_rows(golden):
    for label, raw in golden.raw.white.items():
        assert reduce_white_word(raw) == golden.reduced.white[label], label


def test_black_reduction_reproduces_published_rows(golden):
    for label, raw in golden.raw.black.items():
        assert reduce_black_word(raw, label, golden.raw.white) == golden.reduced.black[label], label


def test_reduction_examples(golden):
    assert str(reduce_white_word(golden.raw.white["19"])) == "16,8,7,8'"
    assert reduce_white_word(golden.raw.white["2"]) == w("3',12'")
    assert reduce_black_word(golden.raw.black["4'"], "4'", golden.raw.white) == w("1,5")
    assert reduce_black_word(golden.raw.black["17"], "17", golden.raw.white) == w("8,1,1")


def test_mutual_adjacency_rule_disagrees_on_row_16(golden):
    raw = golden.raw.black["16"]
    assert reduce_black_word(raw, "16", golden.raw.white, rule="mutual-adjacency") == w("19,21")
    assert golden.reduced.black["16"] == w("19,21,21")


def test_reduction_is_idempotent(golden):
    once = reduce_tables(golden.raw)
    twice = Tables(
        {k: reduce_white_word(v) for k, v in once.white.items()},
        {k: reduce_black_word(v, k, once.white) for k, v in once.black.items()},
        "reduced",
    )
    assert twice.white == once.white
    assert twice.black == once.black
    assert reduce_tables(once) is once


def test_single_letter_words():
    assert reduce_white_word(w("a,a,a")) == w("a")
    assert reduce_white_word(w("a")) == w("a")
    assert reduce_white_word(CyclicWord(())) == CyclicWord(())


def test_tables_dict_roundtrip(golden):
    again = Tables.from_dict(golden.reduced.to_dict())
    assert again.white == golden.reduced.white
    assert again.black == golden.reduced.black
    assert again.stage == "reduced"
