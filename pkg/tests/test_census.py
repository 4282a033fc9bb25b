from fractions import Fraction

import pytest

from utils.census import (
    PAPER_MODE,
    RIBBON_MODE,
    ChoiceVector,
    Tracer,
    assemble_incidence,
    count_cycles,
    detect_forks,
    genus_estimate,
    incidence_from_tables,
    label_key,
    run_census,
    trace_faces,
)
from utils.errors import IntegrityError, StructuralAnomaly, UnsupportedForkError
from utils.orders import CyclicWord


def words(**rows):
    return {k: CyclicWord.parse(v) for k, v in rows.items()}


@pytest.fixture(scope="module")
def directed_report(golden_incidence):
    return run_census(golden_incidence, mode=PAPER_MODE)


@pytest.fixture(scope="module")
def ribbon_report(golden_incidence):
    return run_census(golden_incidence, mode=RIBBON_MODE)


def test_label_order():
    labels = ["10", "2", "1'", "1", "22'", "3"]
    assert sorted(labels, key=label_key) == ["1", "1'", "2", "3", "10", "22'"]


def test_incidence_of_golden_tables(golden_incidence):
    assert len(golden_incidence.vertices) == 63
    assert golden_incidence.mismatches == ()
    counts = golden_incidence.edge_counts()
    assert counts["white"] == 104
    assert counts["black"] == 104
    assert counts["max-per-pair"] == 104


def test_unknown_letter_is_rejected():
    with pytest.raises(IntegrityError):
        assemble_incidence(words(a="x"), words(x="b"))


def test_one_sided_adjacency_is_rejected():
    with pytest.raises(IntegrityError):
        assemble_incidence(words(a="x", c="y"), words(x="a", y="a"))


def test_unequal_counts_are_recorded(golden):
    g = incidence_from_tables(golden.raw)
    assert g.mismatches
    assert (("w", "2"), ("b", "3'"), 2, 4) in g.mismatches


def test_golden_forks(golden_incidence):
    forks = detect_forks(golden_incidence)
    assert len(forks) == 14
    assert sum(1 for s in forks if s.at[0] == "w") == 7
    assert sum(1 for s in forks if s.at[0] == "b") == 7
    first = forks[0]
    assert first.at == ("w", "1")
    assert first.source == ("b", "17")
    assert set(first.options) == {("b", "1'"), ("b", "4'")}


def test_triple_occurrence_is_unsupported():
    g = assemble_incidence(words(a="x,y,x,y,x,y"), words(x="a,a,a", y="a,a,a"))
    with pytest.raises(UnsupportedForkError):
        detect_forks(g)


def test_single_edge_has_one_walk():
    g = assemble_incidence(words(a="x"), words(x="a"))
    trace = trace_faces(g, ChoiceVector(()))
    assert trace.face_count == 1
    assert trace.bijective


def test_four_cycle_has_two_walks():
    g = assemble_incidence(words(a="b,d", c="b,d"), words(b="a,c", d="a,c"))
    for mode in (PAPER_MODE, RIBBON_MODE):
        trace = trace_faces(g, ChoiceVector(()), mode)
        assert trace.face_count == 2
        assert sorted(len(walk) for walk in trace.walks) == [4, 4]


def test_choice_vector_length_is_checked(golden_incidence):
    with pytest.raises(ValueError):
        trace_faces(golden_incidence, ChoiceVector((0, 1)))


def test_choice_vector_index_roundtrip():
    c = ChoiceVector.from_index(0b1011, 5)
    assert c.bits == (1, 1, 0, 1, 0)
    assert c.index == 0b1011


def test_count_cycles_of_functional_graph():
    # 0 -> 1 -> 2 -> 1, 3 -> 3
    n, cycles = count_cycles([1, 2, 1, 3])
    assert n == 2
    assert sorted(map(sorted, cycles)) == [[1, 2], [3]]


def test_genus_estimates():
    assert genus_estimate(1, 2, 1).value == 1
    assert genus_estimate(2, 1, 1).value == 0
    assert genus_estimate(63, 104, 7).value == 18
    assert genus_estimate(63, 104, 9).value == 17


def test_genus_estimate_flags():
    half = genus_estimate(63, 104, 8)
    assert half.value == Fraction(35, 2)
    assert not half.integral
    assert half.to_dict()["flag"] == "non-integral"
    assert genus_estimate(4, 1, 3).to_dict()["flag"] == "negative"


def test_directed_census(directed_report):
    assert directed_report.fork_count == 14
    assert directed_report.total_vectors == 2 ** 14
    assert directed_report.vertex_count == 63
    # a fork node can reach only one of its two options
    assert directed_report.bijective_vectors == 0
    assert directed_report.parity_violations == 0
    assert directed_report.face_histogram == {7: 11218, 8: 4624, 9: 525, 10: 17}


def test_ribbon_census(ribbon_report):
    assert ribbon_report.total_vectors == 2 ** 14
    assert ribbon_report.bijective_vectors == 2 ** 14
    assert ribbon_report.parity_violations == 0
    assert ribbon_report.obstructions == ()
    assert ribbon_report.face_histogram == {7: 768, 9: 12800, 11: 2816}
    for faces, count in ribbon_report.face_histogram.items():
        assert faces % 2 == 1
        # only the XOR of the two bits of a parallel pair matters
        assert count % 2 ** 7 == 0
    for estimate in ribbon_report.genus_table["white"].values():
        assert estimate.valid


def test_report_dict(ribbon_report):
    data = ribbon_report.to_dict()
    assert "runtime_seconds" not in data
    assert data["expected"]["faces"] == [7, 9]
    assert sum(data["face_histogram"].values()) == 2 ** 14
    assert "runtime_seconds" in ribbon_report.to_dict(timing=True)


@pytest.mark.parametrize("jobs", [1, 4, 8])
@pytest.mark.parametrize("mode", [PAPER_MODE, RIBBON_MODE])
def test_census_does_not_depend_on_workers(golden_incidence, directed_report, ribbon_report, mode, jobs):
    reference = directed_report if mode == PAPER_MODE else ribbon_report
    parallel = run_census(golden_incidence, mode=mode, jobs=jobs, chunk=1000)
    assert parallel.to_dict() == reference.to_dict()


def test_ribbon_census_reports_obstructions(golden):
    report = run_census(incidence_from_tables(golden.raw), mode=RIBBON_MODE)
    assert report.obstructions
    assert report.face_histogram == {}
    assert report.to_dict()["obstructions"]


def test_ribbon_tracer_rejects_obstructions(golden):
    g = incidence_from_tables(golden.raw)
    with pytest.raises(StructuralAnomaly):
        Tracer.build(g, [], RIBBON_MODE)


def test_directed_census_of_raw_tables_is_unsupported(golden):
    with pytest.raises(UnsupportedForkError):
        run_census(incidence_from_tables(golden.raw), mode=PAPER_MODE)


def test_unknown_mode(golden_incidence):
    with pytest.raises(ValueError):
        run_census(golden_incidence, mode="spherical")


def test_published_face_counts_do_not_reproduce(directed_report, ribbon_report):
    directed = directed_report.to_dict()["expected"]
    assert not directed_report.matches_claim()
    assert directed["faces_match"] is False
    assert directed["faces_missing"] == []
    assert directed["faces_unexpected"] == [8, 10]

    ribbon = ribbon_report.to_dict()["expected"]
    assert not ribbon_report.matches_claim()
    assert ribbon["faces_missing"] == []
    assert ribbon["faces_unexpected"] == [11]


def test_claim_summary_sits_beside_the_published_values(directed_report):
    assert directed_report.genus_values("white") == [18, 17.5, 17, 16.5]
    assert directed_report.claim_summary() == (
        "faces [7, 8, 9, 10] (expected [7, 9]), "
        "genus under white edges [18, 17.5, 17, 16.5] (expected [17, 18])"
    )
