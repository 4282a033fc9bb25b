import json
import random

import pytest

from utils.census import PAPER_MODE, RIBBON_MODE, detect_forks, incidence_from_tables, run_census
from utils.config import settings
from utils.errors import CorrespondenceError, IntegrityError
from utils.golden import (
    EXACT,
    GIVEN,
    Correspondence,
    FigureCase,
    bundle_from_dict,
    check_expectations,
    check_fork_figures,
    compare,
    compare_census,
    find_bijection,
    load_bundle,
    parse_correspondence,
    relabel_tables,
    row_status,
    table_statistics,
)
from utils.orders import CyclicWord, Tables


def shuffled_copy(tables, seed):
    """Rename every label to W/B ids and rotate each word"""
    rng = random.Random(seed)
    whites, blacks = list(tables.white), list(tables.black)
    rng.shuffle(whites)
    rng.shuffle(blacks)
    c = Correspondence(
        {label: f"W{i + 1:02d}" for i, label in enumerate(whites)},
        {label: f"B{i + 1:02d}" for i, label in enumerate(blacks)},
    )
    renamed = relabel_tables(tables, c)

    def rotate(word):
        k = rng.randrange(len(word)) if len(word) else 0
        return CyclicWord(word.letters[k:] + word.letters[:k])

    return Tables(
        {k: rotate(v) for k, v in renamed.white.items()},
        {k: rotate(v) for k, v in renamed.black.items()},
        tables.stage,
    ), c


def test_published_rows(golden):
    assert str(golden.raw.white["19"]) == "16,8,7,8',16,8,7,8'"
    assert golden.raw.white["1"] == CyclicWord.parse("17,1',17,4',4'")
    assert golden.raw.black["3"] == CyclicWord.parse("22,23,23")
    assert golden.reduced.white["1"] == CyclicWord.parse("17,1',17,4'")
    assert golden.table(4) is golden.reduced.black


def test_published_statistics(golden):
    raw = table_statistics(golden.raw)
    reduced = table_statistics(golden.reduced)
    assert raw["white_rows"] == 23
    assert raw["black_rows"] == 40
    assert raw["white_letters"] == 136
    assert raw["white_lengths"][8] == 2
    assert reduced["white_letters"] == 104
    assert reduced["black_letters"] == 104
    assert reduced["black_lengths"] == {2: 16, 3: 24}


def test_bundle_expectations(golden):
    assert golden.expectations["m33"] == 23
    assert golden.expectations["m446"] == 40
    assert golden.expectations["forks"] == 14
    assert len(golden.fork_figures) == 14


def test_bundle_from_file(tmp_path, golden):
    path = tmp_path / "bundle.json"
    data = {"raw": golden.raw.to_dict(), "reduced": golden.reduced.to_dict(), "expectations": {"m33": 23}}
    path.write_text(json.dumps(data), encoding="utf-8")
    bundle = load_bundle(str(path))
    assert bundle.raw.white == golden.raw.white
    assert bundle.fork_figures == ()
    assert bundle.path == str(path)


def test_parse_correspondence():
    text = "# ours,label\nW01,1\n\nB01,1'\nB02, 2\n"
    c = parse_correspondence(text, ["W01"], ["B01", "B02"])
    assert c.white == {"W01": "1"}
    assert c.black == {"B01": "1'", "B02": "2"}
    assert parse_correspondence(c.to_csv()) == c


@pytest.mark.parametrize("text,line", [
    ("W01,1\nW02\n", 2),
    ("W01,1\nW02,1\n", 2),
    ("W01,1\n# comment\nW01,2\n", 3),
    ("X01,1\n", 1),
    ("W01,\n", 1),
])
def test_correspondence_errors_name_the_line(text, line):
    with pytest.raises(CorrespondenceError) as info:
        parse_correspondence(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_correspondence_unknown_ids():
    with pytest.raises(CorrespondenceError):
        parse_correspondence("W99,1\n", ["W01"], [])


def test_correspondence_must_be_injective():
    with pytest.raises(CorrespondenceError):
        Correspondence({"W01": "1", "W02": "1"}, {})


def test_row_status():
    assert row_status(CyclicWord.parse("a,b,c"), CyclicWord.parse("c,a,b")) == "match"
    assert row_status(CyclicWord.parse("a,b,c"), CyclicWord.parse("a,c,b")) == "multiset"
    assert row_status(CyclicWord.parse("a,b"), CyclicWord.parse("a,c")) == "diff"
    assert row_status(None, CyclicWord.parse("a")) == "missing"


def test_bijection_recovers_a_renaming(golden):
    ours, c = shuffled_copy(golden.raw, seed=7)
    bijection = find_bijection(ours, golden.raw)
    assert bijection.level == EXACT
    renamed = relabel_tables(ours, bijection.correspondence)
    for label, word in golden.raw.black.items():
        assert renamed.black[label] == word
    for label, word in golden.raw.white.items():
        assert renamed.white[label].multiset() == word.multiset()


def test_self_comparison_has_no_differences(golden):
    raw, _ = shuffled_copy(golden.raw, seed=11)
    reduced, _ = shuffled_copy(golden.reduced, seed=11)
    report = compare(raw, reduced, golden)
    assert report.ok
    assert report.census is None
    assert report.to_dict()["census"] is None
    for stage in report.stages:
        assert stage.summary()["black"] == {"match": 40}
        assert all(r.status in ("match", "multiset") for r in stage.rows)


def test_given_correspondence(golden):
    raw, c = shuffled_copy(golden.raw, seed=3)
    reduced, _ = shuffled_copy(golden.reduced, seed=3)
    report = compare(raw, reduced, golden, correspondence=c.inverse())
    assert report.bijection.level == GIVEN
    assert report.ok
    assert report.to_dict()["ok"] is True


def test_wrong_correspondence_shows_differences(golden):
    raw, c = shuffled_copy(golden.raw, seed=5)
    reduced, _ = shuffled_copy(golden.reduced, seed=5)
    inverse = c.inverse()
    swapped = dict(inverse.black)
    a, b = "B01", "B02"
    swapped[a], swapped[b] = swapped[b], swapped[a]
    report = compare(raw, reduced, golden, correspondence=Correspondence(inverse.white, swapped))
    assert not report.ok
    assert report.stages[0].differing()


def test_fork_figure_errata(golden, golden_incidence):
    checks = {c.case: c for c in check_fork_figures(golden.fork_figures, detect_forks(golden_incidence))}
    errata = {case for case, c in checks.items() if c.status == "erratum"}
    assert errata == {"8c", "8e", "8n", "9l", "9m"}
    assert all(c.status == "match" for case, c in checks.items() if case not in errata)
    assert checks["8e"].recomputed == "b:20 -> w:16 -> {b:19,b:19'}"
    assert checks["9m"].recomputed == "w:11 -> b:21 -> {w:11,w:15}"


def test_unmatched_figure(golden_incidence):
    fake = FigureCase("0z", ("w", "5"), ("b", "4"), (("b", "5"), ("b", "5'")))
    [check] = check_fork_figures([fake], detect_forks(golden_incidence))
    assert check.status == "unmatched"
    assert check.recomputed is None


def test_expectations():
    checks = check_expectations({"m33": 23, "faces": [9, 7], "forks": 14}, {"m33": 23, "faces": [7, 9]})
    assert [c.name for c in checks] == ["faces", "m33"]
    assert all(c.ok for c in checks)
    [bad] = check_expectations({"m446": 40}, {"m446": 39})
    assert not bad.ok


def test_bundle_rejects_bad_vertex():
    with pytest.raises(IntegrityError):
        bundle_from_dict({
            "raw": {"white": {}, "black": {}},
            "reduced": {"white": {}, "black": {}},
            "fork_figures": [{"case": "x", "at": "q:1", "from": "b:1", "options": []}],
        })


@pytest.fixture(scope="module")
def published_census(golden_incidence):
    return run_census(golden_incidence, mode=PAPER_MODE)


def test_census_stage_of_a_renamed_copy(golden, published_census):
    reduced, c = shuffled_copy(golden.reduced, seed=13)
    ours = run_census(incidence_from_tables(reduced), mode=PAPER_MODE)
    stage = compare_census(ours, published_census, c.inverse())
    assert stage.histogram_match
    assert stage.only_computed == ()
    assert stage.only_golden == ()
    data = stage.to_dict()
    assert data["forks"]["computed"] == data["forks"]["golden"] == 14
    assert data["face_histogram"]["match"] is True
    assert [row["convention"] for row in data["genus"]] == list(settings.EDGE_CONVENTIONS)
    white = data["genus"][0]
    assert white["computed"] == white["golden"] == {
        "edges": 104, "genus": {"7": 18, "8": 17.5, "9": 17, "10": 16.5},
    }


def test_census_stage_without_a_correspondence_lists_every_site(golden, published_census):
    reduced, _ = shuffled_copy(golden.reduced, seed=13)
    ours = run_census(incidence_from_tables(reduced), mode=PAPER_MODE)
    stage = compare_census(ours, published_census, Correspondence({}, {}))
    assert len(stage.only_computed) == len(stage.only_golden) == 14
    assert all("W" in site or "B" in site for site in stage.only_computed)


def test_census_stage_needs_one_mode(golden, published_census):
    ribbon = run_census(incidence_from_tables(golden.reduced), mode=RIBBON_MODE)
    with pytest.raises(ValueError):
        compare_census(ribbon, published_census, Correspondence({}, {}))


def test_compare_carries_the_census_stage(golden, published_census):
    raw, c = shuffled_copy(golden.raw, seed=3)
    reduced, _ = shuffled_copy(golden.reduced, seed=3)
    ours = run_census(incidence_from_tables(reduced), mode=PAPER_MODE)
    report = compare(raw, reduced, golden, correspondence=c.inverse(), censuses=(ours, published_census))
    assert report.census is not None
    assert report.census.histogram_match
    assert report.to_dict()["census"]["mode"] == PAPER_MODE
    assert report.ok
