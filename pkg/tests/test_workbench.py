import pytest

from utils.census import PAPER_MODE
from utils.config import Settings
from utils.workbench import Workbench


@pytest.fixture
def bench(m33, m446, raw_tables):
    b = Workbench()
    b._m33, b._m446, b._raw = m33, m446, raw_tables
    return b


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("MAPWORK_JOBS", "3")
    monkeypatch.setenv("MAPWORK_LOG_LEVEL", "debug")
    s = Settings()
    assert s.DEFAULT_JOBS == 3
    assert s.LOG_LEVEL == "DEBUG"
    assert s.GOLDEN_PATH.endswith("golden_tables.json")


def test_measured_counts_meet_expectations(bench, golden):
    measured = bench.measured()
    for name, value in measured.items():
        assert golden.expectations[name] == value, name


def test_sources(bench, golden):
    assert bench.tables("golden").white == golden.reduced.white
    assert bench.tables("computed").stage == "reduced"
    with pytest.raises(ValueError):
        bench.tables("elsewhere")
    with pytest.raises(ValueError):
        bench.catalog("m44")


def test_with_rules_reuses_catalogs(bench):
    other = bench.with_rules("runs", "none", None)
    assert other.m33() is bench.m33()
    assert other.reduced_tables().white != bench.reduced_tables().white


def test_computed_tables_match_published(bench):
    report = bench.compare()
    assert report.bijection.level in ("exact", "multiset")
    for stage in report.stages:
        assert stage.summary()["black"] == {"match": 40}, stage.stage
    assert {f.status for f in report.figures} == {"match", "erratum"}
    assert report.ok


def test_compare_censuses_both_table_sets(bench):
    report = bench.compare(census_mode=PAPER_MODE)
    stage = report.census
    assert stage is not None
    assert stage.golden.face_histogram == {7: 11218, 8: 4624, 9: 525, 10: 17}
    assert stage.golden.fork_count == 14
    assert stage.computed.total_vectors == 2 ** stage.computed.fork_count
    data = report.to_dict()["census"]
    assert set(data) == {"mode", "summary", "forks", "face_histogram", "genus", "obstructions"}
    assert len(data["genus"]) == 5
    faces = {e.name: e for e in report.expectations}["faces"]
    assert faces.actual == [7, 8, 9, 10]
    assert not faces.ok
