import logging
from typing import Any, Dict, List, Optional

from utils.catalog import Catalog, PairingReport, build_m33, build_m446, pair_primes
from utils.census import (
    PAPER_MODE,
    CensusReport,
    ForkSite,
    IncidenceGraph,
    detect_forks,
    incidence_from_tables,
    run_census,
)
from utils.config import settings
from utils.golden import ComparisonReport, Correspondence, GoldenBundle, compare, load_bundle, table_statistics
from utils.orders import Tables, compute_tables, reduce_tables
from utils.reports import load_tables

logger = logging.getLogger(__name__)

SOURCES = ("computed", "file", "golden")


class Workbench:
    def __init__(self, white_rule: Optional[str] = None, black_rule: Optional[str] = None,
                 shuffle_seed: Optional[int] = None, golden_path: Optional[str] = None):
        """Builds each stage of the pipeline once, on first use"""
        self.white_rule = white_rule or settings.WHITE_RULE
        self.black_rule = black_rule or settings.BLACK_RULE
        self.shuffle_seed = shuffle_seed
        self.golden_path = golden_path or settings.GOLDEN_PATH
        self._m33: Optional[Catalog] = None
        self._m446: Optional[Catalog] = None
        self._raw: Optional[Tables] = None
        self._reduced: Optional[Tables] = None
        self._golden: Optional[GoldenBundle] = None

    def with_rules(self, white_rule: str, black_rule: str, shuffle_seed: Optional[int]) -> "Workbench":
        """A workbench with other rules that reuses the catalogs already built"""
        other = Workbench(white_rule, black_rule, shuffle_seed, self.golden_path)
        other._m33, other._m446, other._golden = self._m33, self._m446, self._golden
        return other

    def m33(self) -> Catalog:
        """Get the plane-map catalog"""
        if self._m33 is None:
            self._m33 = build_m33()
        return self._m33

    def m446(self) -> Catalog:
        """Get the M(4,4,6) catalog"""
        if self._m446 is None:
            self._m446 = build_m446(self.m33())
        return self._m446

    def catalog(self, kind: str) -> Catalog:
        kind = kind.lower()
        if kind == "m33":
            return self.m33()
        if kind == "m446":
            return self.m446()
        raise ValueError(f"unknown catalog {kind!r}")

    def pairing(self) -> PairingReport:
        return pair_primes(self.m446())

    def raw_tables(self) -> Tables:
        if self._raw is None:
            self._raw = compute_tables(self.m33(), self.m446(), self.shuffle_seed)
        return self._raw

    def reduced_tables(self) -> Tables:
        if self._reduced is None:
            self._reduced = reduce_tables(self.raw_tables(), self.white_rule, self.black_rule)
        return self._reduced

    def golden(self) -> GoldenBundle:
        if self._golden is None:
            self._golden = load_bundle(self.golden_path)
        return self._golden

    def tables(self, source: str = "computed", path: Optional[str] = None) -> Tables:
        """Reduced tables from our pipeline, a JSON file, or the golden bundle"""
        if source == "computed":
            return self.reduced_tables()
        if source == "golden":
            return self.golden().reduced
        if source == "file":
            if not path:
                raise ValueError("a tables file is required for source 'file'")
            return reduce_tables(load_tables(path), self.white_rule, self.black_rule)
        raise ValueError(f"unknown source {source!r}")

    def incidence(self, source: str = "computed", path: Optional[str] = None) -> IncidenceGraph:
        return incidence_from_tables(self.tables(source, path))

    def forks(self, source: str = "computed", path: Optional[str] = None) -> List[ForkSite]:
        return detect_forks(self.incidence(source, path))

    def census(self, mode: str = PAPER_MODE, source: str = "computed", path: Optional[str] = None,
               jobs: Optional[int] = None, chunk: Optional[int] = None) -> CensusReport:
        jobs = jobs or settings.DEFAULT_JOBS
        return run_census(self.incidence(source, path), mode=mode, jobs=jobs, chunk=chunk)

    def measured(self) -> Dict[str, Any]:
        """Counts comparable to the bundle's expectations"""
        pairing = self.pairing()
        raw_stats = table_statistics(self.raw_tables())
        reduced_stats = table_statistics(self.reduced_tables())
        forks = self.forks()
        return {
            "m33": len(self.m33()),
            "m446": len(self.m446()),
            "pairs": len(pairing.pairs),
            "singletons": len(pairing.singletons),
            "forks": len(forks),
            "white_forks": sum(1 for s in forks if s.at[0] == "w"),
            "black_forks": sum(1 for s in forks if s.at[0] == "b"),
            "white_letters_raw": raw_stats["white_letters"],
            "white_letters_reduced": reduced_stats["white_letters"],
            "black_letters_reduced": reduced_stats["black_letters"],
        }

    def compare(self, correspondence: Optional[Correspondence] = None,
                census_mode: Optional[str] = None, jobs: Optional[int] = None) -> ComparisonReport:
        """
        Compare our tables with the bundle; errata in the fork figures are checked on the bundle itself.

        With a census mode both table sets are censused and the face expectation is checked on the bundle's.
        """
        actual = self.measured()
        censuses = None
        if census_mode:
            censuses = (
                self.census(mode=census_mode, source="computed", jobs=jobs),
                self.census(mode=census_mode, source="golden", jobs=jobs),
            )
            actual["faces"] = censuses[1].face_counts
        return compare(
            self.raw_tables(),
            self.reduced_tables(),
            self.golden(),
            correspondence=correspondence,
            actual=actual,
            forks=self.forks("golden"),
            censuses=censuses,
        )
