import csv
import io
import itertools
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from utils.census import CensusReport, ForkSite, Vertex, label_key, vertex_key, vertex_name
from utils.config import settings
from utils.errors import CorrespondenceError, IntegrityError
from utils.orders import CyclicWord, Tables

logger = logging.getLogger(__name__)

EXACT = "exact"
MULTISET = "multiset"
REFINEMENT = "refinement"
GIVEN = "given"


@dataclass(frozen=True)
class Correspondence:
    """Our id -> published label, one map per side"""
    white: Dict[str, str]
    black: Dict[str, str]

    def __post_init__(self):
        for side, mapping in (("white", self.white), ("black", self.black)):
            seen: Dict[str, str] = {}
            for ours, label in mapping.items():
                if label in seen:
                    raise CorrespondenceError(f"{side} label {label} is assigned to {seen[label]} and {ours}")
                seen[label] = ours

    def inverse(self) -> "Correspondence":
        return Correspondence(
            {v: k for k, v in self.white.items()},
            {v: k for k, v in self.black.items()},
        )

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        for ours in sorted(self.white):
            writer.writerow([ours, self.white[ours]])
        for ours in sorted(self.black):
            writer.writerow([ours, self.black[ours]])
        return out.getvalue()


def parse_correspondence(text: str, white_ids: Optional[Sequence[str]] = None,
                         black_ids: Optional[Sequence[str]] = None) -> Correspondence:
    """Parse ``our_id,label`` lines; W-ids are white and B-ids black, '#' starts a comment"""
    white: Dict[str, str] = {}
    black: Dict[str, str] = {}
    for line_no, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        if len(row) != 2:
            raise CorrespondenceError(f"expected 2 fields, got {len(row)}", line_no)
        ours, label = row[0].strip(), row[1].strip()
        if not ours or not label:
            raise CorrespondenceError("empty field", line_no)
        if ours.startswith("W"):
            target = white
        elif ours.startswith("B"):
            target = black
        else:
            raise CorrespondenceError(f"id {ours!r} is neither a white (W..) nor a black (B..) class", line_no)
        if ours in target:
            raise CorrespondenceError(f"id {ours} appears twice", line_no)
        if label in target.values():
            raise CorrespondenceError(f"label {label} appears twice on one side", line_no)
        target[ours] = label
    for side, known, got in (("white", white_ids, white), ("black", black_ids, black)):
        if known is not None:
            unknown = sorted(set(got) - set(known))
            if unknown:
                raise CorrespondenceError(f"unknown {side} ids {unknown}")
    return Correspondence(white, black)


def load_correspondence(path: str, white_ids=None, black_ids=None) -> Correspondence:
    with open(path, encoding="utf-8") as f:
        return parse_correspondence(f.read(), white_ids, black_ids)


def relabel_tables(t: Tables, c: Correspondence) -> Tables:
    """Rename keys and letters; ids without a label keep their own name"""
    return Tables(
        white={c.white.get(k, k): w.renamed(c.black) for k, w in t.white.items()},
        black={c.black.get(k, k): b.renamed(c.white) for k, b in t.black.items()},
        stage=t.stage,
    )


@dataclass(frozen=True)
class FigureCase:
    case: str
    at: Vertex
    source: Vertex
    options: Tuple[Vertex, Vertex]


@dataclass(frozen=True)
class GoldenBundle:
    raw: Tables
    reduced: Tables
    expectations: Dict[str, Any]
    fork_figures: Tuple[FigureCase, ...] = ()
    path: Optional[str] = field(default=None, compare=False)

    def table(self, which: int) -> Dict[str, CyclicWord]:
        return {
            1: self.raw.white,
            2: self.raw.black,
            3: self.reduced.white,
            4: self.reduced.black,
        }[which]


def _vertex(text: str) -> Vertex:
    side, _, label = text.partition(":")
    if side not in ("w", "b") or not label:
        raise IntegrityError(f"bad vertex reference {text!r}")
    return side, label


def bundle_from_dict(data: Mapping[str, Any], path: Optional[str] = None) -> GoldenBundle:
    figures = tuple(
        FigureCase(
            case=entry["case"],
            at=_vertex(entry["at"]),
            source=_vertex(entry["from"]),
            options=tuple(_vertex(o) for o in entry["options"]),
        )
        for entry in data.get("fork_figures", [])
    )
    return GoldenBundle(
        raw=Tables.from_dict({"stage": "raw", **data["raw"]}),
        reduced=Tables.from_dict({"stage": "reduced", **data["reduced"]}),
        expectations=dict(data.get("expectations", {})),
        fork_figures=figures,
        path=path,
    )


def load_bundle(path: Optional[str] = None) -> GoldenBundle:
    path = path or settings.GOLDEN_PATH
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    bundle = bundle_from_dict(data, path)
    logger.info(f"Loaded golden bundle from {path}: {len(bundle.raw.white)} white and {len(bundle.raw.black)} black rows")
    return bundle


# --- bijection search --------------------------------------------------------

Words = Dict[Vertex, Tuple[Vertex, ...]]


def _words(t: Tables) -> Words:
    words: Words = {}
    for k, w in t.white.items():
        words[("w", k)] = tuple(("b", x) for x in w.letters)
    for k, b in t.black.items():
        words[("b", k)] = tuple(("w", x) for x in b.letters)
    return words


def refine_colors(graphs: Sequence[Words], rounds: int = 10) -> List[Dict[Vertex, int]]:
    """Colour refinement run jointly so colours are comparable across graphs"""

    def pattern(word: Tuple[Vertex, ...]) -> Tuple[int, ...]:
        # Multiplicities only: white words depend on the circuit chosen
        return tuple(sorted(Counter(word).values()))

    signatures = [{v: (v[0], pattern(w)) for v, w in g.items()} for g in graphs]
    colors = _number_signatures(signatures)
    distinct = len({c for col in colors for c in col.values()})
    for i in range(rounds):
        signatures = [
            {v: (col[v], tuple(sorted(col[u] for u in g[v]))) for v in g}
            for g, col in zip(graphs, colors)
        ]
        colors = _number_signatures(signatures)
        now = len({c for col in colors for c in col.values()})
        logger.debug(f"refinement round {i + 1}: {now} colour classes")
        if now == distinct:
            break
        distinct = now
    return colors


def _number_signatures(signatures: Sequence[Dict[Vertex, Any]]) -> List[Dict[Vertex, int]]:
    table = {s: i for i, s in enumerate(sorted({s for sig in signatures for s in sig.values()}, key=repr))}
    return [{v: table[s] for v, s in sig.items()} for sig in signatures]


def _alignments(ours: Tuple[Vertex, ...], theirs: Tuple[Vertex, ...], level: str) -> Iterator[Tuple[Vertex, ...]]:
    if len(ours) != len(theirs):
        return
    if level == EXACT:
        seen = set()
        for i in range(len(theirs)):
            r = theirs[i:] + theirs[:i]
            if r not in seen:
                seen.add(r)
                yield r
    else:
        yield from sorted(set(itertools.permutations(theirs)), key=lambda p: [vertex_key(v) for v in p])


class _Search:
    """Backtracking over black vertices; each black choice fixes its whites"""

    def __init__(self, ours: Words, theirs: Words, level: str, budget: int):
        self.ours = ours
        self.theirs = theirs
        self.level = level
        self.budget = budget
        self.nodes = 0
        col_ours, col_theirs = refine_colors([ours, theirs])
        by_color: Dict[int, List[Vertex]] = {}
        for v in sorted(theirs, key=vertex_key):
            by_color.setdefault(col_theirs[v], []).append(v)
        self.candidates = {v: by_color.get(col_ours[v], []) for v in ours}
        self.blacks = sorted(
            (v for v in ours if v[0] == "b"),
            key=lambda v: (len(self.candidates[v]), vertex_key(v)),
        )
        self.target_multisets = {v: Counter(w) for v, w in theirs.items()}
        self.f: Dict[Vertex, Vertex] = {}
        self.used: Dict[Vertex, Vertex] = {}

    def feasible(self) -> bool:
        sides = Counter(v[0] for v in self.ours) == Counter(v[0] for v in self.theirs)
        return sides and all(self.candidates.values())

    def run(self) -> Optional[Dict[Vertex, Vertex]]:
        if not self.feasible():
            return None
        return dict(self.f) if self._assign(0) else None

    def _bind(self, x: Vertex, y: Vertex, trail: List[Vertex]) -> bool:
        if x in self.f:
            return self.f[x] == y
        if y in self.used or y not in self.candidates[x]:
            return False
        self.f[x] = y
        self.used[y] = x
        trail.append(x)
        return True

    def _undo(self, trail: List[Vertex]) -> None:
        for x in trail:
            del self.used[self.f.pop(x)]

    def _white_ok(self, x: Vertex) -> bool:
        """Images of the already-mapped blacks around x stay within the target multiset"""
        images = Counter(self.f[b] for b in self.ours[x] if b in self.f)
        target = self.target_multisets[self.f[x]]
        if any(images[y] > target[y] for y in images):
            return False
        if sum(images.values()) == len(self.ours[x]):
            return images == target
        return True

    def _assign(self, i: int) -> bool:
        if i == len(self.blacks):
            return True
        self.nodes += 1
        if self.nodes > self.budget:
            raise _BudgetExceeded()
        b = self.blacks[i]
        for g in self.candidates[b]:
            if g in self.used:
                continue
            for aligned in _alignments(self.ours[b], self.theirs[g], self.level):
                trail: List[Vertex] = []
                ok = self._bind(b, g, trail) and all(
                    self._bind(x, y, trail) for x, y in zip(self.ours[b], aligned)
                )
                if ok and all(self._white_ok(x) for x in set(self.ours[b])) and self._assign(i + 1):
                    return True
                self._undo(trail)
        return False


class _BudgetExceeded(Exception):
    pass


def _greedy(ours: Words, theirs: Words) -> Dict[Vertex, Vertex]:
    col_ours, col_theirs = refine_colors([ours, theirs])
    pools: Dict[int, List[Vertex]] = {}
    for v in sorted(theirs, key=vertex_key):
        pools.setdefault(col_theirs[v], []).append(v)
    f = {}
    leftovers = []
    for v in sorted(ours, key=vertex_key):
        pool = pools.get(col_ours[v])
        if pool:
            f[v] = pool.pop(0)
        else:
            leftovers.append(v)
    spare = sorted((v for pool in pools.values() for v in pool), key=vertex_key)
    for v in leftovers:
        same_side = [u for u in spare if u[0] == v[0]]
        if same_side:
            f[v] = same_side[0]
            spare.remove(same_side[0])
    return f


@dataclass(frozen=True)
class Bijection:
    correspondence: Correspondence
    level: str
    search_nodes: int = 0
    trace: Tuple[str, ...] = ()


def find_bijection(computed: Tables, golden: Tables, budget: int = 200000) -> Bijection:
    """
    Search an id <-> label bijection consistent with the words.

    Computed ids (W01.., B01..) and published labels (1.., 1', 2..) never coincide.
    Tries exact, then multiset, then falls back to a refinement-only pairing.
    """
    ours, theirs = _words(computed), _words(golden)
    trace = []
    for level in (EXACT, MULTISET):
        search = _Search(ours, theirs, level, budget)
        try:
            f = search.run()
        except _BudgetExceeded:
            trace.append(f"{level}: budget of {budget} nodes exhausted")
            logger.warning(trace[-1])
            continue
        if f is not None:
            trace.append(f"{level}: found after {search.nodes} nodes")
            logger.info(trace[-1])
            return Bijection(_to_correspondence(f), level, search.nodes, tuple(trace))
        trace.append(f"{level}: no consistent bijection ({search.nodes} nodes)")
        logger.warning(trace[-1])
    f = _greedy(ours, theirs)
    trace.append(f"{REFINEMENT}: paired {len(f)} of {len(ours)} vertices by refined colour")
    return Bijection(_to_correspondence(f), REFINEMENT, 0, tuple(trace))


def _to_correspondence(f: Mapping[Vertex, Vertex]) -> Correspondence:
    return Correspondence(
        {x[1]: y[1] for x, y in f.items() if x[0] == "w"},
        {x[1]: y[1] for x, y in f.items() if x[0] == "b"},
    )


# --- reports -----------------------------------------------------------------

@dataclass(frozen=True)
class RowDiff:
    side: str
    label: str
    ours: Optional[str]
    computed: Optional[CyclicWord]
    published: Optional[CyclicWord]
    status: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "side": self.side,
            "label": self.label,
            "ours": self.ours,
            "computed": str(self.computed) if self.computed is not None else None,
            "published": str(self.published) if self.published is not None else None,
            "status": self.status,
        }


def row_status(computed: Optional[CyclicWord], published: Optional[CyclicWord]) -> str:
    if computed is None or published is None:
        return "missing"
    if computed == published:
        return "match"
    if computed.multiset() == published.multiset():
        return "multiset"
    return "diff"


def diff_tables(computed: Tables, golden: Tables, c: Correspondence) -> List[RowDiff]:
    renamed = relabel_tables(computed, c)
    inverse = c.inverse()
    rows = []
    for side, ours_side, theirs_side, back in (
        ("white", renamed.white, golden.white, inverse.white),
        ("black", renamed.black, golden.black, inverse.black),
    ):
        for label in sorted(set(ours_side) | set(theirs_side), key=label_key):
            computed_word = ours_side.get(label)
            published = theirs_side.get(label)
            rows.append(RowDiff(side, label, back.get(label), computed_word, published,
                                row_status(computed_word, published)))
    return rows


@dataclass(frozen=True)
class StageComparison:
    stage: str
    rows: Tuple[RowDiff, ...]

    def summary(self) -> Dict[str, Dict[str, int]]:
        out: Dict[str, Dict[str, int]] = {"white": {}, "black": {}}
        for r in self.rows:
            out[r.side][r.status] = out[r.side].get(r.status, 0) + 1
        return {side: dict(sorted(v.items())) for side, v in out.items()}

    def differing(self) -> List[RowDiff]:
        return [r for r in self.rows if r.status != "match"]


@dataclass(frozen=True)
class FigureCheck:
    case: str
    printed: str
    status: str
    recomputed: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"case": self.case, "printed": self.printed, "status": self.status, "recomputed": self.recomputed}


def _site_text(at: Vertex, source: Vertex, options: Sequence[Vertex]) -> str:
    opts = ",".join(vertex_name(o) for o in sorted(options, key=vertex_key))
    return f"{vertex_name(source)} -> {vertex_name(at)} -> {{{opts}}}"


def check_fork_figures(figures: Sequence[FigureCase], forks: Sequence[ForkSite]) -> List[FigureCheck]:
    """Match each printed ambiguity case to a detected fork site; mislabeled cases are errata"""
    checks = []
    for fig in figures:
        printed = _site_text(fig.at, fig.source, fig.options)
        exact = [s for s in forks if s.at == fig.at and s.source == fig.source and set(s.options) == set(fig.options)]
        if exact:
            checks.append(FigureCheck(fig.case, printed, "match", printed))
            continue
        similar = [s for s in forks if s.at[0] == fig.at[0] and set(s.options) == set(fig.options)]
        if len(similar) > 1:
            similar = [s for s in similar if s.at == fig.at or s.source == fig.source]
        if len(similar) == 1:
            s = similar[0]
            checks.append(FigureCheck(fig.case, printed, "erratum", _site_text(s.at, s.source, s.options)))
        else:
            checks.append(FigureCheck(fig.case, printed, "unmatched"))
    for c in checks:
        if c.status != "match":
            logger.warning(f"fork case {c.case}: printed {c.printed}, recomputed {c.recomputed}")
    return checks


@dataclass(frozen=True)
class ExpectationCheck:
    name: str
    expected: Any
    actual: Any

    @property
    def ok(self) -> bool:
        return self.expected == self.actual

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "expected": self.expected, "actual": self.actual, "ok": self.ok}


def check_expectations(expectations: Mapping[str, Any], actual: Mapping[str, Any]) -> List[ExpectationCheck]:
    """Compare every expectation for which an actual value was measured"""
    checks = []
    for name in sorted(expectations):
        if name not in actual:
            continue
        expected, got = expectations[name], actual[name]
        if isinstance(expected, list):
            expected, got = sorted(expected), sorted(got)
        checks.append(ExpectationCheck(name, expected, got))
    for c in checks:
        if not c.ok:
            logger.warning(f"expectation {c.name}: expected {c.expected}, got {c.actual}")
    return checks


def table_statistics(t: Tables) -> Dict[str, Any]:
    white = [len(w) for w in t.white.values()]
    black = [len(b) for b in t.black.values()]
    return {
        "white_rows": len(white),
        "black_rows": len(black),
        "white_letters": sum(white),
        "black_letters": sum(black),
        "white_lengths": dict(sorted(Counter(white).items())),
        "black_lengths": dict(sorted(Counter(black).items())),
        "white_repeats": sum(1 for w in t.white.values() if len(set(w.letters)) < len(w)),
        "black_repeats": sum(1 for b in t.black.values() if len(set(b.letters)) < len(b)),
    }


def _rename(v: Vertex, correspondence: Correspondence) -> Vertex:
    side, label = v
    mapping = correspondence.white if side == "w" else correspondence.black
    return (side, mapping.get(label, label))


@dataclass(frozen=True)
class CensusComparison:
    """One census mode run on our tables and on the bundle's; our fork sites are shown under published labels"""
    mode: str
    computed: CensusReport
    golden: CensusReport
    only_computed: Tuple[str, ...]
    only_golden: Tuple[str, ...]

    @property
    def histogram_match(self) -> bool:
        return self.computed.face_histogram == self.golden.face_histogram

    def genus_rows(self) -> List[Dict[str, Any]]:
        rows = []
        for convention in settings.EDGE_CONVENTIONS:
            row: Dict[str, Any] = {"convention": convention}
            for side, report in (("computed", self.computed), ("golden", self.golden)):
                edges = report.edge_counts.get(convention)
                row[side] = {
                    "edges": None if edges is None else (int(edges) if edges.denominator == 1 else float(edges)),
                    "genus": {str(f): est.to_dict()["genus"]
                              for f, est in sorted(report.genus_table.get(convention, {}).items())},
                }
            rows.append(row)
        return rows

    def summary(self) -> str:
        return (f"{self.mode} faces {self.computed.face_counts} ours vs {self.golden.face_counts} published, "
                f"forks {self.computed.fork_count} vs {self.golden.fork_count}, "
                f"{len(self.only_computed)}+{len(self.only_golden)} unmatched sites")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "summary": self.summary(),
            "forks": {
                "computed": self.computed.fork_count,
                "golden": self.golden.fork_count,
                "only_computed": list(self.only_computed),
                "only_golden": list(self.only_golden),
            },
            "face_histogram": {
                "computed": {str(k): v for k, v in sorted(self.computed.face_histogram.items())},
                "golden": {str(k): v for k, v in sorted(self.golden.face_histogram.items())},
                "match": self.histogram_match,
            },
            "genus": self.genus_rows(),
            "obstructions": {"computed": len(self.computed.obstructions), "golden": len(self.golden.obstructions)},
        }


def compare_census(computed: CensusReport, golden: CensusReport,
                   correspondence: Correspondence) -> CensusComparison:
    """Pair the two censuses; fork sites are compared as text after renaming ours"""
    if computed.mode != golden.mode:
        raise ValueError(f"census modes differ: {computed.mode} and {golden.mode}")
    ours = {
        _site_text(_rename(s.at, correspondence), _rename(s.source, correspondence),
                   [_rename(o, correspondence) for o in s.options])
        for s in computed.forks
    }
    theirs = {_site_text(s.at, s.source, s.options) for s in golden.forks}
    result = CensusComparison(
        mode=computed.mode,
        computed=computed,
        golden=golden,
        only_computed=tuple(sorted(ours - theirs)),
        only_golden=tuple(sorted(theirs - ours)),
    )
    logger.info(f"compare (census): {result.summary()}")
    return result


@dataclass(frozen=True)
class ComparisonReport:
    bijection: Bijection
    stages: Tuple[StageComparison, ...]
    figures: Tuple[FigureCheck, ...]
    expectations: Tuple[ExpectationCheck, ...]
    census: Optional[CensusComparison] = None

    @property
    def ok(self) -> bool:
        """Black rows match exactly, white rows at least as multisets, expectations hold"""
        for stage in self.stages:
            for r in stage.rows:
                if r.side == "black" and r.status != "match":
                    return False
                if r.side == "white" and r.status not in ("match", "multiset"):
                    return False
        return all(e.ok for e in self.expectations)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level": self.bijection.level,
            "search_nodes": self.bijection.search_nodes,
            "trace": list(self.bijection.trace),
            "correspondence": {
                "white": dict(sorted(self.bijection.correspondence.white.items())),
                "black": dict(sorted(self.bijection.correspondence.black.items())),
            },
            "stages": {
                s.stage: {"summary": s.summary(), "rows": [r.to_dict() for r in s.differing()]}
                for s in self.stages
            },
            "figures": [f.to_dict() for f in self.figures],
            "expectations": [e.to_dict() for e in self.expectations],
            "census": None if self.census is None else self.census.to_dict(),
            "ok": self.ok,
        }


def compare(raw: Tables, reduced: Tables, bundle: GoldenBundle,
            correspondence: Optional[Correspondence] = None,
            actual: Optional[Mapping[str, Any]] = None,
            forks: Sequence[ForkSite] = (), budget: int = 200000,
            censuses: Optional[Tuple[CensusReport, CensusReport]] = None) -> ComparisonReport:
    """
    Compare computed raw and reduced tables with the bundle under one bijection.

    ``censuses`` is (ours, published) for one census mode; it becomes the census stage.
    """
    if correspondence is not None:
        bijection = Bijection(correspondence, GIVEN)
    else:
        bijection = find_bijection(raw, bundle.raw, budget)
    stages = (
        StageComparison("raw", tuple(diff_tables(raw, bundle.raw, bijection.correspondence))),
        StageComparison("reduced", tuple(diff_tables(reduced, bundle.reduced, bijection.correspondence))),
    )
    figures = tuple(check_fork_figures(bundle.fork_figures, forks)) if forks else ()
    expectations = tuple(check_expectations(bundle.expectations, actual or {}))
    for s in stages:
        logger.info(f"compare ({s.stage}): {s.summary()}")
    census = compare_census(*censuses, bijection.correspondence) if censuses else None
    return ComparisonReport(bijection, stages, figures, expectations, census)
