import logging
import re
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from utils.config import settings
from utils.errors import IntegrityError, StructuralAnomaly, UnsupportedForkError
from utils.orders import CyclicWord, Tables

logger = logging.getLogger(__name__)

Vertex = Tuple[str, str]
PAPER_MODE = "paper"
RIBBON_MODE = "ribbon"


def label_key(label: str) -> Tuple[Tuple[int, Any], ...]:
    """Natural sort key: 2 < 10, 1 < 1' < 2"""
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in re.findall(r"\d+|\D+", label))


def vertex_key(v: Vertex) -> Tuple[int, Tuple]:
    return (0 if v[0] == "w" else 1, label_key(v[1]))


def vertex_name(v: Vertex) -> str:
    return f"{v[0]}:{v[1]}"


@dataclass(frozen=True)
class IncidenceGraph:
    white_words: Dict[str, CyclicWord]
    black_words: Dict[str, CyclicWord]
    adjacency: Dict[Tuple[Vertex, Vertex], int]
    mismatches: Tuple[Tuple[Vertex, Vertex, int, int], ...]

    @property
    def vertices(self) -> List[Vertex]:
        return sorted(
            [("w", k) for k in self.white_words] + [("b", k) for k in self.black_words],
            key=vertex_key,
        )

    def word(self, v: Vertex) -> Tuple[Vertex, ...]:
        """Neighbors of v in cyclic order"""
        side, label = v
        if side == "w":
            return tuple(("b", x) for x in self.white_words[label].letters)
        return tuple(("w", x) for x in self.black_words[label].letters)

    def edge_counts(self) -> Dict[str, Fraction]:
        white = sum(len(w) for w in self.white_words.values())
        black = sum(len(w) for w in self.black_words.values())
        pairs = {tuple(sorted(p, key=vertex_key)) for p in self.adjacency}
        max_per_pair = sum(max(self.adjacency.get((u, v), 0), self.adjacency.get((v, u), 0)) for u, v in pairs)
        return {
            "white": Fraction(white),
            "black": Fraction(black),
            "max-per-pair": Fraction(max_per_pair),
            "mean": Fraction(white + black, 2),
            "simple": Fraction(len(pairs)),
        }


def assemble_incidence(white_words: Dict[str, CyclicWord], black_words: Dict[str, CyclicWord]) -> IncidenceGraph:
    adjacency: Counter = Counter()
    for label, word in white_words.items():
        for x in word.letters:
            if x not in black_words:
                raise IntegrityError(f"white {label} refers to unknown black {x}")
            adjacency[(("b", x), ("w", label))] += 1
    for label, word in black_words.items():
        for x in word.letters:
            if x not in white_words:
                raise IntegrityError(f"black {label} refers to unknown white {x}")
            adjacency[(("w", x), ("b", label))] += 1
    mismatches = []
    for (u, v), n in sorted(adjacency.items(), key=lambda kv: (vertex_key(kv[0][0]), vertex_key(kv[0][1]))):
        back = adjacency.get((v, u), 0)
        if back == 0:
            raise IntegrityError(f"{vertex_name(u)} occurs in the word of {vertex_name(v)} but not conversely")
        if n != back and vertex_key(u) < vertex_key(v):
            mismatches.append((u, v, n, back))
    if mismatches:
        logger.warning(f"{len(mismatches)} adjacent pairs have different two-sided occurrence counts")
    return IncidenceGraph(dict(white_words), dict(black_words), dict(adjacency), tuple(mismatches))


def incidence_from_tables(tables: Tables) -> IncidenceGraph:
    return assemble_incidence(tables.white, tables.black)


@dataclass(frozen=True)
class ForkSite:
    at: Vertex
    source: Vertex
    positions: Tuple[int, int]
    options: Tuple[Vertex, Vertex]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "at": vertex_name(self.at),
            "from": vertex_name(self.source),
            "options": [vertex_name(o) for o in self.options],
        }


def detect_forks(g: IncidenceGraph) -> List[ForkSite]:
    sites = []
    for v in g.vertices:
        word = g.word(v)
        occurrences: Dict[Vertex, List[int]] = {}
        for i, u in enumerate(word):
            occurrences.setdefault(u, []).append(i)
        for u in sorted(occurrences, key=vertex_key):
            where = occurrences[u]
            if len(where) >= 3:
                raise UnsupportedForkError(f"{vertex_name(u)} occurs {len(where)} times around {vertex_name(v)}")
            if len(where) == 2:
                i, j = where
                sites.append(ForkSite(v, u, (i, j), (word[(i + 1) % len(word)], word[(j + 1) % len(word)])))
    return sites


@dataclass(frozen=True)
class ChoiceVector:
    bits: Tuple[int, ...]

    @classmethod
    def from_index(cls, index: int, k: int) -> "ChoiceVector":
        return cls(tuple((index >> i) & 1 for i in range(k)))

    @property
    def index(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))


@dataclass
class Tracer:
    """
    Flattened successor tables; picklable so census workers can share it.

    Vertices are ("w", label) and ("b", label). A walk arriving at v from u leaves
    towards the letter following u in v's word; where u occurs twice the successor
    is a binary choice (a fork site).
    """
    mode: str
    nodes: List[Any]
    base_next: List[int]
    # Per fork site: (node, successor when the choice is 0, successor when it is 1)
    fork_nodes: List[List[Tuple[int, int, int]]] = field(default_factory=list)
    # Per fork site: the site whose bit is XORed in (ribbon mode), else None
    linked: List[Optional[int]] = field(default_factory=list)

    @classmethod
    def build(cls, g: IncidenceGraph, forks: Sequence[ForkSite], mode: str = PAPER_MODE) -> "Tracer":
        if mode == PAPER_MODE:
            return cls._directed(g, forks)
        if mode == RIBBON_MODE:
            return cls._ribbon(g, forks)
        raise ValueError(f"unknown census mode {mode!r}")

    @classmethod
    def _directed(cls, g: IncidenceGraph, forks: Sequence[ForkSite]) -> "Tracer":
        nodes: List[Tuple[Vertex, Vertex]] = []
        for v in g.vertices:
            for u in sorted(set(g.word(v)), key=vertex_key):
                nodes.append((u, v))
        index = {n: i for i, n in enumerate(nodes)}
        base_next = []
        for u, v in nodes:
            word = g.word(v)
            i = word.index(u)
            base_next.append(index[(v, word[(i + 1) % len(word)])])
        fork_nodes = []
        for site in forks:
            node = index[(site.source, site.at)]
            fork_nodes.append([(node, index[(site.at, site.options[0])], index[(site.at, site.options[1])])])
        return cls(PAPER_MODE, nodes, base_next, fork_nodes, [None] * len(forks))

    @classmethod
    def _ribbon(cls, g: IncidenceGraph, forks: Sequence[ForkSite]) -> "Tracer":
        # Darts are (vertex, position); a dart at v pointing to u is matched to a dart at u pointing to v
        darts: List[Tuple[Vertex, int]] = [(v, i) for v in g.vertices for i in range(len(g.word(v)))]
        index = {d: i for i, d in enumerate(darts)}

        def after(v: Vertex, i: int) -> int:
            return index[(v, (i + 1) % len(g.word(v)))]

        def positions(v: Vertex, u: Vertex) -> List[int]:
            return [i for i, x in enumerate(g.word(v)) if x == u]

        obstructions = ribbon_obstructions(g)
        if obstructions:
            raise StructuralAnomaly(
                f"{len(obstructions)} adjacent pairs have unequal two-sided counts; no dart matching exists"
            )
        base_next = [0] * len(darts)
        for v, i in darts:
            u = g.word(v)[i]
            j = positions(u, v)[positions(v, u).index(i)]
            base_next[index[(v, i)]] = after(u, j)

        site_of = {(s.at, s.source): k for k, s in enumerate(forks)}
        fork_nodes: List[List[Tuple[int, int, int]]] = [[] for _ in forks]
        linked: List[Optional[int]] = [None] * len(forks)
        for k, site in enumerate(forks):
            v, u = site.at, site.source
            if vertex_key(v) > vertex_key(u):
                continue
            here, there = positions(v, u), positions(u, v)
            # Crossed matching when the XOR of the two end bits is 1
            for a, b in ((0, 1), (1, 0)):
                fork_nodes[k].append((index[(v, here[a])], after(u, there[a]), after(u, there[b])))
                fork_nodes[k].append((index[(u, there[a])], after(v, here[a]), after(v, here[b])))
            linked[k] = site_of[(u, v)]
        return cls(RIBBON_MODE, darts, base_next, fork_nodes, linked)

    def successor(self, bits: Sequence[int]) -> List[int]:
        nxt = list(self.base_next)
        for k, entries in enumerate(self.fork_nodes):
            other = self.linked[k]
            choice = bits[k] if other is None else bits[k] ^ bits[other]
            for node, first, second in entries:
                nxt[node] = second if choice else first
        return nxt


def ribbon_obstructions(g: IncidenceGraph) -> List[Tuple[Vertex, Vertex, int, int]]:
    """Adjacent pairs whose darts cannot be matched one-to-one"""
    return list(g.mismatches)


def count_cycles(nxt: Sequence[int]) -> Tuple[int, List[List[int]]]:
    """Cycles of a functional graph (every node eventually enters exactly one)"""
    n = len(nxt)
    stamp = [-1] * n
    cycles = []
    for start in range(n):
        if stamp[start] != -1:
            continue
        x = start
        while stamp[x] == -1:
            stamp[x] = start
            x = nxt[x]
        if stamp[x] == start:
            cycle = [x]
            y = nxt[x]
            while y != x:
                cycle.append(y)
                y = nxt[y]
            cycles.append(cycle)
    return len(cycles), cycles


@dataclass(frozen=True)
class FaceTrace:
    face_count: int
    walks: Tuple[Tuple[Any, ...], ...]
    bijective: bool


def trace_faces(g: IncidenceGraph, c: ChoiceVector, mode: str = PAPER_MODE,
                forks: Optional[Sequence[ForkSite]] = None) -> FaceTrace:
    forks = detect_forks(g) if forks is None else forks
    if len(c.bits) != len(forks):
        raise ValueError(f"choice vector has {len(c.bits)} bits for {len(forks)} fork sites")
    tracer = Tracer.build(g, forks, mode)
    nxt = tracer.successor(c.bits)
    n, cycles = count_cycles(nxt)
    walks = tuple(tuple(tracer.nodes[i] for i in cycle) for cycle in cycles)
    return FaceTrace(n, walks, len(set(nxt)) == len(nxt))


def _census_chunk(tracer: Tracer, k: int, lo: int, hi: int) -> Tuple[int, np.ndarray, np.ndarray]:
    bits = (np.arange(lo, hi, dtype=np.int64)[:, None] >> np.arange(k, dtype=np.int64)) & 1
    faces = np.zeros(hi - lo, dtype=np.int64)
    bijective = np.zeros(hi - lo, dtype=bool)
    for row in range(hi - lo):
        nxt = tracer.successor(bits[row].tolist())
        faces[row], _ = count_cycles(nxt)
        bijective[row] = len(set(nxt)) == len(nxt)
    return lo, faces, bijective


@dataclass(frozen=True)
class GenusEstimate:
    value: Fraction

    @property
    def integral(self) -> bool:
        return self.value.denominator == 1

    @property
    def valid(self) -> bool:
        return self.integral and self.value >= 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "genus": int(self.value) if self.integral else float(self.value),
            "flag": None if self.valid else ("non-integral" if not self.integral else "negative"),
        }


def genus_estimate(V, E, F) -> GenusEstimate:
    """g = (2 - V + E - F) / 2, flagged rather than rejected when not a valid genus"""
    value = (Fraction(2) - Fraction(V) + Fraction(E) - Fraction(F)) / 2
    estimate = GenusEstimate(value)
    if not estimate.valid:
        logger.warning(f"genus estimate {value} for V={V}, E={E}, F={F} is not a valid genus")
    return estimate


@dataclass(frozen=True)
class CensusReport:
    mode: str
    fork_count: int
    forks: Tuple[ForkSite, ...]
    face_histogram: Dict[int, int]
    bijective_vectors: int
    parity_violations: int
    edge_counts: Dict[str, Fraction]
    genus_table: Dict[str, Dict[int, GenusEstimate]]
    mismatches: Tuple[Tuple[Vertex, Vertex, int, int], ...]
    vertex_count: int
    obstructions: Tuple[Tuple[Vertex, Vertex, int, int], ...] = ()
    runtime_seconds: float = field(default=0.0, compare=False)

    @property
    def face_counts(self) -> List[int]:
        return sorted(self.face_histogram)

    @property
    def total_vectors(self) -> int:
        return sum(self.face_histogram.values())

    def matches_claim(self) -> bool:
        return set(self.face_histogram) == set(settings.EXPECTED_FACES)

    def genus_values(self, convention: str) -> List[Any]:
        return [_number(est.value) for _, est in sorted(self.genus_table.get(convention, {}).items())]

    def claim_summary(self) -> str:
        """Observed faces and genus beside the published ones"""
        convention = settings.EDGE_CONVENTIONS[0]
        return (
            f"faces {self.face_counts} (expected {sorted(settings.EXPECTED_FACES)}), "
            f"genus under {convention} edges {self.genus_values(convention)} "
            f"(expected {sorted(settings.EXPECTED_GENUS)})"
        )

    def to_dict(self, timing: bool = False) -> Dict[str, Any]:
        data = {
            "mode": self.mode,
            "vertex_count": self.vertex_count,
            "fork_count": self.fork_count,
            "forks": [f.to_dict() for f in self.forks],
            "face_histogram": {str(k): v for k, v in sorted(self.face_histogram.items())},
            "bijective_vectors": self.bijective_vectors,
            "parity_violations": self.parity_violations,
            "edge_counts": {k: _number(v) for k, v in self.edge_counts.items()},
            "genus_table": {
                conv: {str(f): est.to_dict() for f, est in sorted(row.items())}
                for conv, row in self.genus_table.items()
            },
            "expected": {
                "faces": sorted(settings.EXPECTED_FACES),
                "genus": sorted(settings.EXPECTED_GENUS),
                "faces_match": self.matches_claim(),
                "faces_missing": sorted(set(settings.EXPECTED_FACES) - set(self.face_histogram)),
                "faces_unexpected": sorted(set(self.face_histogram) - set(settings.EXPECTED_FACES)),
            },
            "mismatches": [_pair_dict(m) for m in self.mismatches],
            "obstructions": [_pair_dict(m) for m in self.obstructions],
        }
        if timing:
            data["runtime_seconds"] = round(self.runtime_seconds, 3)
        return data


def _pair_dict(m: Tuple[Vertex, Vertex, int, int]) -> Dict[str, Any]:
    u, v, a, b = m
    return {"u": vertex_name(u), "v": vertex_name(v), "u_in_v": a, "v_in_u": b}


def _number(x: Fraction):
    return int(x) if x.denominator == 1 else float(x)


def _trace_all(tracer: Tracer, k: int, jobs: int, chunk: int) -> Tuple[np.ndarray, np.ndarray]:
    total = 1 << k
    ranges = [(lo, min(total, lo + chunk)) for lo in range(0, total, chunk)]
    logger.info(f"Census ({tracer.mode}): {k} fork sites, {total} choice vectors, {len(ranges)} chunks, {jobs} jobs")
    faces = np.zeros(total, dtype=np.int64)
    bijective = np.zeros(total, dtype=bool)
    if jobs <= 1:
        parts = [_census_chunk(tracer, k, lo, hi) for lo, hi in ranges]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_census_chunk, tracer, k, lo, hi) for lo, hi in ranges]
            parts = [f.result() for f in futures]
    for lo, part_faces, part_bijective in parts:
        faces[lo:lo + len(part_faces)] = part_faces
        bijective[lo:lo + len(part_bijective)] = part_bijective
    return faces, bijective


def flip_parity_violations(faces: np.ndarray, bijective: np.ndarray, k: int) -> int:
    """Single-bit flips between two bijective successors that change the face count by an odd amount"""
    index = np.arange(len(faces), dtype=np.int64)
    violations = 0
    for i in range(k):
        partner = index ^ (1 << i)
        both = (index < partner) & bijective & bijective[partner]
        violations += int(np.count_nonzero(((faces - faces[partner]) % 2 != 0) & both))
    return violations


def run_census(g: IncidenceGraph, mode: str = PAPER_MODE, jobs: int = 1,
               chunk: Optional[int] = None) -> CensusReport:
    """Trace every choice vector; results never depend on ``jobs`` or ``chunk``"""
    if mode not in (PAPER_MODE, RIBBON_MODE):
        raise ValueError(f"unknown census mode {mode!r}")
    started = time.perf_counter()
    obstructions = tuple(ribbon_obstructions(g)) if mode == RIBBON_MODE else ()

    forks: List[ForkSite] = []
    histogram: Dict[int, int] = {}
    bijective_vectors = 0
    violations = 0
    if obstructions:
        # Fork sites are not even detected: a run may repeat a letter more than twice
        logger.warning(f"Census ({mode}): {len(obstructions)} obstructions, no trace attempted")
    else:
        forks = detect_forks(g)
        k = len(forks)
        tracer = Tracer.build(g, forks, mode)
        faces, bijective = _trace_all(tracer, k, jobs, max(1, chunk or settings.CENSUS_CHUNK))
        values, frequencies = np.unique(faces, return_counts=True)
        histogram = {int(v): int(c) for v, c in zip(values, frequencies)}
        bijective_vectors = int(np.count_nonzero(bijective))
        violations = flip_parity_violations(faces, bijective, k)
        if violations:
            logger.warning(f"{violations} single-bit flips changed the face count by an odd amount")

    V = len(g.white_words) + len(g.black_words)
    edge_counts = g.edge_counts()
    genus_table = {
        conv: {f: genus_estimate(V, E, f) for f in histogram}
        for conv, E in edge_counts.items()
    }
    elapsed = time.perf_counter() - started
    logger.info(f"Census ({mode}) finished in {elapsed:.2f}s: face counts {sorted(histogram)}")
    return CensusReport(
        mode=mode,
        fork_count=len(forks),
        forks=tuple(forks),
        face_histogram=histogram,
        bijective_vectors=bijective_vectors,
        parity_violations=violations,
        edge_counts=edge_counts,
        genus_table=genus_table,
        mismatches=g.mismatches,
        vertex_count=V,
        obstructions=obstructions,
        runtime_seconds=elapsed,
    )
