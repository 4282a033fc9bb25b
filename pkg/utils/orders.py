import logging
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from utils.catalog import Catalog, MapClass
from utils.errors import StructuralAnomaly
from utils.map_core import WHITE, ColoredMap
from utils.quad import arcs, delete_separating_edge, dequadrangulate, insert_arc, quadrangulate

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CyclicWord:
    letters: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def rotations(self) -> List[Tuple[str, ...]]:
        n = len(self.letters)
        return [self.letters[i:] + self.letters[:i] for i in range(n)] or [()]

    def canonical(self) -> Tuple[str, ...]:
        return min(self.rotations())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CyclicWord):
            return NotImplemented
        return len(self) == len(other) and self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())

    def shape(self) -> Tuple[int, ...]:
        """Length and repeat pattern, independent of letter names and rotation"""
        patterns = []
        for rotation in self.rotations():
            first: Dict[str, int] = {}
            patterns.append(tuple(first.setdefault(x, len(first)) for x in rotation))
        return min(patterns)

    def multiset(self) -> Counter:
        return Counter(self.letters)

    def renamed(self, mapping: Mapping[str, str]) -> "CyclicWord":
        return CyclicWord(tuple(mapping.get(x, x) for x in self.letters))

    def __str__(self) -> str:
        return ",".join(self.letters)

    @classmethod
    def parse(cls, text: str) -> "CyclicWord":
        return cls(tuple(x.strip() for x in text.split(",") if x.strip()))


@dataclass(frozen=True)
class DualEdge:
    edge: int
    tail: int
    head: int


@dataclass(frozen=True)
class DualDigraph:
    nodes: Tuple[int, ...]
    edges: Tuple[DualEdge, ...]
    loops_removed: int
    degrees: Tuple[int, ...] = field(default=())


def loopless_dual(q: ColoredMap) -> DualDigraph:
    """Dual of a quadrangulation without its loops, each edge oriented black-face-on-right"""
    base = q.base
    face = base.face_index()
    n_faces = len(base.faces())
    degree = [0] * n_faces
    edges = []
    loops = 0
    for a, b in base.edges():
        white = a if q.colors[a] == WHITE else b
        tail, head = face[white], face[base.alpha(white)]
        degree[tail] += 1
        degree[head] += 1
        if tail == head:
            loops += 1
            continue
        # Edges are named by their white dart
        edges.append(DualEdge(white, tail, head))
    out_deg = Counter(e.tail for e in edges)
    in_deg = Counter(e.head for e in edges)
    unbalanced = [v for v in range(n_faces) if out_deg[v] != in_deg[v]]
    if unbalanced:
        raise StructuralAnomaly(f"dual nodes {unbalanced} have in-degree != out-degree")
    return DualDigraph(tuple(range(n_faces)), tuple(edges), loops, tuple(degree))


def _components(d: DualDigraph) -> List[List[int]]:
    g = nx.MultiDiGraph()
    g.add_nodes_from(sorted({e.tail for e in d.edges} | {e.head for e in d.edges}))
    g.add_edges_from((e.tail, e.head) for e in d.edges)
    return sorted(sorted(c) for c in nx.weakly_connected_components(g))


def eulerian_circuit(d: DualDigraph, rng: Optional[random.Random] = None) -> List[DualEdge]:
    """Hierholzer from the least edge, always leaving by the least unused edge (or a random one)"""
    if not d.edges:
        return []
    components = _components(d)
    if len(components) > 1:
        raise StructuralAnomaly(f"loopless dual is disconnected: {components}", components)
    outgoing: Dict[int, List[DualEdge]] = defaultdict(list)
    for e in sorted(d.edges, key=lambda e: e.edge):
        outgoing[e.tail].append(e)
    start = min(d.edges, key=lambda e: e.edge)
    stack: List[Tuple[int, Optional[DualEdge]]] = [(start.tail, None)]
    circuit: List[DualEdge] = []
    while stack:
        node, via = stack[-1]
        if outgoing[node]:
            i = rng.randrange(len(outgoing[node])) if rng is not None and via is not None else 0
            e = outgoing[node].pop(i)
            stack.append((e.head, e))
        else:
            stack.pop()
            if via is not None:
                circuit.append(via)
    circuit.reverse()
    if len(circuit) != len(d.edges):
        raise StructuralAnomaly("Eulerian circuit does not cover every edge")
    return circuit


def is_eulerian_circuit(d: DualDigraph, circuit: Sequence[DualEdge]) -> bool:
    if sorted(e.edge for e in circuit) != sorted(e.edge for e in d.edges):
        return False
    return all(circuit[i].head == circuit[(i + 1) % len(circuit)].tail for i in range(len(circuit)))


def white_word(w: MapClass, m446: Catalog, rng: Optional[random.Random] = None) -> CyclicWord:
    """Separating edges of the quadrangulation in the order an Eulerian circuit of the loopless dual crosses them, black faces on the right"""
    q = quadrangulate(w.map)
    circuit = eulerian_circuit(loopless_dual(q), rng)
    letters = []
    for e in circuit:
        edge = (min(e.edge, q.base.alpha(e.edge)), max(e.edge, q.base.alpha(e.edge)))
        letters.append(m446.lookup(delete_separating_edge(q, edge)).id)
    return CyclicWord(tuple(letters))


def black_word(b: MapClass, m33: Catalog) -> CyclicWord:
    """The three arc insertions read along the hexagon with the face on the right"""
    return CyclicWord(tuple(
        m33.lookup(dequadrangulate(insert_arc(b.map, a))).id
        for a in arcs(b.map)
    ))


def _collapse_runs(letters: Sequence[str], keep: Callable[[str], bool] = lambda x: False) -> List[str]:
    """Collapse maximal cyclic runs of one letter unless ``keep(letter)``"""
    letters = list(letters)
    if not letters:
        return []
    if len(set(letters)) == 1:
        return letters if keep(letters[0]) else letters[:1]
    shift = 0
    while letters[shift - 1] == letters[shift]:
        shift += 1
    letters = letters[shift:] + letters[:shift]
    out: List[str] = []
    i = 0
    while i < len(letters):
        j = i
        while j + 1 < len(letters) and letters[j + 1] == letters[i]:
            j += 1
        out.extend(letters[i:j + 1] if keep(letters[i]) else [letters[i]])
        i = j + 1
    return out


def _primitive_period(letters: Sequence[str]) -> List[str]:
    n = len(letters)
    for p in range(1, n + 1):
        if n % p == 0 and all(letters[i] == letters[(i + p) % n] for i in range(n)):
            return list(letters[:p])
    return list(letters)


def reduce_white_word(w: CyclicWord) -> CyclicWord:
    """Treat a multiple edge as one edge: collapse cyclic runs, then keep one period"""
    return CyclicWord(tuple(_primitive_period(_collapse_runs(w.letters))))


def _reduced_multiplicity(label: str, u: str, white_context: Mapping[str, CyclicWord]) -> bool:
    return reduce_white_word(white_context[u]).letters.count(label) == 1


def _mutual_adjacency(label: str, u: str, white_context: Mapping[str, CyclicWord]) -> bool:
    letters = white_context[u].letters
    return len(letters) > 1 and any(
        letters[i] == label and letters[(i + 1) % len(letters)] == label
        for i in range(len(letters))
    )


WHITE_RULES: Dict[str, Callable[[CyclicWord], CyclicWord]] = {
    "runs-period": reduce_white_word,
    "runs": lambda w: CyclicWord(tuple(_collapse_runs(w.letters))),
    "none": lambda w: w,
}

BLACK_RULES: Dict[str, Callable[[str, str, Mapping[str, CyclicWord]], bool]] = {
    "reduced-multiplicity": _reduced_multiplicity,
    "mutual-adjacency": _mutual_adjacency,
    "none": lambda label, u, ctx: False,
}


def reduce_black_word(
    b: CyclicWord,
    label: str,
    white_context: Mapping[str, CyclicWord],
    rule: str = "reduced-multiplicity",
) -> CyclicWord:
    """Collapse a run u,u in the word of black ``label`` when the rule says the edges form one multiple edge"""
    allowed = BLACK_RULES[rule]

    def keep(u: str) -> bool:
        if u not in white_context:
            logger.warning(f"no white word for {u}; keeping the run in black {label}")
            return True
        return not allowed(label, u, white_context)

    return CyclicWord(tuple(_collapse_runs(b.letters, keep)))


@dataclass(frozen=True)
class Tables:
    """White and black words keyed by vertex label; ``stage`` is raw or reduced"""
    white: Dict[str, CyclicWord]
    black: Dict[str, CyclicWord]
    stage: str = "raw"

    def to_dict(self) -> Dict[str, object]:
        return {
            "stage": self.stage,
            "white": {k: list(v.letters) for k, v in self.white.items()},
            "black": {k: list(v.letters) for k, v in self.black.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "Tables":
        return cls(
            white={str(k): CyclicWord(tuple(map(str, v))) for k, v in data["white"].items()},
            black={str(k): CyclicWord(tuple(map(str, v))) for k, v in data["black"].items()},
            stage=str(data.get("stage", "raw")),
        )


def compute_tables(m33: Catalog, m446: Catalog, shuffle_seed: Optional[int] = None) -> Tables:
    """Raw words (Tables 1 and 2) for the computed catalogs"""
    rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
    white = {w.id: white_word(w, m446, rng) for w in m33}
    black = {b.id: black_word(b, m33) for b in m446}
    logger.info(f"Computed {sum(map(len, white.values()))} white letters and {sum(map(len, black.values()))} black letters")
    return Tables(white, black, "raw")


def reduce_tables(raw: Tables, white_rule: str = "runs-period", black_rule: str = "reduced-multiplicity") -> Tables:
    """Reduced words (Tables 3 and 4)"""
    if raw.stage == "reduced":
        return raw
    white = {k: WHITE_RULES[white_rule](v) for k, v in raw.white.items()}
    black = {k: reduce_black_word(v, k, raw.white, black_rule) for k, v in raw.black.items()}
    return Tables(white, black, "reduced")
