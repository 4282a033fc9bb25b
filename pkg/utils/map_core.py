import logging
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from utils.errors import InvalidMapError, NotBipartiteError

logger = logging.getLogger(__name__)

WHITE = "w"
BLACK = "b"
_COLOR_RANK = {WHITE: 0, BLACK: 1}


@dataclass(frozen=True)
class Permutation:
    image: Tuple[int, ...]

    def __post_init__(self):
        image = tuple(self.image)
        object.__setattr__(self, "image", image)
        if sorted(image) != list(range(len(image))):
            raise InvalidMapError(f"not a bijection on {len(image)} darts: {image}")

    @classmethod
    def identity(cls, size: int) -> "Permutation":
        return cls(tuple(range(size)))

    @classmethod
    def from_cycles(cls, size: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        """Build a permutation from disjoint cycles; unlisted darts are fixed"""
        image = list(range(size))
        for cycle in cycles:
            for i, d in enumerate(cycle):
                image[d] = cycle[(i + 1) % len(cycle)]
        return cls(tuple(image))

    @property
    def size(self) -> int:
        return len(self.image)

    def __call__(self, d: int) -> int:
        return self.image[d]

    def __len__(self) -> int:
        return len(self.image)

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.image)
        for d, e in enumerate(self.image):
            inv[e] = d
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """Return ``self o other``, i.e. apply ``other`` first"""
        if other.size != self.size:
            raise InvalidMapError("cannot compose permutations of different sizes")
        return Permutation(tuple(self.image[other.image[d]] for d in range(self.size)))

    def is_identity(self) -> bool:
        return all(d == e for d, e in enumerate(self.image))


def orbits(p: Permutation) -> List[List[int]]:
    """Cycles of ``p``, each starting at its least dart, ordered by that dart"""
    seen = [False] * p.size
    cycles = []
    for start in range(p.size):
        if seen[start]:
            continue
        cycle = []
        d = start
        while not seen[d]:
            seen[d] = True
            cycle.append(d)
            d = p(d)
        cycles.append(cycle)
    return cycles


def _orbit_index(p: Permutation) -> Tuple[int, ...]:
    index = [0] * p.size
    for i, cycle in enumerate(orbits(p)):
        for d in cycle:
            index[d] = i
    return tuple(index)


@dataclass(frozen=True)
class OrientedMap:
    """
    Rotation system on darts 0..n-1: alpha pairs the two darts of every edge and
    sigma turns counterclockwise around every vertex. Faces are the cycles of
    phi(d) = sigma(alpha(d)).
    """
    alpha: Permutation
    sigma: Permutation

    def __post_init__(self):
        n = self.alpha.size
        if self.sigma.size != n:
            raise InvalidMapError("alpha and sigma act on different dart sets")
        if n % 2:
            raise InvalidMapError(f"odd dart count {n}")
        for d in range(n):
            if self.alpha(d) == d or self.alpha(self.alpha(d)) != d:
                raise InvalidMapError(f"alpha is not a fixed-point-free involution at dart {d}")
        if n and not _is_transitive(self.alpha, self.sigma):
            raise InvalidMapError("map is not connected")

    @classmethod
    def from_sigma(cls, sigma: Sequence[int]) -> "OrientedMap":
        """Map with the normalized involution (0 1)(2 3)..."""
        alpha = tuple(d ^ 1 for d in range(len(sigma)))
        return cls(Permutation(alpha), Permutation(tuple(sigma)))

    @property
    def n_darts(self) -> int:
        return self.alpha.size

    @property
    def phi(self) -> Permutation:
        return self.sigma.compose(self.alpha)

    def vertices(self) -> List[List[int]]:
        return orbits(self.sigma)

    def edges(self) -> List[List[int]]:
        return orbits(self.alpha)

    def faces(self) -> List[List[int]]:
        return orbits(self.phi)

    def vertex_index(self) -> Tuple[int, ...]:
        return _orbit_index(self.sigma)

    def face_index(self) -> Tuple[int, ...]:
        return _orbit_index(self.phi)

    def face_degrees(self) -> Tuple[int, ...]:
        return tuple(sorted(len(f) for f in self.faces()))

    def vertex_degrees(self) -> Tuple[int, ...]:
        return tuple(sorted(len(v) for v in self.vertices()))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_darts": self.n_darts,
            "alpha": list(self.alpha.image),
            "sigma": list(self.sigma.image),
        }


def _is_transitive(alpha: Permutation, sigma: Permutation) -> bool:
    seen = {0}
    queue = deque([0])
    while queue:
        d = queue.popleft()
        for e in (alpha(d), sigma(d)):
            if e not in seen:
                seen.add(e)
                queue.append(e)
    return len(seen) == alpha.size


@dataclass(frozen=True)
class ColoredMap:
    base: OrientedMap
    colors: Tuple[str, ...]

    def __post_init__(self):
        colors = tuple(self.colors)
        object.__setattr__(self, "colors", colors)
        if len(colors) != self.base.n_darts:
            raise InvalidMapError("one color per dart is required")
        for d, c in enumerate(colors):
            if c not in _COLOR_RANK:
                raise InvalidMapError(f"unknown color {c!r} at dart {d}")
            if colors[self.base.sigma(d)] != c:
                raise InvalidMapError(f"color changes around the vertex of dart {d}")
            if colors[self.base.alpha(d)] == c:
                raise NotBipartiteError(f"edge of dart {d} joins two {c} vertices")

    @property
    def n_darts(self) -> int:
        return self.base.n_darts

    def vertex_colors(self) -> List[str]:
        return [self.colors[v[0]] for v in self.base.vertices()]

    def to_dict(self) -> Dict[str, Any]:
        data = self.base.to_dict()
        data["colors"] = list(self.colors)
        return data


AnyMap = Union[OrientedMap, ColoredMap]


def _base(m: AnyMap) -> OrientedMap:
    return m.base if isinstance(m, ColoredMap) else m


def map_from_dict(data: Dict[str, Any]) -> AnyMap:
    """Parse the map JSON object; ``colors`` is optional"""
    n = int(data["n_darts"])
    alpha = Permutation(tuple(data["alpha"]))
    sigma = Permutation(tuple(data["sigma"]))
    if alpha.size != n:
        raise InvalidMapError(f"n_darts={n} but alpha has {alpha.size} entries")
    base = OrientedMap(alpha, sigma)
    if data.get("colors") is not None:
        return ColoredMap(base, tuple(data["colors"]))
    return base


def counts(m: AnyMap) -> Tuple[int, int, int]:
    """(V, E, F) of a map"""
    base = _base(m)
    return len(base.vertices()), base.n_darts // 2, len(base.faces())


def euler_genus(m: AnyMap) -> int:
    v, e, f = counts(m)
    defect = 2 - (v - e + f)
    if defect % 2 or defect < 0:
        raise InvalidMapError(f"Euler defect {defect} for counts {(v, e, f)}")
    return defect // 2


def dual_map(m: OrientedMap) -> OrientedMap:
    """Vertices of the dual are the faces of ``m`` and vice versa"""
    return OrientedMap(m.alpha, m.phi)


def mirror(m: AnyMap) -> AnyMap:
    if isinstance(m, ColoredMap):
        return ColoredMap(mirror(m.base), m.colors)
    return OrientedMap(m.alpha, m.sigma.inverse())


def swap_colors(m: ColoredMap) -> ColoredMap:
    flipped = {WHITE: BLACK, BLACK: WHITE}
    return ColoredMap(m.base, tuple(flipped[c] for c in m.colors))


def bicolor(m: OrientedMap, root_color: str = WHITE) -> ColoredMap:
    """The unique proper 2-coloring with the vertex of dart 0 in ``root_color``"""
    if root_color not in _COLOR_RANK:
        raise ValueError(f"unknown color {root_color!r}")
    other = {WHITE: BLACK, BLACK: WHITE}
    vertex = m.vertex_index()
    vertex_darts = m.vertices()
    color: Dict[int, str] = {vertex[0]: root_color}
    queue = deque([vertex[0]])
    while queue:
        v = queue.popleft()
        for d in vertex_darts[v]:
            u = vertex[m.alpha(d)]
            if u == v:
                raise NotBipartiteError(f"loop at dart {d}")
            if u not in color:
                color[u] = other[color[v]]
                queue.append(u)
            elif color[u] == color[v]:
                raise NotBipartiteError(f"odd cycle through dart {d}")
    return ColoredMap(m, tuple(color[vertex[d]] for d in range(m.n_darts)))


def relabel(m: AnyMap, r: Permutation) -> AnyMap:
    """Rename dart d as r(d)"""
    base = _base(m)
    if r.size != base.n_darts:
        raise InvalidMapError(f"relabeling of size {r.size} on a map with {base.n_darts} darts")
    n = base.n_darts
    sigma = [0] * n
    alpha = [0] * n
    for d in range(n):
        sigma[r(d)] = r(base.sigma(d))
        alpha[r(d)] = r(base.alpha(d))
    new_base = OrientedMap(Permutation(tuple(alpha)), Permutation(tuple(sigma)))
    if isinstance(m, ColoredMap):
        colors = [""] * n
        for d in range(n):
            colors[r(d)] = m.colors[d]
        return ColoredMap(new_base, tuple(colors))
    return new_base


@dataclass(frozen=True, order=True)
class CanonicalCode:
    colored: bool
    n_darts: int
    word: Tuple[int, ...]
    automorphism_count: int = field(default=1, compare=False)

    @property
    def text(self) -> str:
        prefix = "c" if self.colored else "u"
        return f"{prefix}{self.n_darts}:" + ".".join(str(x) for x in self.word)


def _traverse(base: OrientedMap, colors: Optional[Tuple[str, ...]], root: int) -> Tuple[Tuple[int, ...], List[int]]:
    label = {root: 0}
    order = [root]
    word: List[int] = []
    i = 0
    while i < len(order):
        d = order[i]
        for e in (base.sigma(d), base.alpha(d)):
            if e not in label:
                label[e] = len(order)
                order.append(e)
        if colors is not None:
            word.append(_COLOR_RANK[colors[d]])
        word.append(label[base.sigma(d)])
        word.append(label[base.alpha(d)])
        i += 1
    return tuple(word), order


def _minimal_traversal(m: AnyMap) -> Tuple[Tuple[int, ...], List[int], int]:
    base = _base(m)
    colors = m.colors if isinstance(m, ColoredMap) else None
    best_word: Optional[Tuple[int, ...]] = None
    best_order: List[int] = []
    hits = 0
    for root in range(base.n_darts):
        word, order = _traverse(base, colors, root)
        if best_word is None or word < best_word:
            best_word, best_order, hits = word, order, 1
        elif word == best_word:
            hits += 1
    return best_word or (), best_order, max(hits, 1)


def canonical_code(m: AnyMap) -> CanonicalCode:
    """Lexicographically least traversal word over all root darts"""
    word, _, hits = _minimal_traversal(m)
    return CanonicalCode(
        colored=isinstance(m, ColoredMap),
        n_darts=_base(m).n_darts,
        word=word,
        automorphism_count=hits,
    )


def canonical_form(m: AnyMap) -> AnyMap:
    """Relabel ``m`` so that the least root's traversal order becomes 0..n-1"""
    _, order, _ = _minimal_traversal(m)
    if not order:
        return m
    r = [0] * len(order)
    for new, old in enumerate(order):
        r[old] = new
    return relabel(m, Permutation(tuple(r)))


def random_relabeling(n: int, rng: random.Random) -> Permutation:
    image = list(range(n))
    rng.shuffle(image)
    return Permutation(tuple(image))


def random_map(n_edges: int, rng: random.Random) -> OrientedMap:
    """Uniform connected rotation system with ``n_edges`` edges (rejection sampling)"""
    n = 2 * n_edges
    while True:
        sigma = list(range(n))
        rng.shuffle(sigma)
        alpha = tuple(d ^ 1 for d in range(n))
        if _is_transitive(Permutation(alpha), Permutation(tuple(sigma))):
            return OrientedMap(Permutation(alpha), Permutation(tuple(sigma)))
