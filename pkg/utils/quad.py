import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

from utils.errors import IntegrityError, InvalidMapError, ShapeError
from utils.map_core import (
    BLACK,
    WHITE,
    ColoredMap,
    OrientedMap,
    Permutation,
    canonical_code,
    counts,
)

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]

M446_COUNTS = (6, 7, 3)
M446_FACES = (4, 4, 6)


@dataclass(frozen=True)
class ArcDescriptor:
    black_corner: int
    white_corner: int
    hexagon: Tuple[int, ...]
    position: int

    def __post_init__(self):
        if self.black_corner not in self.hexagon or self.white_corner not in self.hexagon:
            raise ShapeError("arc corners must lie on the hexagon circuit")
        i = self.hexagon.index(self.black_corner)
        if self.hexagon[(i + 3) % 6] != self.white_corner:
            raise ShapeError("arc corners are not opposite on the hexagon")


def quadrangulate(m: OrientedMap) -> ColoredMap:
    """
    Paint vertices white, put a black capital in each face, join it to its corners, drop old edges.

    Dart d of the map becomes the Q-edge (2d, 2d+1): dart 2d sits at the white
    vertex of d and dart 2d+1 at the black capital of the face through the corner
    between sigma^-1(d) and d.
    """
    n = m.n_darts
    phi_inv = m.phi.inverse()
    sigma = [0] * (2 * n)
    for d in range(n):
        sigma[2 * d] = 2 * m.sigma(d)
        sigma[2 * d + 1] = 2 * phi_inv(d) + 1
    alpha = tuple(x ^ 1 for x in range(2 * n))
    colors = tuple(WHITE if x % 2 == 0 else BLACK for x in range(2 * n))
    return ColoredMap(OrientedMap(Permutation(alpha), Permutation(tuple(sigma))), colors)


def is_quadrangulation(q: ColoredMap) -> bool:
    return all(len(f) == 4 for f in q.base.faces())


def dequadrangulate(q: ColoredMap) -> OrientedMap:
    """Inverse of ``quadrangulate``: white darts become the darts of the map"""
    if not is_quadrangulation(q):
        raise ShapeError(f"not a quadrangulation: face degrees {q.base.face_degrees()}")
    base = q.base
    phi = base.phi
    sigma_inv = base.sigma.inverse()
    whites = [d for d in range(base.n_darts) if q.colors[d] == WHITE]
    index = {d: i for i, d in enumerate(whites)}
    sigma = [index[base.sigma(d)] for d in whites]
    alpha = [index[sigma_inv(phi(phi(base.sigma(d))))] for d in whites]
    try:
        return OrientedMap(Permutation(tuple(alpha)), Permutation(tuple(sigma)))
    except InvalidMapError as e:
        raise IntegrityError(f"quadrangulation does not come from a map: {e}") from e


def separating_edges(q: ColoredMap) -> List[Edge]:
    """Edges whose two sides lie in distinct faces"""
    face = q.base.face_index()
    return [
        (e[0], e[1])
        for e in q.base.edges()
        if face[e[0]] != face[e[1]]
    ]


def _delete_edge(q: ColoredMap, e: Edge) -> Tuple[ColoredMap, Dict[int, int]]:
    e = (min(e), max(e))
    if e not in separating_edges(q):
        raise ShapeError(f"edge {e} does not separate two faces")
    base = q.base
    gone = set(e)
    keep = [d for d in range(base.n_darts) if d not in gone]
    index = {d: i for i, d in enumerate(keep)}
    sigma = []
    for d in keep:
        s = base.sigma(d)
        while s in gone:
            s = base.sigma(s)
        sigma.append(index[s])
    alpha = [index[base.alpha(d)] for d in keep]
    colors = tuple(q.colors[d] for d in keep)
    reduced = ColoredMap(OrientedMap(Permutation(tuple(alpha)), Permutation(tuple(sigma))), colors)
    return reduced, index


def delete_separating_edge(q: ColoredMap, e: Edge) -> ColoredMap:
    reduced, _ = _delete_edge(q, e)
    return reduced


def check_m446_shape(m: ColoredMap) -> None:
    if counts(m) != M446_COUNTS or m.base.face_degrees() != M446_FACES:
        raise ShapeError(
            f"expected counts {M446_COUNTS} and faces {M446_FACES}, "
            f"got {counts(m)} and {m.base.face_degrees()}"
        )


def arcs(m: ColoredMap) -> List[ArcDescriptor]:
    """The three black-to-opposite-white chords of the hexagon, in circuit order"""
    hexagons = [f for f in m.base.faces() if len(f) == 6]
    if len(hexagons) != 1:
        raise ShapeError(f"expected one face of degree 6, got face degrees {m.base.face_degrees()}")
    circuit = tuple(hexagons[0])
    for i, d in enumerate(circuit):
        if m.colors[d] == m.colors[circuit[(i + 1) % 6]]:
            raise ShapeError("hexagon corners do not alternate colors")
    found = []
    for i, d in enumerate(circuit):
        if m.colors[d] == BLACK:
            found.append(ArcDescriptor(d, circuit[(i + 3) % 6], circuit, len(found)))
    return found


def insert_arc(m: ColoredMap, a: ArcDescriptor) -> ColoredMap:
    """Split the hexagon along ``a``; the new darts are appended as n (black end) and n+1"""
    base = m.base
    if m.colors[a.black_corner] != BLACK or m.colors[a.white_corner] != WHITE:
        raise ShapeError("arc corners have the wrong colors")
    n = base.n_darts
    p, q = n, n + 1
    sigma_inv = base.sigma.inverse()
    sigma = list(base.sigma.image) + [0, 0]
    alpha = list(base.alpha.image) + [q, p]
    for new, corner in ((p, a.black_corner), (q, a.white_corner)):
        sigma[sigma_inv(corner)] = new
        sigma[new] = corner
    colors = m.colors + (BLACK, WHITE)
    return ColoredMap(OrientedMap(Permutation(tuple(alpha)), Permutation(tuple(sigma))), colors)


def reinsertion_arc(q: ColoredMap, e: Edge) -> Tuple[ColoredMap, ArcDescriptor]:
    """Delete ``e`` and return the arc of the result that sits exactly where ``e`` was"""
    reduced, index = _delete_edge(q, e)
    x, y = e
    white_dart, black_dart = (x, y) if q.colors[x] == WHITE else (y, x)
    black_corner = index[q.base.sigma(black_dart)]
    white_corner = index[q.base.sigma(white_dart)]
    for a in arcs(reduced):
        if a.black_corner == black_corner:
            if a.white_corner != white_corner:
                raise IntegrityError(f"deleted edge {e} does not span opposite hexagon corners")
            return reduced, a
    raise IntegrityError(f"deleted edge {e} left no black corner on the hexagon")


def restoring_arcs(q: ColoredMap, e: Edge) -> List[int]:
    """Positions of the arcs of Q - e whose insertion gives a map isomorphic to Q"""
    target = canonical_code(q)
    reduced = delete_separating_edge(q, e)
    return [
        a.position
        for a in arcs(reduced)
        if canonical_code(insert_arc(reduced, a)) == target
    ]
