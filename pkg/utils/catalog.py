import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterator, List, Optional, Tuple

from utils.config import settings
from utils.errors import IntegrityError, InvalidMapError, ShapeError
from utils.map_core import (
    AnyMap,
    CanonicalCode,
    ColoredMap,
    OrientedMap,
    Permutation,
    canonical_code,
    canonical_form,
    counts,
    euler_genus,
    map_from_dict,
    mirror,
    swap_colors,
)
from utils.quad import Edge, check_m446_shape, delete_separating_edge, quadrangulate, separating_edges

logger = logging.getLogger(__name__)

M33 = "M33"
M446 = "M446"


@dataclass(frozen=True)
class MapClass:
    id: str
    map: AnyMap
    code: CanonicalCode
    counts: Tuple[int, int, int]
    face_degrees: Tuple[int, ...]
    partner: Optional[str] = None

    @property
    def automorphisms(self) -> int:
        return self.code.automorphism_count

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "map": self.map.to_dict(),
            "code": self.code.text,
            "counts": list(self.counts),
            "face_degrees": list(self.face_degrees),
            "automorphisms": self.automorphisms,
            "partner": self.partner,
        }


@dataclass(frozen=True)
class Catalog:
    """Plane maps with 3 vertices and 3 faces (m33) or the bipartite M(4,4,6) maps (m446)"""
    kind: str
    classes: Tuple[MapClass, ...]

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self) -> Iterator[MapClass]:
        return iter(self.classes)

    @cached_property
    def _by_id(self) -> Dict[str, MapClass]:
        return {c.id: c for c in self.classes}

    @cached_property
    def _by_code(self) -> Dict[CanonicalCode, MapClass]:
        return {c.code: c for c in self.classes}

    def ids(self) -> List[str]:
        return [c.id for c in self.classes]

    def get(self, class_id: str) -> MapClass:
        return self._by_id[class_id]

    def find(self, code: CanonicalCode) -> Optional[MapClass]:
        return self._by_code.get(code)

    def lookup(self, m: AnyMap) -> MapClass:
        """Class of an arbitrary representative; raises if it is not in the catalog"""
        found = self.find(canonical_code(m))
        if found is None:
            raise IntegrityError(f"map with counts {counts(m)} is not in the {self.kind} catalog")
        return found

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "classes": [c.to_dict() for c in self.classes]}


def catalog_from_dict(data: Dict[str, Any]) -> Catalog:
    classes = []
    for entry in data["classes"]:
        m = map_from_dict(entry["map"])
        classes.append(MapClass(
            id=entry["id"],
            map=m,
            code=canonical_code(m),
            counts=counts(m),
            face_degrees=m.base.face_degrees() if isinstance(m, ColoredMap) else m.face_degrees(),
            partner=entry.get("partner"),
        ))
    return Catalog(data["kind"], tuple(classes))


def permutations_with_cycles(n: int, k: int) -> Iterator[Tuple[int, ...]]:
    """All permutations of 0..n-1 with exactly ``k`` cycles, as image tuples"""

    def cycle_sets(remaining: Tuple[int, ...], k: int) -> Iterator[List[Tuple[int, ...]]]:
        if k == 0:
            if not remaining:
                yield []
            return
        if len(remaining) < k:
            return
        first, rest = remaining[0], remaining[1:]
        for size in range(len(rest) - k + 2):
            for others in itertools.combinations(rest, size):
                left = tuple(x for x in rest if x not in others)
                tails = list(cycle_sets(left, k - 1))
                for arrangement in itertools.permutations(others):
                    for tail in tails:
                        yield [(first,) + arrangement] + tail

    for cycles in cycle_sets(tuple(range(n)), k):
        yield Permutation.from_cycles(n, cycles).image


def _fixed_point_free_involutions(n: int) -> Iterator[Tuple[int, ...]]:
    def pairings(remaining: Tuple[int, ...]) -> Iterator[List[Tuple[int, int]]]:
        if not remaining:
            yield []
            return
        a = remaining[0]
        for i in range(1, len(remaining)):
            b = remaining[i]
            rest = remaining[1:i] + remaining[i + 1:]
            for tail in pairings(rest):
                yield [(a, b)] + tail

    for pairs in pairings(tuple(range(n))):
        yield Permutation.from_cycles(n, pairs).image


def _plane_map_codes(V: int, F: int, alphas) -> Dict[CanonicalCode, OrientedMap]:
    E = V + F - 2
    if E < 1:
        raise ValueError(f"no plane map has V={V}, F={F} (E={E})")
    found: Dict[CanonicalCode, OrientedMap] = {}
    for alpha in alphas(2 * E):
        for sigma in permutations_with_cycles(2 * E, V):
            try:
                m = OrientedMap(Permutation(alpha), Permutation(sigma))
            except InvalidMapError:
                continue
            if len(m.faces()) != F:
                continue
            code = canonical_code(m)
            if code not in found:
                found[code] = canonical_form(m)
    return found


def _catalog_from_codes(prefix: str, found: Dict[CanonicalCode, AnyMap]) -> List[MapClass]:
    width = max(2, len(str(len(found))))
    classes = []
    for i, code in enumerate(sorted(found)):
        m = found[code]
        base = m.base if isinstance(m, ColoredMap) else m
        classes.append(MapClass(
            id=f"{prefix}{i + 1:0{width}d}",
            map=m,
            code=code,
            counts=counts(m),
            face_degrees=base.face_degrees(),
        ))
    return classes


def enumerate_plane_maps(V: int, F: int) -> Catalog:
    """Orientation-preserving classes of connected plane maps with V vertices and F faces"""
    found = _plane_map_codes(V, F, lambda n: [tuple(d ^ 1 for d in range(n))])
    kind = M33 if (V, F) == (3, 3) else f"M{V}_{F}"
    classes = _catalog_from_codes("W", found)
    by_code = {c.code: c for c in classes}
    paired = []
    for c in classes:
        partner = by_code.get(canonical_code(mirror(c.map)))
        paired.append(_with_partner(c, partner.id if partner and partner.id != c.id else None))
    logger.info(f"Enumerated {len(paired)} plane maps with V={V}, F={F}")
    return Catalog(kind, tuple(paired))


def enumerate_plane_maps_bruteforce(V: int, F: int) -> List[CanonicalCode]:
    """Independent oracle iterating every involution too; only sensible up to ~10 darts"""
    return sorted(_plane_map_codes(V, F, _fixed_point_free_involutions))


def _with_partner(c: MapClass, partner: Optional[str]) -> MapClass:
    return MapClass(c.id, c.map, c.code, c.counts, c.face_degrees, partner)


def build_m33() -> Catalog:
    catalog = enumerate_plane_maps(3, 3)
    for c in catalog:
        if c.counts != (3, 4, 3) or euler_genus(c.map) != 0:
            raise IntegrityError(f"{c.id} has counts {c.counts}")
    if len(catalog) != settings.EXPECTED_M33:
        logger.warning(f"M33 catalog has {len(catalog)} classes, expected {settings.EXPECTED_M33}")
    return catalog


@dataclass(frozen=True)
class DeletionEvent:
    white_id: str
    edge: Edge
    code: CanonicalCode
    result: ColoredMap = field(compare=False)


def deletion_events(m33: Catalog) -> List[DeletionEvent]:
    """Every (white class, separating edge of its quadrangulation) pair"""
    events = []
    for c in m33:
        q = quadrangulate(c.map)
        for e in separating_edges(q):
            result = delete_separating_edge(q, e)
            try:
                check_m446_shape(result)
            except ShapeError as err:
                raise IntegrityError(f"deleting {e} from the quadrangulation of {c.id}: {err}") from err
            events.append(DeletionEvent(c.id, e, canonical_code(result), result))
    return events


def _twins(m: ColoredMap) -> List[Tuple[str, ColoredMap]]:
    return [
        ("mirror", mirror(m)),
        ("swap", swap_colors(m)),
        ("mirror+swap", mirror(swap_colors(m))),
    ]


def build_m446(m33: Catalog) -> Catalog:
    found: Dict[CanonicalCode, ColoredMap] = {}
    for event in deletion_events(m33):
        if event.code not in found:
            found[event.code] = canonical_form(event.result)
    classes = _catalog_from_codes("B", found)
    by_code = {c.code: c for c in classes}
    paired = []
    for c in classes:
        partner = None
        for _, twin in _twins(c.map):
            other = by_code.get(canonical_code(twin))
            if other is None:
                raise IntegrityError(f"a mirror or color swap of {c.id} is missing from the catalog")
            if other.id != c.id:
                partner = other.id
                break
        paired.append(_with_partner(c, partner))
    if len(paired) != settings.EXPECTED_M446:
        logger.warning(f"M446 catalog has {len(paired)} classes, expected {settings.EXPECTED_M446}")
    logger.info(f"Built {len(paired)} M(4,4,6) classes")
    return Catalog(M446, tuple(paired))


@dataclass(frozen=True)
class PairingReport:
    pairs: Tuple[Tuple[str, str], ...]
    singletons: Tuple[str, ...]
    relation: Dict[str, str]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pairs": [list(p) for p in self.pairs],
            "singletons": list(self.singletons),
            "relation": dict(sorted(self.relation.items())),
        }


def pair_primes(c: Catalog) -> PairingReport:
    """Split the classes into {n, n'} pairs and self-twinned singletons"""
    pairs = []
    singletons = []
    relation = {}
    for cls in c:
        if cls.partner is None:
            singletons.append(cls.id)
            continue
        partner = c.get(cls.partner)
        if partner.partner != cls.id:
            raise IntegrityError(f"partner relation is not symmetric at {cls.id}")
        if isinstance(cls.map, ColoredMap):
            for how, twin in _twins(cls.map):
                if canonical_code(twin) == partner.code:
                    relation[cls.id] = how
                    break
        else:
            relation[cls.id] = "mirror"
        if cls.id < partner.id:
            pairs.append((cls.id, partner.id))
    return PairingReport(tuple(pairs), tuple(singletons), relation)
