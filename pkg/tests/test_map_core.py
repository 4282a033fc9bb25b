import pytest

from utils.errors import InvalidMapError, NotBipartiteError
from utils.map_core import (
    BLACK,
    WHITE,
    ColoredMap,
    OrientedMap,
    Permutation,
    bicolor,
    canonical_code,
    canonical_form,
    counts,
    dual_map,
    euler_genus,
    map_from_dict,
    mirror,
    orbits,
    random_map,
    random_relabeling,
    relabel,
    swap_colors,
)


def test_orbits_start_at_least_dart():
    assert orbits(Permutation((1, 2, 0, 3))) == [[0, 1, 2], [3]]
    assert orbits(Permutation.from_cycles(4, [(0, 1), (2, 3)])) == [[0, 1], [2, 3]]
    assert orbits(Permutation(())) == []


def test_permutation_rejects_non_bijection():
    with pytest.raises(InvalidMapError):
        Permutation((0, 0, 1))


def test_compose_applies_right_first():
    p = Permutation((1, 2, 0))
    q = Permutation((0, 2, 1))
    assert p.compose(q).image == (1, 0, 2)
    assert p.compose(p.inverse()).is_identity()


def test_counts_of_small_maps(loop_map, edge_map, torus_map):
    assert counts(loop_map) == (1, 1, 2)
    assert counts(edge_map) == (2, 1, 1)
    assert counts(torus_map) == (1, 2, 1)
    assert euler_genus(loop_map) == 0
    assert euler_genus(edge_map) == 0
    assert euler_genus(torus_map) == 1


def test_alpha_must_be_fixed_point_free_involution():
    with pytest.raises(InvalidMapError):
        OrientedMap(Permutation((0, 1)), Permutation((1, 0)))
    with pytest.raises(InvalidMapError):
        OrientedMap(Permutation((1, 2, 3, 0)), Permutation((0, 1, 2, 3)))


def test_disconnected_map_is_rejected():
    with pytest.raises(InvalidMapError):
        OrientedMap.from_sigma((0, 1, 2, 3))


def test_torus_automorphisms(torus_map):
    assert canonical_code(torus_map).automorphism_count == 4


def test_dual_of_loop_is_edge(loop_map, edge_map):
    assert canonical_code(dual_map(loop_map)) == canonical_code(edge_map)
    assert canonical_code(dual_map(edge_map)) == canonical_code(loop_map)


def test_bicolor(edge_map, loop_map):
    colored = bicolor(edge_map)
    assert colored.colors == (WHITE, BLACK)
    assert bicolor(edge_map, BLACK).colors == (BLACK, WHITE)
    assert swap_colors(colored).colors == (BLACK, WHITE)
    with pytest.raises(NotBipartiteError):
        bicolor(loop_map)


def test_colored_map_rejects_monochrome_edge(edge_map):
    with pytest.raises(NotBipartiteError):
        ColoredMap(edge_map, (WHITE, WHITE))


def test_relabel_by_involution_fixes_loop(loop_map):
    assert relabel(loop_map, Permutation((1, 0))) == loop_map


def test_canonical_code_invariant_under_relabeling(rng):
    for _ in range(100):
        m = random_map(rng.randint(1, 6), rng)
        r = random_relabeling(m.n_darts, rng)
        assert canonical_code(relabel(m, r)) == canonical_code(m)


def test_canonical_code_sees_colors(edge_map):
    colored = bicolor(edge_map)
    assert canonical_code(colored) != canonical_code(edge_map)
    # swapping the colors of a single edge is a relabeling
    assert canonical_code(swap_colors(colored)) == canonical_code(colored)


def test_canonical_form_is_a_representative(rng):
    for _ in range(20):
        m = random_map(rng.randint(1, 5), rng)
        form = canonical_form(m)
        assert canonical_code(form) == canonical_code(m)
        assert canonical_form(relabel(m, random_relabeling(m.n_darts, rng))) == form


def test_dual_and_mirror_are_involutions(rng):
    for _ in range(30):
        m = random_map(rng.randint(1, 6), rng)
        assert dual_map(dual_map(m)).alpha == m.alpha
        assert canonical_code(dual_map(dual_map(m))) == canonical_code(m)
        assert mirror(mirror(m)) == m
        assert counts(dual_map(m)) == tuple(reversed(counts(m)))


def test_map_dict_roundtrip(torus_map, edge_map):
    assert map_from_dict(torus_map.to_dict()) == torus_map
    colored = bicolor(edge_map)
    assert map_from_dict(colored.to_dict()) == colored


def test_map_dict_size_mismatch():
    with pytest.raises(InvalidMapError):
        map_from_dict({"n_darts": 4, "alpha": [1, 0], "sigma": [0, 1]})
