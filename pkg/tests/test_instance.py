import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partialaco import (
    Instance,
    Tour,
    TourError,
    TSPLIBError,
    brute_force_optimum,
    check_permutation,
    dist,
    load_instance,
    load_optima,
    parse_tsplib,
    parse_tsplib_text,
    random_instance,
    tour_length,
    write_tsplib,
)
from partialaco.instance import MATRIX_LIMIT

from oracles import cycle_length_reverse, dist_table, held_karp

TRIANGLE = """NAME : tri
TYPE : TSP
DIMENSION : 3
EDGE_WEIGHT_TYPE : EUC_2D
NODE_COORD_SECTION
1 0 0
2 3 0
3 0 4
EOF
"""


def tsp_text(coords, dimension=None, ewt="EUC_2D"):
    lines = ["NAME : t", "TYPE : TSP", f"DIMENSION : {dimension or len(coords)}",
             f"EDGE_WEIGHT_TYPE : {ewt}", "NODE_COORD_SECTION"]
    lines += [f"{i} {x} {y}" for i, (x, y) in enumerate(coords, start=1)]
    return "\n".join(lines + ["EOF"]) + "\n"


def test_parse_triangle():
    inst = parse_tsplib_text(TRIANGLE)
    assert inst.n == 3
    assert inst.name == "tri"
    assert inst.coords.tolist() == [[0, 0], [3, 0], [0, 4]]


def test_parse_real_files(data_dir, optima):
    for name, n in [("berlin52", 52), ("pr107", 107), ("xqf131", 131)]:
        inst = load_instance(data_dir / f"{name}.tsp", optima)
        assert inst.n == n
        assert inst.optimum == optima[name]


def test_dimension_mismatch_reports_line():
    text = tsp_text([(0, 0), (1, 0), (2, 0), (3, 3)], dimension=5)
    with pytest.raises(TSPLIBError, match="DIMENSION is 5 but 4") as exc:
        parse_tsplib_text(text)
    assert exc.value.lineno == 10


@pytest.mark.parametrize("text,lineno,msg", [
    (tsp_text([(0, 0), (1, 0), (2, 2)], ewt="GEO"), 5, "unsupported EDGE_WEIGHT_TYPE"),
    (tsp_text([(0, 0), (1, 0), (2, 2)]).replace("2 1 0", "2 1 zero"), 7, "non-numeric"),
    (tsp_text([(0, 0), (1, 0), (2, 2)]).replace("TYPE : TSP", "TYPE TSP"), 2, "malformed header"),
    (tsp_text([(0, 0), (1, 0), (2, 2)]).replace("TYPE : TSP", "TYPE : ATSP"), 2, "unsupported problem TYPE"),
    (tsp_text([(0, 0), (1, 0), (2, 2)]).replace("DIMENSION : 3", "DIMENSION : three"), 3, "not an integer"),
    (tsp_text([(0, 0), (1, 0), (2, 2)]).replace("2 1 0", "1 1 0"), 7, "duplicate"),
    (tsp_text([(0, 0), (1, 0), (2, 2), (5, 5)], dimension=3), 9, "more than DIMENSION"),
    (tsp_text([(0, 0), (1, 0), (2, 2)]).replace("EDGE_WEIGHT_TYPE : EUC_2D\n", ""), 4, "missing EDGE_WEIGHT_TYPE"),
    (tsp_text([(0, 0), (1, 0), (2, 2)]).replace("2 1 0", "2 1 nan"), 7, "non-finite"),
])
def test_parse_errors_carry_line_numbers(text, lineno, msg):
    with pytest.raises(TSPLIBError, match=msg) as exc:
        parse_tsplib_text(text)
    assert exc.value.lineno == lineno
    assert str(exc.value).startswith(f"line {lineno}:")


def test_unknown_header_keys_are_ignored(data_dir):
    # pr107 carries fields beyond the core header
    assert parse_tsplib(data_dir / "pr107.tsp").n == 107


def test_instance_invariants():
    with pytest.raises(ValueError):
        Instance("x", np.zeros((2, 2)))
    with pytest.raises(ValueError):
        Instance("x", np.array([[0, 0], [1, np.inf], [2, 2]]))
    with pytest.raises(ValueError):
        Instance("x", np.zeros((3, 2)), optimum=0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)), min_size=3, max_size=30))
def test_round_trip(coords):
    inst = Instance("rt", np.array(coords, dtype=float))
    buf = io.StringIO()
    write_tsplib(inst, buf)
    back = parse_tsplib_text(buf.getvalue())
    assert back.n == inst.n
    assert np.array_equal(back.coords, inst.coords)


def test_dist_examples():
    inst = Instance("d", np.array([[0, 0], [3, 4], [1, 1]]))
    assert dist(inst, 0, 1) == 5
    assert dist(inst, 0, 2) == 1
    assert dist(inst, 1, 1) == 0


def test_dist_half_rounds_up():
    inst = Instance("h", np.array([[0, 0], [2.5, 0], [0, 1.5]]))
    assert dist(inst, 0, 1) == 3
    assert dist(inst, 0, 2) == 2


def test_dist_symmetry_on_sampled_pairs(data_dir):
    inst = parse_tsplib(data_dir / "xqf131.tsp")
    r = np.random.default_rng(0)
    ii, jj = r.integers(0, inst.n, 10_000), r.integers(0, inst.n, 10_000)
    assert np.array_equal(inst.dists(ii, jj), inst.dists(jj, ii))
    assert all(dist(inst, i, i) == 0 for i in range(inst.n))
    ref = dist_table(inst.coords)
    assert all(inst.dist(i, j) == ref[i][j] for i, j in zip(ii[:500], jj[:500]))


def test_matrix_free_distances_agree():
    big = random_instance(MATRIX_LIMIT + 1, np.random.default_rng(3))
    assert big.dist_matrix is None and big.eta_pow(5.0) is None
    small = Instance("s", big.coords[:200])
    r = np.random.default_rng(1)
    a, b = r.integers(0, 200, 1000), r.integers(0, 200, 1000)
    assert np.array_equal(big.dists(a, b), small.dists(a, b))


def test_tour_length_triangle():
    inst = parse_tsplib_text(TRIANGLE)
    assert tour_length(inst, [0, 1, 2]) == 12


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 12), st.integers(0, 2**32 - 1), st.integers(0, 11))
def test_tour_length_rotation_and_reversal(n, seed, shift):
    inst = random_instance(n, np.random.default_rng(seed))
    order = np.random.default_rng(seed + 1).permutation(n)
    base = tour_length(inst, order)
    assert tour_length(inst, np.roll(order, shift % n)) == base
    assert tour_length(inst, order[::-1]) == base
    assert base == cycle_length_reverse(dist_table(inst.coords), order.tolist())


def test_tour_length_rejects_non_permutations():
    inst = parse_tsplib_text(TRIANGLE)
    with pytest.raises(TourError):
        tour_length(inst, [0, 1, 1])
    with pytest.raises(TourError):
        tour_length(inst, [0, 1])
    with pytest.raises(TourError):
        check_permutation([0, 1, 3], 3)


def test_tour_value_object(berlin52):
    order = np.arange(52)
    t = Tour.of(berlin52, order)
    assert t.length == tour_length(berlin52, order)
    assert t.same_cycle(Tour.of(berlin52, np.roll(order[::-1], 7)))
    assert len(t.edges()) == 52


def test_brute_force_small_cases():
    assert brute_force_optimum(parse_tsplib_text(TRIANGLE)).length == 12
    square = Instance("sq", np.array([[0, 0], [1, 0], [1, 1], [0, 1]]))
    assert brute_force_optimum(square).length == 4
    with pytest.raises(ValueError):
        brute_force_optimum(random_instance(11, np.random.default_rng(0)))


@pytest.mark.parametrize("seed", range(5))
def test_brute_force_matches_held_karp(seed):
    inst = random_instance(8, np.random.default_rng(seed))
    bf = brute_force_optimum(inst)
    assert bf.length == held_karp(dist_table(inst.coords))
    assert bf.length == tour_length(inst, bf.order)


def test_brute_force_is_a_lower_bound():
    inst = random_instance(7, np.random.default_rng(9))
    best = brute_force_optimum(inst).length
    assert all(best <= tour_length(inst, (0,) + p) for p in itertools.permutations(range(1, 7)))


def test_load_optima(tmp_path):
    p = tmp_path / "opt.txt"
    p.write_text("# comment\nfoo 10\n\nbar 20  # trailing\n")
    assert load_optima(p) == {"foo": 10, "bar": 20}
    p.write_text("foo\n")
    with pytest.raises(ValueError, match="opt.txt:1"):
        load_optima(p)
