import numpy as np
import pytest
from scipy.optimize import brentq

from knothe_brenier.cells import (Atoms, assign, bisector, build, in_O, sample_atoms,
                                  validate_atoms)
from knothe_brenier.errors import DegenerateAtoms, InvalidProblem
from knothe_brenier.geometry import ConvexPolygon, contains, unit_square


def line_height(h):
    """x2 where the half-plane boundary crosses x1 = 0 (for horizontal lines)."""
    assert h.normal[0] == pytest.approx(0.0, abs=1e-15)
    return h.offset / h.normal[1]


def test_bisector_equal_prices():
    atoms = Atoms([(0, 0), (0, 1)])
    assert line_height(bisector(0, 1, atoms, 1.0, np.zeros(2))) == pytest.approx(0.5)


@pytest.mark.parametrize("a,b", [(0.0, 1.0), (0.9, 0.1), (0.3, 0.3)])
def test_bisector_ignores_first_coordinate_at_eps_zero(a, b):
    atoms = Atoms([(a, 0.25), (b, 0.75)])
    assert line_height(bisector(0, 1, atoms, 0.0, np.zeros(2))) == pytest.approx(0.5)


def test_bisector_with_price_gap_matches_equal_cost_search():
    atoms = Atoms([(0, 0), (0, 1)])
    p = np.array([0.0, 0.2])
    h = line_height(bisector(0, 1, atoms, 1.0, p))
    # independent route: root of the cost difference along x1 = 0
    diff = lambda t: (t**2 - p[0]) - ((t - 1) ** 2 - p[1])
    assert h == pytest.approx(brentq(diff, -2, 2, xtol=1e-15), abs=1e-14)
    assert h == pytest.approx(0.4, abs=1e-15)


def test_bisector_orients_cell_i_inside():
    rng = np.random.default_rng(0)
    atoms = Atoms(rng.uniform(size=(4, 2)))
    p = rng.normal(scale=0.05, size=4)
    pts = rng.uniform(size=(2000, 2))
    owner = assign(pts, atoms, 0.7, p)
    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            h = bisector(i, j, atoms, 0.7, p)
            mine = pts[owner == i]
            assert np.all(mine @ h.normal <= h.offset + 1e-12)


def test_build_single_atom(square):
    cx = build(Atoms([(0.3, 0.6)]), 0.5, [0.0], square)
    assert cx.areas.tolist() == [1.0]
    assert cx.facets == ()


@pytest.mark.parametrize("eps", [0.0, 0.3, 1.0])
def test_build_two_symmetric(square, two_symmetric, eps):
    cx = build(two_symmetric, eps, np.zeros(2), square)
    assert cx.areas == pytest.approx([0.5, 0.5], abs=1e-15)
    fm = cx.facet_map()
    assert set(fm) == {(0, 1), (1, 0)}
    f = fm[(0, 1)]
    assert f.length == pytest.approx(1.0)
    assert all(x[1] == pytest.approx(0.5) for x in f.endpoints)


@pytest.mark.parametrize("seed", [0, 1])
def test_build_areas_against_monte_carlo(square, seed):
    rng = np.random.default_rng(seed)
    atoms = sample_atoms(square, 5, rng)
    cx = build(atoms, 1.0, np.zeros(5), square)
    n = 1_000_000
    owner = assign(rng.uniform(size=(n, 2)), atoms, 1.0, np.zeros(5))
    frac = np.bincount(owner, minlength=5) / n
    sigma = np.sqrt(cx.areas * (1 - cx.areas) / n)
    assert np.all(np.abs(frac - cx.areas) <= 3 * sigma)


def random_state(rng, omega, n):
    atoms = sample_atoms(omega, n, rng)
    return atoms, rng.uniform(0, 1), np.r_[0.0, rng.normal(scale=0.02, size=n - 1)]


@pytest.mark.parametrize("seed", range(15))
def test_partition_and_facet_symmetry(seed, hexagon):
    rng = np.random.default_rng(seed)
    omega = hexagon if seed % 2 else unit_square()
    atoms, eps, p = random_state(rng, omega, int(rng.integers(2, 12)))
    cx = build(atoms, eps, p, omega)
    assert cx.areas.sum() == pytest.approx(cx.total_area, abs=1e-9 * cx.total_area)
    fm = cx.facet_map()
    for (i, j), f in fm.items():
        g = fm[(j, i)]
        assert g.length == f.length
        assert np.array_equal(g.endpoints[0], f.endpoints[1])
        assert np.array_equal(g.endpoints[1], f.endpoints[0])
        assert f.length == pytest.approx(np.linalg.norm(f.endpoints[1] - f.endpoints[0]))


def _vertex_lines(cell, k, atoms, eps, p, omega, i):
    """The two lines meeting at vertex k of cell i, as rows of (normal, offset)."""
    rows = []
    for lab in (cell.labels[k - 1], cell.labels[k]):
        if lab >= 0:
            h = bisector(i, lab, atoms, eps, p)
        else:
            a, b = omega.vertices[-lab - 1], omega.vertices[(-lab) % len(omega)]
            n = np.array([b[1] - a[1], a[0] - b[0]])
            from knothe_brenier.geometry import HalfPlane
            h = HalfPlane(n, float(n @ a))
        rows.append((h.normal, h.offset))
    return rows


@pytest.mark.parametrize("seed", range(10))
def test_facet_endpoints_solve_vertex_systems(seed, hexagon):
    # every cell vertex solves the 2x2 system of the two lines meeting there
    rng = np.random.default_rng(50 + seed)
    omega = hexagon if seed % 2 else unit_square()
    atoms, eps, p = random_state(rng, omega, 6)
    cx = build(atoms, eps, p, omega)
    for i, cell in enumerate(cx.cells):
        for k in range(len(cell)):
            (n1, c1), (n2, c2) = _vertex_lines(cell, k, atoms, eps, p, omega, i)
            x = np.linalg.solve(np.array([n1, n2]), np.array([c1, c2]))
            assert np.allclose(x, cell.vertices[k], atol=1e-9)


def test_eps_zero_gives_strips_in_path_order(square):
    rng = np.random.default_rng(3)
    atoms = sample_atoms(square, 6, rng)
    cx = build(atoms, 0.0, np.zeros(6), square)
    order = np.argsort(atoms.points[:, 1])
    expected = {(int(a), int(b)) for a, b in zip(order[:-1], order[1:])}
    expected |= {(b, a) for a, b in expected}
    assert set(cx.facet_map()) == expected
    for f in cx.facets:
        assert f.endpoints[0][1] == pytest.approx(f.endpoints[1][1], abs=1e-14)


def _matched_vertices(cx0, cx1):
    out = []
    f1 = cx1.facet_map()
    for key, f in cx0.facet_map().items():
        if key in f1:
            out.append(np.max(np.abs(np.array(f.endpoints) - np.array(f1[key].endpoints))))
    return max(out)


def test_facet_endpoints_are_lipschitz(square):
    rng = np.random.default_rng(11)
    atoms = sample_atoms(square, 6, rng)
    eps = 0.6
    p = np.r_[0.0, rng.normal(scale=0.02, size=5)]
    base = build(atoms, eps, p, square)
    topo = set(base.facet_map())
    ratios = {}
    for step in (1e-4, 1e-5, 1e-6):
        worst = 0.0
        for _ in range(10):
            dp = np.r_[0.0, rng.uniform(-1, 1, 5)] * step
            de = rng.uniform(-1, 1) * step
            moved = build(atoms, eps + de, p + dp, square)
            if set(moved.facet_map()) != topo:
                continue
            worst = max(worst, _matched_vertices(base, moved) / (np.abs(dp).sum() + abs(de)))
        ratios[step] = worst
    assert ratios[1e-4] > 0
    # the constant does not blow up under refinement
    assert ratios[1e-6] <= 2 * ratios[1e-4] + 1e-9
    assert ratios[1e-5] <= 2 * ratios[1e-4] + 1e-9


def test_in_O(square, two_symmetric):
    assert in_O(build(two_symmetric, 1.0, np.zeros(2), square), 2)
    atoms = Atoms([(0.5, 0.1), (0.5, 0.9)])
    # a price gap of 1 pushes the boundary out of the domain: cell 0 is empty
    cx = build(atoms, 1.0, np.array([0.0, 1.0]), square)
    assert cx.cells[0].is_empty
    assert not in_O(cx, 2)
    strips = Atoms([(0.5, 0.1 + 0.2 * k) for k in range(5)])
    cx = build(strips, 0.0, np.zeros(5), square)
    assert cx.areas == pytest.approx([0.2] * 5)
    assert in_O(cx, 5)


def test_in_O_scales_with_domain_area():
    big = ConvexPolygon.from_points([(0, 0), (2, 0), (2, 2), (0, 2)])
    cx = build(Atoms([(1, 0.5), (1, 1.5)]), 1.0, np.zeros(2), big)
    assert cx.areas == pytest.approx([2.0, 2.0])
    assert in_O(cx, 2)


def test_validate_rejects_outside_and_duplicates(square):
    with pytest.raises(InvalidProblem, match="outside"):
        validate_atoms(Atoms([(0.5, 0.5), (1.5, 0.2)]), square)
    with pytest.raises(DegenerateAtoms) as err:
        validate_atoms(Atoms([(0.1, 0.5), (0.7, 0.2), (0.9, 0.5)]), square)
    assert err.value.pair == (0, 2)
    # atoms on the boundary are fine
    validate_atoms(Atoms([(0.0, 0.0), (1.0, 1.0)]), square)
