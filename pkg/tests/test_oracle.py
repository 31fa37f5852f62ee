import numpy as np
import pytest

from knothe_brenier import dual
from knothe_brenier.cells import Atoms, build, sample_atoms
from knothe_brenier.errors import NoConvergence
from knothe_brenier.knothe import initial_prices, strips
from knothe_brenier.oracle import (correlation_shape, exact_correlation_curve,
                                   knothe_limit_check, solve_fixed_eps, strip_deviation)


@pytest.mark.parametrize("eps", [0.0, 0.2, 1.0])
def test_two_symmetric(square, two_symmetric, eps):
    rep = solve_fixed_eps(two_symmetric, square, eps)
    assert rep.prices.tolist() == [0.0, 0.0]
    assert rep.iterations <= 1


def test_single_atom(square):
    rep = solve_fixed_eps(Atoms([(0.2, 0.2)]), square, 1.0)
    assert rep.prices.tolist() == [0.0] and rep.iterations == 0


def test_five_two_initializations_agree(square, five):
    a = solve_fixed_eps(five, square, 1.0, p_init=initial_prices(five, square))
    b = solve_fixed_eps(five, square, 1.0, p_init=np.zeros(5))
    assert np.abs(a.areas - 0.2).max() <= 1e-10
    assert np.abs(b.areas - 0.2).max() <= 1e-10
    assert a.prices[0] == b.prices[0] == 0.0
    assert np.abs(a.prices - b.prices).max() <= 1e-8


@pytest.mark.parametrize("seed", range(6))
def test_optimality_and_monotone_ascent(seed, hexagon):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 15))
    atoms = sample_atoms(hexagon, n, rng)
    eps = float(rng.choice([1e-3, 0.1, 0.5, 1.0]))
    rep = solve_fixed_eps(atoms, hexagon, eps)
    total = build(atoms, eps, rep.prices, hexagon).total_area
    tol = 1e-10 * total
    assert rep.grad_norm <= tol
    assert np.abs(total / n - rep.areas).max() <= tol * (1 + 1e-9)
    hist = np.array(rep.phi_history)
    assert np.all(np.diff(hist) >= -1e-13 * np.abs(hist).max())


def test_no_convergence_reported(square, five):
    with pytest.raises(NoConvergence):
        solve_fixed_eps(five, square, 1.0, max_iter=1, tol=1e-15)


def test_knothe_limit_symmetric(square, two_symmetric):
    for _, dev in knothe_limit_check(two_symmetric, square, [0.1, 0.01]):
        assert dev == pytest.approx(0.0, abs=1e-12)


def test_knothe_limit_at_zero(square, five):
    [(_, dev)] = knothe_limit_check(five, square, [0.0])
    assert dev <= 1e-9


def test_knothe_limit_five(square, five):
    devs = [d for _, d in knothe_limit_check(five, square, [1e-1, 1e-2, 1e-3])]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] <= 0.02


def test_strip_deviation_of_strips_is_zero(hexagon):
    atoms = sample_atoms(hexagon, 5, np.random.default_rng(1))
    assert strip_deviation(strips(hexagon, atoms), atoms, hexagon) == pytest.approx(0, abs=1e-12)


def test_strip_deviation_bounded_by_two(square, five):
    cx = build(five, 1.0, solve_fixed_eps(five, square, 1.0).prices, square)
    assert 0 < strip_deviation(cx.cells, five, square) <= 2


def test_exact_correlation_curve_symmetric(square, two_symmetric):
    grid = np.linspace(0, 1, 5)
    z, _ = exact_correlation_curve(two_symmetric, square, grid)
    # cells never move, so neither does z
    assert np.ptp(z, axis=0) == pytest.approx([0, 0], abs=1e-12)


def test_correlation_supporting_lines(square, five):
    # z(eps) maximizes eps z1 + z2 over the computed points
    grid = np.linspace(0, 1, 11)
    z, _ = exact_correlation_curve(five, square, grid)
    for k, e in enumerate(grid):
        vals = e * z[:, 0] + z[:, 1]
        assert vals[k] >= vals.max() - 1e-12
    shape = correlation_shape(z, grid)
    assert shape["decreasing"] and shape["concave"] and shape["slope_matches"]


def test_correlation_shape_flags_convex_curve():
    grid = np.linspace(0, 1, 5)
    x = np.linspace(0, 1, 5)
    z = np.c_[x, (1 - x) ** 2]
    assert not correlation_shape(z, grid)["concave"]


def test_phi_is_maximal_at_solution(square, five):
    rep = solve_fixed_eps(five, square, 0.7)
    best = dual.phi(rep.prices, 0.7, five, square)
    rng = np.random.default_rng(0)
    for _ in range(20):
        q = rep.prices + np.r_[0.0, rng.normal(scale=1e-3, size=4)]
        assert dual.phi(q, 0.7, five, square) <= best + 1e-15
