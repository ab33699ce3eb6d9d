import numpy as np
import pytest

from hardy_lt.grid import LogGrid, RadialPotential, build_grid, gaussian_bump, square_well


def test_spacing():
    g = build_grid(-12, 6, 1801)
    assert g.h == pytest.approx(0.01, rel=1e-14)
    assert g.t[0] == -12 and g.t[-1] == 6
    assert np.all(np.diff(g.r) > 0)


def test_two_nodes():
    g = build_grid(0, 1, 2)
    assert g.h == 1.0 and list(g.t) == [0.0, 1.0]


@pytest.mark.parametrize("args", [(1, 0, 10), (0, 0, 10), (0, 1, 1), (0, np.inf, 10)])
def test_invalid(args):
    with pytest.raises(ValueError):
        build_grid(*args)


def test_weights_integrate_constants():
    g = build_grid(-3, 2, 51)
    assert g.weights.sum() == pytest.approx(5.0, rel=1e-14)


def test_grid_equality_ignores_array():
    assert build_grid(-1, 1, 21) == LogGrid(-1.0, 1.0, 21)


class TestPotential:
    def test_rejects_negative(self):
        g = build_grid(0, 1, 20)
        with pytest.raises(ValueError, match="nonnegative"):
            RadialPotential(g, -np.ones(g.n))

    def test_rejects_nan_and_shape(self):
        g = build_grid(0, 1, 20)
        with pytest.raises(ValueError):
            RadialPotential(g, np.full(g.n, np.nan))
        with pytest.raises(ValueError):
            RadialPotential(g, np.ones(3))

    def test_read_only(self):
        g = build_grid(0, 1, 20)
        V = gaussian_bump(g)
        with pytest.raises(ValueError):
            V.values[0] = 1.0

    def test_square_well_cell_average(self):
        g = build_grid(-2, 2, 41)
        V = square_well(g, 3.0, np.exp(0.05))  # edge halfway between nodes 20 and 21
        assert V.values[20] == pytest.approx(3.0)
        assert V.values[21] == pytest.approx(0.0, abs=1e-12)
        V = square_well(g, 3.0, 1.0)  # edge on node 20
        assert V.values[20] == pytest.approx(1.5)
