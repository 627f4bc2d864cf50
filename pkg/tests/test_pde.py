import numpy as np
import pytest

from adaptive_sync import (
    PdeGrid,
    PdeScenario,
    PdeState,
    PolynomialField,
    as_path_network,
    bistable_field,
    discrete_poincare_lambda2,
    discrete_rhs,
    integrate,
    integrate_pde,
    neumann_operator,
    spatial_sync_error,
)
from adaptive_sync.errors import DimensionMismatchError, NonFiniteStateError

ZERO = PolynomialField.from_lists([[]])


def split_scenario(n_cells=16, length=1.0, t_end=2.0, dt=2e-4, **kw):
    grid = PdeGrid(length, n_cells)
    x0 = np.where(np.arange(n_cells) < n_cells // 2, -1.0, 1.0).reshape(-1, 1)
    defaults = dict(field=bistable_field(), B=[[1.0]], C=[[1.0]], grid=grid,
                    gamma=np.ones(grid.n_faces), x0=x0, t_end=t_end, dt=dt,
                    record_every=50)
    defaults.update(kw)
    return PdeScenario(**defaults)


class TestDiscreteRhs:
    def test_constant_profile(self):
        s = split_scenario(x0=np.full((16, 1), 0.5))
        xd, kd = discrete_rhs(s, s.initial_state())
        assert np.allclose(xd, 0.5 - 0.5**3)
        assert np.array_equal(kd, np.zeros(15))

    def test_two_cell_matches_single_link(self):
        grid = PdeGrid(2.0, 2)  # h = 1
        s = PdeScenario(field=ZERO, B=[[1.0]], C=[[1.0]], grid=grid,
                        gamma=np.array([0.5]), x0=[[0.0], [1.0]],
                        t_end=1.0, dt=1e-3, k0=np.array([1.0]))
        xd, kd = discrete_rhs(s, s.initial_state())
        assert np.allclose(xd.ravel(), [1.0, -1.0])
        assert kd[0] == pytest.approx(0.5)

    def test_flux_telescoping(self):
        rng = np.random.Generator(np.random.Philox(12))
        s = split_scenario(field=ZERO, x0=rng.uniform(-1, 1, (16, 1)))
        state = PdeState(0.0, s.x0, rng.uniform(0, 2, 15))
        xd, _ = discrete_rhs(s, state)
        assert abs(xd.sum()) < 1e-12

    def test_nonfinite_rejected(self):
        s = split_scenario()
        state = PdeState(0.0, np.full((16, 1), np.nan), np.zeros(15))
        with pytest.raises(NonFiniteStateError):
            discrete_rhs(s, state)


class TestNeumannOperator:
    def test_two_cell_closed_form(self):
        grid = PdeGrid(1.0, 2)
        A = neumann_operator(grid)
        assert np.allclose(A, 4.0 * np.array([[1.0, -1.0], [-1.0, 1.0]]))

    def test_symmetry_psd_nullspace(self):
        rng = np.random.Generator(np.random.Philox(3))
        grid = PdeGrid(2.0, 12)
        A = neumann_operator(grid, rng.uniform(0, 3, grid.n_faces))
        assert np.abs(A - A.T).max() == 0.0
        ev = np.linalg.eigvalsh(A)
        assert ev[0] >= -1e-10
        assert np.abs(A @ np.ones(grid.n_cells)).max() < 1e-12

    def test_coefficient_shape_checked(self):
        with pytest.raises(DimensionMismatchError):
            neumann_operator(PdeGrid(1.0, 4), np.ones(5))

    def test_nonpositive_gamma_rejected(self):
        with pytest.raises(ValueError):
            split_scenario(gamma=np.zeros(15))


class TestPoincareLambda2:
    def test_two_cell_value(self):
        assert discrete_poincare_lambda2(PdeGrid(1.0, 2)) == pytest.approx(8.0, abs=1e-12)

    def test_converges_to_continuum(self):
        lam = discrete_poincare_lambda2(PdeGrid(1.0, 200))
        assert lam == pytest.approx(np.pi**2, rel=0.01)

    def test_refinement_approaches_continuum(self):
        errs = [
            abs(discrete_poincare_lambda2(PdeGrid(1.0, n)) - np.pi**2)
            for n in (25, 50, 100, 200)
        ]
        assert errs == sorted(errs, reverse=True)

    @pytest.mark.parametrize("n", [2, 7, 33])
    def test_matches_cosine_mode_formula(self, n):
        grid = PdeGrid(1.0, n)
        expected = (4.0 / grid.h**2) * np.sin(np.pi / (2 * n)) ** 2
        assert discrete_poincare_lambda2(grid) == pytest.approx(expected, rel=1e-12)

    def test_length_scaling(self):
        a = discrete_poincare_lambda2(PdeGrid(1.0, 50))
        b = discrete_poincare_lambda2(PdeGrid(2.0, 50))
        assert a / b == pytest.approx(4.0, abs=1e-9)


class TestIntegratePde:
    def test_mass_conserved_with_frozen_coefficients(self):
        s = split_scenario(field=ZERO, adaptation_enabled=False,
                           k0=np.ones(15), t_end=1.0)
        log = integrate_pde(s)
        mass = log.x.sum(axis=(1, 2)) * s.grid.h
        assert np.abs(mass - mass[0]).max() < 1e-9

    def test_mass_conserved_under_adaptation(self):
        s = split_scenario(field=ZERO, t_end=1.0)
        log = integrate_pde(s)
        mass = log.x.sum(axis=(1, 2)) * s.grid.h
        assert np.abs(mass - mass[0]).max() < 1e-9

    def test_split_profile_homogenizes(self):
        s = split_scenario(t_end=3.0)
        log = integrate_pde(s)
        final = spatial_sync_error(log.x[-1], s.C, s.grid.h)
        initial = spatial_sync_error(log.x[0], s.C, s.grid.h)
        assert initial == pytest.approx(1.0)
        assert final < 1e-4

    def test_face_coefficients_monotone(self):
        log = integrate_pde(split_scenario(t_end=1.0))
        assert np.diff(log.k, axis=0).min() >= -1e-12

    def test_adaptation_off_keeps_cells_pinned(self):
        s = split_scenario(adaptation_enabled=False, t_end=1.0)
        log = integrate_pde(s)
        # k stays 0, cells sit at the equilibria +-1
        assert np.abs(log.k).max() == 0.0
        assert np.abs(log.x[-1] - s.x0).max() < 1e-12
        assert spatial_sync_error(log.x[-1], s.C, s.grid.h) > 0.5

    def test_homogeneous_profile_frozen(self):
        s = split_scenario(x0=np.full((16, 1), -0.25), t_end=1.0)
        log = integrate_pde(s)
        assert np.abs(log.k).max() == 0.0
        spread = log.x.max(axis=1) - log.x.min(axis=1)
        assert spread.max() < 1e-12


class TestPathNetworkReduction:
    def test_four_cell_equivalence(self):
        s = split_scenario(n_cells=4, length=1.0, t_end=2.0, dt=1e-3,
                           record_every=10)
        plog = integrate_pde(s)
        net = as_path_network(s)
        nlog = integrate(net)
        assert np.abs(plog.x - nlog.x).max() < 1e-9
        # weights map back through k = K h^2
        h2 = s.grid.h**2
        assert np.abs(plog.k - nlog.k[0] * h2).max() < 1e-9

    def test_reduction_scales_gains_and_weights(self):
        s = split_scenario(n_cells=8, length=2.0, k0=np.full(7, 0.5),
                           gamma=np.full(7, 2.0))
        net = as_path_network(s)
        h = s.grid.h
        assert np.allclose(net.channels[0].initial_weights, 0.5 / h**2)
        assert np.allclose(net.channels[0].gains, 2.0 / h**4)
        assert net.channels[0].graph.n_links == 7
