import numpy as np
import pytest

from adaptive_sync import (
    NetworkState,
    PolynomialField,
    Scenario,
    barbell_graph,
    bistable_field,
    build_graph,
    integrate,
    make_channel,
    rhs,
    weight_integral_check,
)
from adaptive_sync.errors import (
    DimensionMismatchError,
    DivergedError,
    NonFiniteStateError,
)

ZERO = PolynomialField.from_lists([[]])


def two_node_scenario(**kw):
    g = build_graph(2, [(1, 2)])
    ch = make_channel(g, [[1.0]], [[1.0]],
                      gains=kw.pop("gain", 1.0),
                      initial_weights=kw.pop("k0", 1.0))
    defaults = dict(field=bistable_field(), channels=(ch,), x0=[[2.0], [-1.0]],
                    t_end=1.0, dt=1e-3)
    defaults.update(kw)
    return Scenario(**defaults)


def barbell_scenario(seed=0, **kw):
    rng = np.random.Generator(np.random.Philox(seed))
    ch = make_channel(barbell_graph(), [[1.0]], [[1.0]])
    defaults = dict(field=bistable_field(), channels=(ch,),
                    x0=rng.uniform(-2, 2, size=(8, 1)),
                    t_end=5.0, dt=1e-3, record_every=10)
    defaults.update(kw)
    return Scenario(**defaults)


class TestRhs:
    def test_hand_computed_derivatives(self):
        sc = two_node_scenario()
        xd, kd = rhs(sc, sc.initial_state())
        assert np.allclose(xd.ravel(), [-9.0, 3.0])
        assert kd[0][0] == pytest.approx(9.0)

    def test_identical_states_freeze_coupling(self):
        sc = barbell_scenario(x0=np.full((8, 1), 0.7))
        xd, kd = rhs(sc, sc.initial_state())
        f = 0.7 - 0.7**3
        assert np.allclose(xd, f)
        assert np.array_equal(kd[0], np.zeros(13))

    def test_zero_gain_freezes_weights(self):
        sc = two_node_scenario(gain=0.0)
        _, kd = rhs(sc, sc.initial_state())
        assert np.array_equal(kd[0], [0.0])

    def test_adaptation_flag_freezes_weights(self):
        sc = two_node_scenario(adaptation_enabled=False)
        _, kd = rhs(sc, sc.initial_state())
        assert np.array_equal(kd[0], [0.0])

    def test_coupling_sums_to_zero_over_nodes(self):
        rng = np.random.Generator(np.random.Philox(11))
        sc = barbell_scenario(x0=rng.uniform(-2, 2, (8, 1)))
        state = NetworkState(0.0, sc.x0, (rng.uniform(0, 3, 13),))
        xd, _ = rhs(sc, state)
        coupling = xd - sc.vf.eval(sc.x0)
        assert abs(coupling.sum()) < 1e-12

    def test_frozen_state_constant_output_rate(self):
        # outputs differ by c=3, so each weight grows at gamma * c^2
        sc = two_node_scenario(gain=0.25)
        _, kd = rhs(sc, sc.initial_state())
        assert kd[0][0] == pytest.approx(0.25 * 9.0)

    def test_nonfinite_state_rejected(self):
        sc = two_node_scenario()
        state = NetworkState(0.0, np.array([[np.nan], [0.0]]), (np.array([1.0]),))
        with pytest.raises(NonFiniteStateError):
            rhs(sc, state)


class TestIntegrate:
    def test_linear_consensus_closed_form(self):
        g = build_graph(2, [(1, 2)])
        ch = make_channel(g, [[1.0]], [[1.0]], gains=0.0, initial_weights=1.0)
        sc = Scenario(field=ZERO, channels=(ch,), x0=[[1.0], [0.0]],
                      t_end=10.0, dt=1e-3, record_every=10,
                      adaptation_enabled=False)
        log = integrate(sc)
        # difference decays as exp(-2kt), sum is conserved
        assert np.abs(log.x[:, 0, 0] - (0.5 + 0.5 * np.exp(-2 * log.t))).max() < 1e-10
        assert np.abs(log.x.sum(axis=1) - 1.0).max() < 1e-10
        assert abs(log.x[-1, 0, 0] - 0.5) < 1e-8

    def test_weight_monotonicity(self):
        log = integrate(barbell_scenario())
        dk = np.diff(log.k[0], axis=0)
        assert dk.min() >= -1e-12

    def test_sum_conserved_without_reaction(self):
        sc = barbell_scenario(field=ZERO, t_end=20.0)
        log = integrate(sc)
        total = log.x.sum(axis=(1, 2))
        assert np.abs(total - total[0]).max() < 1e-9

    def test_identical_initial_condition_freeze(self):
        sc = barbell_scenario(x0=np.full((8, 1), 0.3), t_end=2.0)
        log = integrate(sc)
        assert np.abs(log.k[0] - log.k[0][0]).max() == 0.0
        spread = log.x.max(axis=1) - log.x.min(axis=1)
        assert spread.max() < 1e-12

    def test_halving_dt_converged(self):
        a = integrate(barbell_scenario(t_end=5.0, dt=1e-3))
        b = integrate(barbell_scenario(t_end=5.0, dt=5e-4, record_every=20))
        assert np.abs(a.x[-1] - b.x[-1]).max() < 1e-6

    def test_record_every_includes_final_step(self):
        sc = two_node_scenario(t_end=0.025, record_every=10)
        log = integrate(sc)
        assert log.t[0] == 0.0
        assert log.t[-1] == pytest.approx(0.025)
        assert len(log.t) == 4  # steps 0, 10, 20, 25

    def test_divergence_guard(self):
        # f = x^2 from x0=5 blows up in finite time
        quad = PolynomialField.from_lists([[(1.0, [2])]])
        g = build_graph(2, [(1, 2)])
        ch = make_channel(g, [[1.0]], [[1.0]], gains=0.0, initial_weights=0.0)
        sc = Scenario(field=quad, channels=(ch,), x0=[[5.0], [5.0]],
                      t_end=10.0, dt=1e-3, adaptation_enabled=False)
        with pytest.raises(DivergedError):
            integrate(sc)

    def test_nonfinite_initial_state(self):
        with pytest.raises(NonFiniteStateError):
            integrate(two_node_scenario(x0=[[np.inf], [0.0]]))

    def test_t_end_must_align_with_dt(self):
        with pytest.raises(ValueError):
            integrate(two_node_scenario(t_end=0.0105, dt=1e-2))


class TestMultiChannel:
    def _channels(self):
        ring = build_graph(4, [(1, 2), (2, 3), (3, 4), (1, 4)])
        star = build_graph(4, [(1, 2), (1, 3), (1, 4)])
        ch1 = make_channel(ring, [[1.0], [0.0]], [[1.0, 0.0]])
        ch2 = make_channel(star, [[0.0], [1.0]], [[0.0, 1.0]])
        return ch1, ch2

    def _field2d(self):
        return PolynomialField.from_lists(
            [
                [(1.0, [1, 0]), (-1.0, [3, 0])],
                [(1.0, [0, 1]), (-1.0, [0, 3])],
            ]
        )

    def test_rhs_matches_loop_reference(self):
        ch1, ch2 = self._channels()
        rng = np.random.Generator(np.random.Philox(2))
        x0 = rng.uniform(-2, 2, (4, 2))
        sc = Scenario(field=self._field2d(), channels=(ch1, ch2), x0=x0, t_end=1.0, dt=1e-3)
        k = (rng.uniform(0, 2, 4), rng.uniform(0, 2, 3))
        xd, kd = rhs(sc, NetworkState(0.0, x0, k))

        # direct double-loop reference for the coupling sums
        expect = sc.vf.eval(x0).astype(float)
        for q, ch in enumerate(sc.channels):
            Y = x0 @ ch.C.T
            for idx, (i, j) in enumerate(ch.graph.links):
                kij = k[q][idx]
                expect[i] += (ch.B @ (kij * (Y[j] - Y[i]))).ravel()
                expect[j] += (ch.B @ (kij * (Y[i] - Y[j]))).ravel()
        assert np.abs(xd - expect).max() < 1e-12
        for q, ch in enumerate(sc.channels):
            Y = x0 @ ch.C.T
            for idx, (i, j) in enumerate(ch.graph.links):
                d = Y[i] - Y[j]
                assert kd[q][idx] == pytest.approx(ch.gains[idx] * float(d @ d), rel=1e-12)

    def test_single_channel_configuration_reproducible(self):
        # m=1 goes through the same packed code path; identical runs must
        # produce identical arrays
        a = integrate(barbell_scenario(t_end=2.0))
        b = integrate(barbell_scenario(t_end=2.0))
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.k[0], b.k[0])

    def test_two_channel_integration_syncs_both_outputs(self):
        ch1, ch2 = self._channels()
        rng = np.random.Generator(np.random.Philox(8))
        sc = Scenario(field=self._field2d(), channels=(ch1, ch2),
                      x0=rng.uniform(-2, 2, (4, 2)), t_end=15.0, dt=1e-3,
                      record_every=10)
        log = integrate(sc)
        from adaptive_sync import sync_error

        errs = sync_error(log.x[-1], sc.channels)
        assert errs.shape == (2,)
        assert errs.max() < 1e-6


class TestWeightIntegral:
    def test_zero_gain_zero_residual(self):
        g = build_graph(2, [(1, 2)])
        ch = make_channel(g, [[1.0]], [[1.0]], gains=0.0, initial_weights=1.0)
        sc = Scenario(field=ZERO, channels=(ch,), x0=[[1.0], [0.0]],
                      t_end=2.0, dt=1e-3, record_every=10)
        log = integrate(sc)
        assert weight_integral_check(log, 0, (1, 2)) == 0.0

    def test_bridge_link_self_consistency(self):
        log = integrate(barbell_scenario(t_end=20.0))
        assert weight_integral_check(log, 0, (4, 5)) < 0.02

    def test_unknown_link(self):
        log = integrate(barbell_scenario(t_end=1.0))
        with pytest.raises(KeyError):
            weight_integral_check(log, 0, (1, 8))


class TestValidation:
    def test_mismatched_x0(self):
        with pytest.raises(DimensionMismatchError):
            two_node_scenario(x0=[[1.0], [2.0], [3.0]])

    def test_graph_node_count_consistency(self):
        g2 = build_graph(2, [(1, 2)])
        g3 = build_graph(3, [(1, 2), (2, 3)])
        ch1 = make_channel(g2, [[1.0]], [[1.0]])
        ch2 = make_channel(g3, [[1.0]], [[1.0]])
        with pytest.raises(DimensionMismatchError):
            Scenario(field=bistable_field(), channels=(ch1, ch2),
                     x0=[[0.0], [0.0]], t_end=1.0, dt=1e-3)

    def test_negative_gain_rejected(self):
        g = build_graph(2, [(1, 2)])
        with pytest.raises(ValueError):
            make_channel(g, [[1.0]], [[1.0]], gains=-1.0)

    def test_negative_initial_weight_warns(self):
        g = build_graph(2, [(1, 2)])
        with pytest.warns(UserWarning):
            make_channel(g, [[1.0]], [[1.0]], initial_weights=-0.5)
