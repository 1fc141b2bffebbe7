"""Tests for the sensing protocol: POVM, probabilities, estimators, bounds.

Independent oracles:
  * dense-operator expectation values vs the fast inner-product path,
  * a finite-difference Fisher-information matrix of the 4-outcome
    multinomial, inverted, as the oracle for the sensitivity bounds,
  * frozen hand-evaluated probability values.
"""

import numpy as np
import pytest

from aqsense.qcore import PureState, RngStream, make_ghz
from aqsense.sensing import (
    GhzCollapseError,
    Povm,
    SensingScenario,
    analytic_probs,
    anonymity_audit,
    build_povm,
    estimate_angles,
    g_minus,
    g_plus,
    sample_run,
    sensitivity_bounds,
    simulate_probs,
)


def fisher_inverse(n, q0, theta_plus, theta_minus, h=1e-6):
    """Finite-difference Fisher information of the outcome distribution with
    respect to (theta_plus, theta_minus), inverted. Oracle for the bounds.
    """

    def probs(tp, tm):
        d = analytic_probs(n, q0, tp, tm)
        return np.array([d.p1, d.p2, d.p3, d.p4])

    p0 = probs(theta_plus, theta_minus)
    dp_dtp = (probs(theta_plus + h, theta_minus) - probs(theta_plus - h, theta_minus)) / (2 * h)
    dp_dtm = (probs(theta_plus, theta_minus + h) - probs(theta_plus, theta_minus - h)) / (2 * h)
    grads = np.stack([dp_dtp, dp_dtm])
    info = np.zeros((2, 2))
    for j in range(2):
        for k in range(2):
            info[j, k] = np.sum(grads[j] * grads[k] / p0)
    return np.linalg.inv(info)


class TestPovm:
    def test_completeness(self):
        povm = build_povm(3)
        total = sum(povm.operators)
        np.testing.assert_allclose(total, np.eye(64), atol=1e-12)

    def test_e2_orthogonal_to_ghz(self):
        povm = build_povm(3)
        assert make_ghz(6).expectation(povm.operators[1]) == pytest.approx(0.0, abs=1e-14)

    def test_e4_positive(self):
        povm = build_povm(3)
        assert np.linalg.eigvalsh(povm.operators[3]).min() >= -1e-12

    def test_first_three_rank_one(self):
        povm = build_povm(3)
        for op in povm.operators[:3]:
            assert np.trace(op).real == pytest.approx(1.0, abs=1e-12)
            np.testing.assert_allclose(op @ op, op, atol=1e-12)

    def test_fast_probabilities_match_operators(self):
        povm = build_povm(3)
        rng = np.random.default_rng(4)
        amps = rng.normal(size=64) + 1j * rng.normal(size=64)
        st = PureState(6, amps / np.linalg.norm(amps))
        fast = povm.probabilities(st)
        dense = np.array([st.expectation(op) for op in povm.operators])
        np.testing.assert_allclose(fast, dense, atol=1e-13)

    def test_n_too_small(self):
        with pytest.raises(ValueError):
            build_povm(2)


class TestAnalyticProbs:
    def test_zero_angles(self):
        d = analytic_probs(3, 0.33, 0.0, 0.0)
        np.testing.assert_allclose([d.p1, d.p2, d.p3, d.p4], [0.33, 0, 0.67, 0], atol=1e-15)

    def test_frozen_pi_zero(self):
        d = analytic_probs(3, 0.33, np.pi, 0.0)
        assert d.p1 == pytest.approx(0.0, abs=1e-15)
        assert d.p2 == pytest.approx(0.33, abs=1e-15)
        assert d.p3 == pytest.approx(0.2412, abs=1e-15)
        assert d.p4 == pytest.approx(0.4288, abs=1e-15)

    def test_ghz_only_initial_state(self):
        # at q0 = 1 the Dicke component vanishes and the second angle is gone
        for tp, tm in [(0.3, -0.2), (np.pi / 2, -np.pi / 6), (2.0, -1.0)]:
            d = analytic_probs(3, 1.0, tp, tm)
            assert d.p3 == 0.0
            assert d.p4 == 0.0

    def test_normalization_grid(self):
        tps = np.linspace(1e-3, np.pi, 50)
        tms = np.linspace(-np.pi / 2, -1e-3, 50)
        for n in range(3, 7):
            for tp in tps:
                for tm in tms:
                    d = analytic_probs(n, 0.4, tp, tm)
                    assert abs(d.p1 + d.p2 + d.p3 + d.p4 - 1) < 1e-12

    def test_q0_domain(self):
        with pytest.raises(ValueError):
            analytic_probs(3, 0.0, 0.1, -0.1)
        with pytest.raises(ValueError):
            analytic_probs(3, 1.1, 0.1, -0.1)


class TestScenario:
    def test_derived_angles(self):
        sc = SensingScenario(n=3, q0=0.33, t1=1, t2=4, omega1=np.pi / 6, omega2=np.pi / 3, t=1.0)
        assert sc.theta_plus == pytest.approx(np.pi / 2)
        assert sc.theta_minus == pytest.approx(-np.pi / 6)

    def test_from_angles_round_trip(self):
        sc = SensingScenario.from_angles(3, 0.33, np.pi / 2, -np.pi / 6)
        assert sc.theta_plus == pytest.approx(np.pi / 2, abs=1e-15)
        assert sc.theta_minus == pytest.approx(-np.pi / 6, abs=1e-15)

    def test_invariants(self):
        with pytest.raises(ValueError):
            SensingScenario(n=2, q0=0.33, t1=1, t2=2, omega1=0.1, omega2=0.2, t=1.0)
        with pytest.raises(ValueError):  # frequencies out of order
            SensingScenario(n=3, q0=0.33, t1=1, t2=2, omega1=0.3, omega2=0.2, t=1.0)
        with pytest.raises(ValueError):  # exceeds pi/(2t)
            SensingScenario(n=3, q0=0.33, t1=1, t2=2, omega1=0.3, omega2=2.0, t=1.0)
        with pytest.raises(ValueError):  # same position
            SensingScenario(n=3, q0=0.33, t1=2, t2=2, omega1=0.1, omega2=0.2, t=1.0)


class TestSimulateProbs:
    def test_matches_analytic_random(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            n = int(rng.choice([3, 4]))
            q0 = rng.uniform(0.05, 0.95)
            t = rng.uniform(0.5, 2.0)
            omega2 = rng.uniform(0.2, 1.0) * np.pi / (2 * t)
            omega1 = rng.uniform(0.05, 0.95) * omega2
            t1, t2 = rng.choice(2 * n, size=2, replace=False) + 1
            sc = SensingScenario(n=n, q0=q0, t1=int(t1), t2=int(t2), omega1=omega1, omega2=omega2, t=t)
            sim = simulate_probs(sc)
            ana = analytic_probs(n, q0, sc.theta_plus, sc.theta_minus)
            np.testing.assert_allclose(
                [sim.p1, sim.p2, sim.p3, sim.p4], [ana.p1, ana.p2, ana.p3, ana.p4], atol=1e-12
            )

    def test_zero_time(self):
        sc = SensingScenario(n=3, q0=0.33, t1=1, t2=2, omega1=0.1, omega2=0.2, t=0.0)
        d = simulate_probs(sc)
        np.testing.assert_allclose([d.p1, d.p2, d.p3, d.p4], [0.33, 0, 0.67, 0], atol=1e-12)

    def test_position_swap_invariance(self):
        base = None
        for t1, t2 in [(1, 2), (3, 6), (5, 1), (2, 4)]:
            sc = SensingScenario(n=3, q0=0.4, t1=t1, t2=t2, omega1=0.3, omega2=0.7, t=1.0)
            d = simulate_probs(sc)
            arr = np.array([d.p1, d.p2, d.p3, d.p4])
            if base is None:
                base = arr
            else:
                np.testing.assert_allclose(arr, base, atol=1e-12)


class TestSampleRun:
    def test_single_shot(self):
        sc = SensingScenario.from_angles(3, 0.33, np.pi / 2, -np.pi / 6)
        counts = sample_run(sc, 1, RngStream(3).gen)
        assert counts.sum() == 1 and (counts != 0).sum() == 1

    def test_reproducible(self):
        sc = SensingScenario.from_angles(3, 0.33, np.pi / 2, -np.pi / 6)
        a = sample_run(sc, 1000, RngStream(7).gen)
        b = sample_run(sc, 1000, RngStream(7).gen)
        np.testing.assert_array_equal(a, b)

    def test_frequencies_within_four_sigma(self):
        sc = SensingScenario.from_angles(3, 0.33, np.pi / 2, -np.pi / 6)
        shots = 100_000
        counts = sample_run(sc, shots, RngStream(11).gen)
        d = analytic_probs(3, 0.33, np.pi / 2, -np.pi / 6)
        for c, p in zip(counts, [d.p1, d.p2, d.p3, d.p4]):
            sigma = np.sqrt(p * (1 - p) / shots)
            assert abs(c / shots - p) < 4 * sigma


class TestEstimateAngles:
    def test_round_trip(self):
        d = analytic_probs(3, 0.33, np.pi / 2, -np.pi / 6)
        tp, tm = estimate_angles(d.p1, d.p2, d.p3, 3, 0.33)
        assert tp == pytest.approx(np.pi / 2, abs=1e-9)
        assert tm == pytest.approx(np.pi / 6, abs=1e-9)

    def test_trivial_point(self):
        tp, tm = estimate_angles(0.33, 0.0, 0.67, 3, 0.33)
        assert tp == pytest.approx(0.0, abs=1e-12)
        assert tm == pytest.approx(0.0, abs=1e-12)

    def test_clamping_no_domain_error(self):
        # deliberately inconsistent finite-sample frequencies
        tp, tm = estimate_angles(0.5, 0.0, 0.5, 3, 0.33)
        assert np.isfinite(tp) and np.isfinite(tm)
        assert 0 <= tp <= np.pi and 0 <= tm <= np.pi

    def test_ghz_collapse(self):
        with pytest.raises(GhzCollapseError):
            estimate_angles(0.6, 0.4, 0.0, 3, 1.0)
        with pytest.raises(GhzCollapseError):
            estimate_angles(0.3, 0.3, -0.01, 3, 0.33)


class TestSensitivityBounds:
    def test_g_plus_frozen(self):
        sb = sensitivity_bounds(3, 0.33, np.pi / 4, -np.pi / 6)
        assert sb.g_plus == pytest.approx(3.0303030303030303, abs=1e-12)

    def test_g_minus_frozen(self):
        sb = sensitivity_bounds(3, 0.33, np.pi / 4, -np.pi / 6)
        assert sb.g_minus == pytest.approx(9.0836925619087303, rel=1e-12)

    def test_matches_fisher_inverse(self):
        for (tp, tm) in [(np.pi / 4, -np.pi / 6), (np.pi / 2, -np.pi / 3), (2.1, -0.8)]:
            for n, q0 in [(3, 0.33), (4, 0.6), (5, 0.2)]:
                inv = fisher_inverse(n, q0, tp, tm)
                sb = sensitivity_bounds(n, q0, tp, tm)
                assert inv[0, 0] == pytest.approx(sb.g_plus, rel=1e-6)
                assert inv[1, 1] == pytest.approx(sb.g_minus, rel=1e-6)

    def test_blow_up_toward_zero(self):
        vals = [sensitivity_bounds(3, 0.33, np.pi / 2, -(10.0 ** -k)).g_minus for k in range(1, 6)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_theta_minus_zero_rejected(self):
        with pytest.raises(ValueError):
            sensitivity_bounds(3, 0.33, np.pi / 2, 0.0)

    def test_vectorized_helpers(self):
        q0s = np.linspace(0.1, 0.9, 7)
        gp = g_plus(q0s)
        gm = g_minus(3, q0s, np.pi / 2, -np.pi / 6)
        for i, q0 in enumerate(q0s):
            sb = sensitivity_bounds(3, float(q0), np.pi / 2, -np.pi / 6)
            assert gp[i] == pytest.approx(sb.g_plus, rel=1e-14)
            assert gm[i] == pytest.approx(sb.g_minus, rel=1e-14)


class TestAnonymityAudit:
    def test_passes_for_protocol_povm(self):
        report = anonymity_audit(3, 0.33, 0.3, 0.7, 1.0)
        assert report.passed
        assert report.num_pairs == 30
        assert report.max_distance < 1e-12

    def test_diagonal_projector_control_stays_green(self):
        # replacing the first element by |0^6><0^6| does NOT break the audit:
        # a single diagonal basis state only acquires a global phase, so its
        # probability never depends on where the fields sit
        povm = build_povm(3)
        e0 = np.zeros(64, dtype=complex)
        e0[0] = 1.0
        diagonal = Povm(3, kets=(e0, povm.kets[1], povm.kets[2]))
        report = anonymity_audit(3, 0.33, 0.3, 0.7, 1.0, povm=diagonal)
        assert report.passed

    def test_negative_control_fails(self):
        # a projector interfering two complementary weight-3 strings is
        # sensitive to which qubits carry the fields, so the audit must fail
        povm = build_povm(3)
        v = np.zeros(64, dtype=complex)
        v[0b000111] = v[0b111000] = 1 / np.sqrt(2)
        broken = Povm(3, kets=(v, povm.kets[1], povm.kets[2]))
        report = anonymity_audit(3, 0.33, 0.3, 0.7, 1.0, povm=broken)
        assert not report.passed
        assert report.max_distance > 1e-3
