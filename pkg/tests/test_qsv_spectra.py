"""Tests for the closed-form spectral summary against dense diagonalization.

Frozen anchors were evaluated independently (16 digits) before the
implementation; numeric cross-checks diagonalize the assembled sector
blocks directly.
"""

import numpy as np
import pytest

from aqsense.qcore import make_dicke, make_ghz, make_target
from aqsense.symcomb import binom, johnson_eigenvalue, johnson_multiplicity
from aqsense.qsv import (
    analytic_spectrum,
    assemble_strategy_decomposed,
    lambda_map,
    omega3_profile,
    pauli_witness_bound,
    q_min,
)


class TestFrozenValues:
    def test_branch_a_point(self):
        s = analytic_spectrum(3, 0.33, 0.0)
        assert s.branch == "a"
        assert s.beta == pytest.approx(0.8312342569269522, abs=1e-15)
        assert s.nu == pytest.approx(0.1687657430730478, abs=1e-15)
        assert s.lambda_plus == pytest.approx(1.0, abs=1e-12)
        assert s.lambda_minus == pytest.approx(0.7481108312342570, abs=1e-13)
        assert s.lambda_a == pytest.approx(0.8312342569269522, abs=1e-15)
        assert s.lambda_bc1 == pytest.approx(0.7168765743073047, abs=1e-13)
        assert s.lambda1_omega2 == pytest.approx(0.4779177162048699, abs=1e-13)
        assert s.lambda1_omega3 == pytest.approx(0.3052057094878254, abs=1e-13)

    def test_alpha_plus_closed_form(self):
        s = analytic_spectrum(3, 0.33, 0.0)
        lam0, lam1 = lambda_map(3, 0.33)
        assert s.alpha_plus == pytest.approx(np.sqrt(lam0 / lam1), rel=1e-12)
        assert s.alpha_minus == pytest.approx(-np.sqrt(binom(6, 3) * 0.67 / (2 * 0.33)), rel=1e-12)

    def test_branch_bc1_point(self):
        s = analytic_spectrum(3, 0.10, 0.0)
        assert s.branch == "bc1"
        assert s.beta == pytest.approx(0.7473684210526316, abs=1e-15)

    def test_boundary_branch(self):
        s = analytic_spectrum(3, 4 / 19, 0.0)
        assert s.branch == "boundary"
        assert s.lambda_a == pytest.approx(s.lambda_bc1, abs=1e-12)

    def test_p_one_rejected(self):
        with pytest.raises(ValueError):
            analytic_spectrum(3, 0.33, 1.0)


class TestNumericAgreement:
    @pytest.mark.parametrize("n,q0,p", [(3, 0.33, 0.0), (3, 0.10, 0.0), (4, 0.33, 0.3), (4, 0.6, 0.0)])
    def test_residuals_small(self, n, q0, p):
        s = analytic_spectrum(n, q0, p, check_numeric=True)
        assert s.residuals is not None
        for name, value in s.residuals.items():
            assert value < 1e-10, f"residual {name} = {value}"

    def test_omega1_full_spectrum_with_multiplicities(self):
        n, q0, p = 3, 0.33, 0.0
        s = analytic_spectrum(n, q0, p)
        o1, _, _ = assemble_strategy_decomposed(n, q0, p)
        numeric = np.sort(np.linalg.eigvalsh(o1.component_matrix((0, n, 2 * n))))
        expected = [s.lambda_plus, s.lambda_minus, s.lambda_a]
        for l in range(1, n + 1):
            val = s.b + s.c * johnson_eigenvalue(2 * n, n, l)
            expected += [val] * johnson_multiplicity(2 * n, l)
        np.testing.assert_allclose(numeric, np.sort(expected), atol=1e-10)

    def test_theorem1_eigenvectors(self):
        n, q0, p = 3, 0.33, 0.0
        s = analytic_spectrum(n, q0, p)
        o1, _, _ = assemble_strategy_decomposed(n, q0, p)
        m, c_big = 2 * n, binom(2 * n, n)
        ghz = make_ghz(m).amps
        dicke = make_dicke(m, n).amps
        for alpha, lam in [(s.alpha_plus, s.lambda_plus), (s.alpha_minus, s.lambda_minus)]:
            v = alpha * ghz + np.sqrt(c_big / 2) * dicke
            np.testing.assert_allclose(o1.apply(v), lam * v, atol=1e-9 * np.linalg.norm(v))

    def test_theorem2_eigenvector_expectation_exact(self):
        n, q0, p = 4, 0.33, 0.1
        s = analytic_spectrum(n, q0, p)
        _, o2, _ = assemble_strategy_decomposed(n, q0, p)
        v = (make_dicke(2 * n, n - 1).amps + make_dicke(2 * n, n + 1).amps) / np.sqrt(2)
        assert o2.expectation_vector(v) == pytest.approx(s.lambda1_omega2, abs=1e-13)

    def test_target_is_top_eigenvector(self):
        for n, q0, p in [(3, 0.33, 0.0), (4, 0.5, 0.2)]:
            o1, _, _ = assemble_strategy_decomposed(n, q0, p)
            st = make_target(n, q0)
            np.testing.assert_allclose(o1.apply(st.amps), st.amps, atol=1e-12)


class TestOrderings:
    def test_appendix_orderings_grid(self):
        for n in (3, 4, 5):
            for p in (0.0, 0.3):
                for q0 in (q_min(n), 0.2, 0.33, 0.6, 0.9):
                    s = analytic_spectrum(n, q0, p)
                    assert s.lambda1_omega2 < s.lambda_bc1
                    assert s.lambda1_omega2 <= s.lambda_a + 1e-15
                    assert s.lambda1_omega3 < s.lambda_bc1
                    assert s.lambda1_omega3 < s.lambda_a
                    assert s.beta == max(s.lambda_a, s.lambda_bc1)
                    assert s.beta < 1
                    assert s.nu == pytest.approx(1 - s.beta, abs=1e-15)

    def test_gap_maximized_at_p_zero(self):
        for q0 in (0.2, 0.6):
            nu0 = analytic_spectrum(3, q0, 0.0).nu
            for p in np.arange(0.1, 1.0, 0.1):
                assert analytic_spectrum(3, q0, float(p)).nu <= nu0 + 1e-15

    def test_inverse_gap_band_branch_bc1(self):
        # on the bc1 branch the inverse gap stays below 2n - 1
        s = analytic_spectrum(3, 0.10, 0.0)
        assert 1.0 / s.nu < 2 * 3 - 1


class TestOmega3Profile:
    def test_single_entry_for_n3(self):
        prof = omega3_profile(3, 0.33, 0.0)
        assert len(prof) == 1
        assert prof[0] == pytest.approx(0.3052057094878254, abs=1e-13)

    def test_strictly_decreasing(self):
        for n in range(4, 9):
            for q0 in (q_min(n), 0.33, 0.7, 0.95):
                prof = omega3_profile(n, q0, 0.0)
                assert len(prof) == n - 2
                assert all(b < a for a, b in zip(prof, prof[1:]))

    def test_head_matches_summary(self):
        for n in (4, 5):
            s = analytic_spectrum(n, 0.4, 0.2)
            prof = omega3_profile(n, 0.4, 0.2)
            assert prof[0] == pytest.approx(s.lambda1_omega3, abs=1e-15)


class TestWitnessBound:
    def test_frozen_value(self):
        assert pauli_witness_bound(3, 0.33) == pytest.approx(0.2973886346180701, abs=1e-15)

    def test_small_at_edges(self):
        assert pauli_witness_bound(3, 1e-12) < 1e-5
        assert pauli_witness_bound(3, 1 - 1e-12) < 1e-5

    def test_self_check_passes_on_grid(self):
        for n in (3, 4):
            for q0 in (0.1, 0.33, 0.5, 0.9):
                assert pauli_witness_bound(n, q0) > 0

    def test_expectation_dominates_bound(self):
        # independent recomputation of the witness expectation for n=3
        q0 = 0.33
        st = make_target(3, q0).amps
        flip = (2 ** 3 - 1) << 3
        idx = np.arange(64)
        expectation = float(np.real(np.sum(st.conj() * st[idx ^ flip])))
        assert expectation >= pauli_witness_bound(3, q0) - 1e-12
