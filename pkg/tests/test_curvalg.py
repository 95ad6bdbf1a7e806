import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from hypstab import curvalg
from hypstab.curvalg import (CurvatureVector, NewtonOperator, PrincipalSpectrum, ShapeOperator,
                             elem_sym, elem_sym_values, estima_audit, maclaurin_batch,
                             maclaurin_check, newton_operator, newton_operators,
                             orient_p1_psd, trace_identity_batch, trace_identity_report)
from hypstab.errors import InvalidInput

from oracles import brute_elem_sym, brute_elem_sym_abs

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def spectra(nmin=2, nmax=8):
    return st.integers(nmin, nmax).flatmap(lambda n: arrays(float, n, elements=finite))


def sym_matrices(nmin=2, nmax=6):
    def build(n):
        return arrays(float, (n, n), elements=finite).map(lambda a: 0.5 * (a + a.T))
    return st.integers(nmin, nmax).flatmap(build)


class TestTypes:
    def test_spectrum_rejects_short_and_nonfinite(self):
        with pytest.raises(InvalidInput):
            PrincipalSpectrum([1.0])
        with pytest.raises(InvalidInput):
            PrincipalSpectrum([1.0, np.nan])

    def test_shape_operator_symmetrizes_small_noise(self):
        a = np.array([[1.0, 2.0], [2.0 + 1e-12, 3.0]])
        A = ShapeOperator(a)
        assert np.array_equal(A.entries, A.entries.T)

    def test_shape_operator_rejects_asymmetry(self):
        with pytest.raises(InvalidInput):
            ShapeOperator([[1.0, 2.0], [0.0, 1.0]])

    def test_values_are_immutable(self):
        A = ShapeOperator(np.eye(3))
        with pytest.raises(ValueError):
            A.entries[0, 0] = 5.0

    def test_curvature_vector_normalization(self):
        cv = CurvatureVector([1.0, 3.0, 3.0, 1.0])
        assert cv.H == pytest.approx([1.0, 1.0, 1.0, 1.0])


class TestElemSym:
    def test_identity_spectrum(self):
        assert elem_sym([1, 1, 1]).S == pytest.approx([1, 3, 3, 1])

    def test_rank_one(self):
        S = elem_sym([2.5, 0, 0]).S
        assert S == pytest.approx([1, 2.5, 0, 0])

    def test_integer_example(self):
        S = elem_sym([1, 2, 3, 4]).S
        assert S == pytest.approx([1, 10, 35, 50, 24])

    def test_dimension_one_rejected(self):
        with pytest.raises(InvalidInput):
            elem_sym([1.0])

    @given(spectra())
    def test_matches_subset_enumeration(self, lam):
        S = elem_sym_values(lam)
        ref = np.array(brute_elem_sym(lam))
        scale = np.array(brute_elem_sym_abs(lam))
        assert np.all(np.abs(S - ref) <= 1e-12 * np.maximum(scale, 1e-300) + 1e-300)

    def test_batched_agrees_with_rows(self):
        rng = np.random.default_rng(1)
        lam = rng.standard_normal((20, 5))
        S = elem_sym_values(lam)
        for row, s in zip(lam, S):
            assert np.allclose(s, brute_elem_sym(row), rtol=1e-13, atol=1e-13)

    @given(spectra())
    def test_permutation_invariant(self, lam):
        perm = np.random.default_rng(0).permutation(lam.size)
        assert np.allclose(elem_sym_values(lam), elem_sym_values(lam[perm]), rtol=1e-12, atol=1e-9)


class TestNewton:
    def test_p0_identity(self):
        assert np.array_equal(newton_operator(np.diag([1.0, -2.0]), 0).entries, np.eye(2))

    def test_unit_sphere_p1(self):
        assert np.allclose(newton_operator(np.eye(3), 1).entries, 2 * np.eye(3))

    def test_p1_eigenvalues(self):
        P = newton_operator(np.diag([1.0, 2, 3, 4]), 1).entries
        assert np.allclose(np.sort(np.linalg.eigvalsh(P)), [6, 7, 8, 9])

    def test_order_out_of_range(self):
        with pytest.raises(InvalidInput):
            newton_operator(np.eye(3), 4)
        with pytest.raises(InvalidInput):
            newton_operator(np.eye(3), -1)

    @given(sym_matrices())
    def test_pn_is_traceless_and_commutes(self, a):
        ops, cv = newton_operators(a)
        assert isinstance(ops[-1], NewtonOperator)
        scale = 1 + np.max(np.abs(a)) ** a.shape[0]
        assert abs(np.trace(ops[-1].entries)) <= 1e-9 * scale
        for P in ops:
            comm = a @ P.entries - P.entries @ a
            assert np.max(np.abs(comm)) <= 1e-9 * scale

    @given(sym_matrices())
    def test_p1_spectrum_is_shifted(self, a):
        lam = np.linalg.eigvalsh(a)
        P = newton_operator(a, 1).entries
        expect = np.sort(lam.sum() - lam)
        assert np.allclose(np.linalg.eigvalsh(P), expect, atol=1e-10 * (1 + np.abs(lam).max()))


class TestTraceIdentities:
    def test_unit_sphere_r1(self):
        assert max(trace_identity_report(np.eye(3), 1)) == 0.0

    def test_flat(self):
        for r in range(2):
            assert trace_identity_report(np.zeros((3, 3)), r) == (0.0, 0.0, 0.0)

    def test_minimal_example(self):
        A = np.diag([2.0, 2.0, -1.0])
        assert np.trace(A @ A @ newton_operator(A, 1).entries) == pytest.approx(12.0)
        assert max(trace_identity_report(A, 1)) < 1e-14

    def test_order_range(self):
        with pytest.raises(InvalidInput):
            trace_identity_report(np.eye(3), 2)

    @given(sym_matrices(2, 8).map(lambda a: a / (1 + np.linalg.norm(a, 2))))
    def test_random_matrices(self, a):
        # spectral radius below one: the contract tolerance applies directly
        for r in range(a.shape[0] - 1):
            assert max(trace_identity_report(a, r)) <= curvalg.IDENTITY_RTOL

    @given(sym_matrices(2, 8))
    def test_backward_stable_at_any_scale(self, a):
        # round-off of a degree-(r + 2) identity grows like eps * rho^(r + 2)
        n = a.shape[0]
        rho = max(1.0, np.linalg.norm(a, 2))
        for r in range(n - 1):
            bound = 100 * n * np.finfo(float).eps * rho ** (r + 2)
            assert max(trace_identity_report(a, r)) <= bound

    def test_batch_matches_single(self):
        rng = np.random.default_rng(3)
        As = rng.standard_normal((10, 4, 4))
        As = As + As.transpose(0, 2, 1)
        batch = trace_identity_batch(As)
        for A, row in zip(As, batch):
            for r in range(3):
                assert np.allclose(row[r], trace_identity_report(A, r), atol=1e-15)


class TestMaclaurin:
    def test_umbilic_equality(self):
        rep = maclaurin_check([1.0, 1.0, 1.0])
        assert rep.hypotheses_met and rep.all_hold
        assert rep.slack["h1h2_ge_h3"] == pytest.approx(0.0, abs=1e-14)
        assert rep.slack["est12"] == pytest.approx(0.0, abs=1e-14)

    def test_rank_one(self):
        rep = maclaurin_check([2.0, 0.0, 0.0])
        assert rep.hypotheses_met and rep.holds["est12"]

    def test_hypotheses_unmet_reports_only_newton(self):
        rep = maclaurin_check([1.0, -3.0, 1.0])
        assert not rep.hypotheses_met
        assert set(rep.holds) == {"newton"}
        assert "est11" in rep.slack

    @given(spectra(3, 8))
    def test_holds_under_hypotheses(self, lam):
        rep = maclaurin_check(lam)
        assert rep.holds["newton"]
        if rep.hypotheses_met:
            assert rep.all_hold

    def test_batch_counts(self):
        rng = np.random.default_rng(5)
        lam = rng.standard_normal((2000, 4))
        hyp, viol = maclaurin_batch(lam)
        assert 0 < hyp < 2000
        assert sum(viol.values()) == 0


class TestEstima:
    def test_sphere(self):
        au = estima_audit([1.0, 1.0, 1.0])
        assert au.precondition_met and au.strong_holds and au.max_eig_p1 == 2.0

    def test_counterexample(self):
        au = estima_audit([2.0, 2.0, -1.0])
        assert au.precondition_met
        assert not au.strong_holds
        assert au.weak_holds
        assert (au.max_eig_p1, au.s1) == (4.0, 3.0)

    def test_rank_one_equality(self):
        au = estima_audit([3.0, 0.0, 0.0])
        assert au.strong_holds and au.max_eig_p1 == au.s1

    def test_not_psd_is_reported(self):
        au = estima_audit([1.0, -3.0, 1.0])
        assert not au.precondition_met

    @given(spectra(2, 8))
    def test_weak_form_on_psd(self, lam):
        au = estima_audit(lam)
        if au.precondition_met:
            assert au.weak_holds


class TestOrientation:
    def test_flip(self):
        sign, A = orient_p1_psd(-np.eye(3))
        assert sign == -1 and np.allclose(A.entries, np.eye(3))

    def test_keep(self):
        sign, _ = orient_p1_psd(np.diag([2.0, 2.0, -1.0]))
        assert sign == 1

    def test_impossible(self):
        assert orient_p1_psd(np.diag([5.0, -5.0, 0.0])) is None
