from functools import reduce

import numpy as np
import pytest
from scipy.linalg import sqrtm

from torsionlab.core import bloch_from_angles, coherent_amplitudes, make_rng
from torsionlab.manybody import (SIGMA_YY, DickeState, SymmetricThreeQubit, concurrence, dicke_coherent,
                                 dicke_to_statevector, evolve_ku, fit_error_bound, jplus_closed,
                                 mean_field_error, monogamy_arrays, monogamy_check, pair_tangles,
                                 random_dicke, random_symmetric_three, reduced_density, spin_moments,
                                 tangle_bound_check, var_jphi, var_jphi_exact, var_jphi_finite)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def collective(op, n):
    """sum_i op_i / 2 on n qubits."""
    out = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(n):
        mats = [np.eye(2)] * n
        mats[i] = op
        out += reduce(np.kron, mats)
    return out / 2


class TestDicke:
    def test_single_atom(self):
        th, ph = 1.1, 0.4
        s = dicke_coherent(1, th, ph)
        assert np.allclose(s.c, coherent_amplitudes(th, ph).vector, atol=1e-15)

    def test_two_atoms(self):
        assert np.allclose(dicke_coherent(2, np.pi / 2, 0).c, [0.5, 2**-0.5, 0.5], atol=1e-15)

    def test_overlap_is_power(self, rng):
        for n in (1, 5, 17, 50):
            th1, th2 = rng.random(2) * np.pi
            ph1, ph2 = rng.random(2) * 2 * np.pi
            a, b = dicke_coherent(n, th1, ph1), dicke_coherent(n, th2, ph2)
            single = np.vdot(coherent_amplitudes(th1, ph1).vector, coherent_amplitudes(th2, ph2).vector)
            assert a.overlap(b) == pytest.approx(single**n, abs=1e-13)

    def test_matches_product_state(self):
        th, ph = 0.7, 1.9
        psi = coherent_amplitudes(th, ph).vector
        full = reduce(np.kron, [psi] * 6)
        assert np.allclose(dicke_to_statevector(dicke_coherent(6, th, ph)), full, atol=1e-14)

    def test_large_n_is_finite(self):
        s = dicke_coherent(20_000, 1.0, 0.3)
        assert np.all(np.isfinite(s.c))
        assert np.vdot(s.c, s.c).real == pytest.approx(1, abs=1e-12)

    def test_poles(self):
        assert dicke_coherent(9, 0.0, 0.0).c[0] == 1
        assert abs(dicke_coherent(9, np.pi, 0.0).c[-1]) == pytest.approx(1)

    def test_bad_n(self):
        with pytest.raises(ValueError):
            dicke_coherent(0, 0.1, 0.1)
        with pytest.raises(ValueError):
            DickeState(2, [1.0, 1.0, 0.0])


class TestEvolution:
    def test_identity_at_zero(self):
        s = dicke_coherent(30, 1.0, 0.2)
        assert np.array_equal(evolve_ku(s, 0.3, 0.0).c, s.c)

    def test_norm_and_jz(self):
        s = dicke_coherent(300, 1.0, 0.2)
        u = evolve_ku(s, 0.01, 7.3)
        assert abs(np.vdot(u.c, u.c).real - 1) <= 1e-15 * 10
        assert spin_moments(u).mean[2] == pytest.approx(spin_moments(s).mean[2], abs=1e-12)

    def test_against_full_unitary(self):
        n, chi, t = 5, 0.4, 1.3
        s = dicke_coherent(n, 1.2, 0.5)
        jz = collective(SZ, n)
        U = np.diag(np.exp(-1j * chi * t * np.diag(jz).real ** 2))
        full = U @ dicke_to_statevector(s)
        assert np.allclose(dicke_to_statevector(evolve_ku(s, chi, t)), full, atol=1e-13)


class TestMoments:
    def test_coherent_x_state(self):
        n = 64
        m = spin_moments(dicke_coherent(n, np.pi / 2, 0.0))
        assert np.allclose(m.mean, [n / 2, 0, 0], atol=1e-12)
        second = m.cov + np.outer(m.mean, m.mean)
        assert np.allclose(np.diag(second), [n * n / 4, n / 4, n / 4], atol=1e-10)
        assert m.jplus == pytest.approx(m.mean[0] + 1j * m.mean[1], abs=1e-12)
        # minimum uncertainty
        assert m.cov[1, 1] == pytest.approx(m.mean[0] / 2, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 6, 10])
    def test_against_tensor_product(self, rng, n):
        s = evolve_ku(dicke_coherent(n, *rng.random(2) * [np.pi, 2 * np.pi]), 0.37, 1.1)
        psi = dicke_to_statevector(s)
        ops = [collective(op, n) for op in (SX, SY, SZ)]
        m = spin_moments(s)
        mean = np.array([np.vdot(psi, o @ psi).real for o in ops])
        assert np.allclose(m.mean, mean, atol=1e-12)
        for a in range(3):
            for b in range(3):
                sym = 0.5 * np.vdot(psi, (ops[a] @ ops[b] + ops[b] @ ops[a]) @ psi).real
                assert m.cov[a, b] == pytest.approx(sym - mean[a] * mean[b], abs=1e-12)

    def test_bound_on_mean(self, rng):
        s = random_dicke(rng, 40)
        assert np.linalg.norm(spin_moments(s).mean) <= 20 + 1e-12


class TestClosedForm:
    def test_t_zero(self):
        assert jplus_closed(10, 0.3, 0.0, (0.6, 0.0, 0.8)) == pytest.approx(5 * 0.6)

    def test_equatorial(self):
        n, chi, t = 50, 0.1, 2.0
        assert jplus_closed(n, chi, t, (0.6, 0.8, 0.0)) == pytest.approx(
            n / 2 * (0.6 + 0.8j) * np.cos(chi * t) ** (n - 1), rel=1e-13)

    def test_reference_case(self):
        n, g, t = 400, 1.0, 0.7
        r = (0.6, 0.0, 0.8)
        th = np.arccos(0.8)
        exact = spin_moments(evolve_ku(dicke_coherent(n, th, 0.0), 2 * g / n, t)).jplus
        assert abs(jplus_closed(n, 2 * g / n, t, r) - exact) <= 1e-10

    def test_sweep(self, rng):
        for n in (3, 17, 128, 700, 2048):
            th, ph = rng.random() * np.pi, rng.random() * 2 * np.pi
            chi_t = rng.random()
            exact = spin_moments(evolve_ku(dicke_coherent(n, th, ph), chi_t, 1.0)).jplus
            closed = jplus_closed(n, chi_t, 1.0, bloch_from_angles(th, ph))
            assert abs(closed - exact) <= 1e-10


class TestVariance:
    def test_t_zero(self):
        phi = np.linspace(0, np.pi, 7)
        assert np.allclose(var_jphi(100, 1.0, 0.0, phi), 25.0, atol=1e-12)

    def test_phi_zero(self):
        for t in (0.01, 0.05, 0.3):
            assert var_jphi(100, 1.0, t, 0.0) == pytest.approx(25.0, abs=1e-12)
            assert var_jphi_exact(100, 1.0, t, 0.0) == pytest.approx(25.0, abs=1e-10)

    def test_reference_point(self):
        n = 200
        f = var_jphi(n, 1.0, 0.02, 3 * np.pi / 4)
        e = var_jphi_exact(n, 1.0, 0.02, 3 * np.pi / 4)
        assert abs(f - e) / e <= 5 / n

    @pytest.mark.parametrize("n", [3, 20, 200, 1000])
    def test_finite_n_formula_is_exact(self, n):
        phi = np.linspace(0, np.pi, 16, endpoint=False)
        for chi_t in (0.003, 0.02, 0.1, 0.7):
            assert np.allclose(var_jphi_finite(n, 1.0, chi_t, phi), var_jphi_exact(n, 1.0, chi_t, phi),
                               rtol=1e-9, atol=1e-9)

    def test_large_n_no_underflow(self):
        v = var_jphi(50_000, 1.0, 0.05, np.linspace(0, np.pi, 9))
        assert np.all(np.isfinite(v)) and np.all(v > 0)


class TestMeanField:
    def test_t_zero(self):
        assert mean_field_error(100, 1.0, 0.0, 1.0, 0.3) == pytest.approx(0, abs=1e-13)

    def test_equatorial_shrinkage(self):
        n, g, t = 256, 1.0, 1.0
        s = evolve_ku(dicke_coherent(n, np.pi / 2, 0.0), 2 * g / n, t)
        R = 2 / n * spin_moments(s).mean
        assert np.linalg.norm(R) == pytest.approx(np.cos(2 * g * t / n) ** (n - 1), rel=1e-12)

    def test_one_over_n(self):
        ns = np.array([128, 256, 512, 1024, 2048])
        eps = np.array([mean_field_error(n, 1.0, 1.0, np.pi / 3, np.pi / 5) for n in ns])
        ratios = eps[1:] / eps[:-1]
        assert np.all((ratios >= 0.4) & (ratios <= 0.6))
        slope = np.polyfit(np.log(ns), np.log(eps), 1)[0]
        assert slope == pytest.approx(-1, abs=0.05)
        assert np.all(np.diff(eps * ns) / (eps * ns)[:-1] < 0.02)

    def test_needs_two_atoms(self):
        with pytest.raises(ValueError):
            mean_field_error(1, 1.0, 1.0, 0.3, 0.2)


class TestFit:
    def test_synthetic_recovery(self):
        c, te = 0.37, 1.8
        rows = [(n, t, c * np.expm1(t / te) / n) for n in (50, 200, 800) for t in (0.2, 0.7, 1.5, 3.0)]
        fit = fit_error_bound(rows)
        assert fit.c == pytest.approx(c, rel=0.01)
        assert fit.t_ent == pytest.approx(te, rel=0.01)
        assert fit.residual < 1e-8

    def test_small_t_is_linear(self):
        c, te = 0.37, 5.0
        t = 1e-3
        assert c * np.expm1(t / te) == pytest.approx(c * t / te, rel=1e-3)

    def test_measured_data(self):
        rows = [(n, t, mean_field_error(n, 1.0, t, np.pi / 3, np.pi / 5))
                for n in (64, 256, 1024) for t in (0.25, 0.5, 1.0, 1.5)]
        fit = fit_error_bound(rows)
        assert fit.c > 0 and fit.t_ent > 0 and np.isfinite(fit.residual)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            fit_error_bound([(100, 1.0, 0.01)] * 5)
        with pytest.raises(ValueError):
            fit_error_bound([(n, 1.0, 1 / n) for n in (10, 20, 40, 80, 160, 320)])
        with pytest.raises(ValueError):
            fit_error_bound([(n, t, 1 / n) for n in (10, 20, 40) for t in (1, 2)])


def wootters_reference(rho):
    """Textbook route through the square root of rho."""
    s = sqrtm(rho)
    R = sqrtm(s @ SIGMA_YY @ rho.conj() @ SIGMA_YY @ s)
    lam = np.sort(np.linalg.eigvalsh((R + R.conj().T) / 2))[::-1]
    return max(0.0, lam[0] - lam[1:].sum())


class TestConcurrence:
    def test_product(self):
        rho = np.zeros((4, 4))
        rho[0, 0] = 1
        assert concurrence(rho)[0] == 0

    def test_bell(self):
        v = np.array([1, 0, 0, 1]) / np.sqrt(2)
        C, tau, lam = concurrence(np.outer(v, v))
        assert C == pytest.approx(1, abs=1e-12) and tau == pytest.approx(1, abs=1e-12)
        assert np.all(np.diff(lam) <= 0)

    def test_against_textbook(self, rng):
        for _ in range(30):
            a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            rho = a @ a.conj().T
            rho /= np.trace(rho).real
            assert concurrence(rho)[0] == pytest.approx(wootters_reference(rho), abs=1e-8)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            concurrence(np.diag([1.2, -0.2, 0, 0]))


class TestReduced:
    def test_product_state_is_pure(self):
        s = dicke_coherent(7, 1.0, 0.4)
        rho1 = reduced_density(s, 1)
        psi = coherent_amplitudes(1.0, 0.4).vector
        assert np.allclose(rho1, np.outer(psi, psi.conj()), atol=1e-14)

    def test_ghz_like(self):
        a, b = 0.6, 0.8j
        st = SymmetricThreeQubit(a, b, 0, 0)
        assert np.allclose(reduced_density(st.statevector(), 1), np.diag([0.36, 0.64]), atol=1e-15)

    def test_w_pair_tangle(self):
        rho12 = reduced_density(SymmetricThreeQubit(0, 0, 1, 0).statevector(), 2)
        assert concurrence(rho12)[1] == pytest.approx(4 / 9, abs=1e-12)

    @pytest.mark.parametrize("n", [3, 5, 8, 12])
    def test_paths_agree(self, rng, n):
        s = random_dicke(rng, n)
        for keep in (1, 2, 3):
            a = reduced_density(s, keep, method="dicke")
            b = reduced_density(s, keep, method="full")
            assert np.max(np.abs(a - b)) <= 1e-12

    def test_keep_too_large(self):
        with pytest.raises(ValueError):
            reduced_density(dicke_coherent(2, 0.3, 0.1), 3)


class TestMonogamy:
    def test_product(self):
        r = monogamy_check(SymmetricThreeQubit(1, 0, 0, 0))
        assert r.lhs == pytest.approx(0, abs=1e-15) and r.rhs == pytest.approx(0, abs=1e-15)

    def test_w_saturates(self):
        r = monogamy_check(SymmetricThreeQubit(0, 0, 1, 0))
        assert r.lhs == pytest.approx(8 / 9, abs=1e-12)
        assert r.rhs == pytest.approx(8 / 9, abs=1e-12)

    def test_matches_statevector_path(self, rng):
        amps = random_symmetric_three(rng, 20)
        res = monogamy_arrays(amps)
        for i, v in enumerate(amps):
            psi = SymmetricThreeQubit(*v).statevector()
            rho12 = reduced_density(psi, 2)
            rho1 = reduced_density(psi, 1)
            tt = SIGMA_YY @ rho12.conj() @ SIGMA_YY
            assert np.trace(rho12 @ tt).real == pytest.approx(2 * np.linalg.det(rho1).real, abs=1e-12)
            assert res.lhs[i] == pytest.approx(2 * concurrence(rho12)[1], abs=1e-9)
            assert res.rhs[i] == pytest.approx(4 * np.linalg.det(rho1).real, abs=1e-12)

    def test_random_sweep(self, rng):
        res = monogamy_arrays(random_symmetric_three(rng, 20_000))
        assert np.max(res.violation) <= 1e-10
        assert np.max(res.identity_residual) <= 1e-12

    def test_unnormalized(self):
        with pytest.raises(ValueError):
            SymmetricThreeQubit(1, 1, 0, 0)


class TestTangleBound:
    def test_w_state(self):
        c = np.zeros(4, dtype=complex)
        c[1] = 1
        r = tangle_bound_check(DickeState(3, c))
        assert r.tau == pytest.approx(4 / 9, abs=1e-12)
        assert r.bound == 0.5 and r.ok

    def test_n12_sweep(self, rng):
        tau = pair_tangles(random_dicke(rng, 12, 200))
        assert np.all(tau <= 1 / 11 + 1e-10)

    def test_squeezed_state(self):
        n = 10
        s = evolve_ku(dicke_coherent(n, np.pi / 2, 0.0), 0.15, 1.0)
        r = tangle_bound_check(s)
        assert 0 < r.tau <= r.bound

    def test_range(self):
        with pytest.raises(ValueError):
            tangle_bound_check(dicke_coherent(2, 0.3, 0.1))
        with pytest.raises(ValueError):
            tangle_bound_check(dicke_coherent(13, 0.3, 0.1))
