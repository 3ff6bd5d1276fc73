import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rspsim import qcore
from rspsim.channels import dephased_bell, depolarized_bell
from rspsim.errors import DegeneratePostselectionError, DimensionError, DomainError, UnsupportedCorrectionError
from rspsim.protocol import cnot_A_to_a, correct_result0, rsp_run, rsp_run_unitaries, u_r, u_theta_phi
from conftest import random_density, random_unitary
from rspsim.states import BlochVector, bell_psi_minus, bloch_to_rho, projector, psi_minus_ket, pure_kets

radii = st.floats(min_value=0.0, max_value=1.0)
thetas = st.floats(min_value=0.0, max_value=math.pi)
phis = st.floats(min_value=0.0, max_value=2 * math.pi)
probs = st.floats(min_value=0.0, max_value=1.0)


def statevector_oracle(rho_ab, first, second):
    """Bob's outcome-1 state by pushing each eigenvector of rho_AB as an 8-amplitude tensor."""
    w, vecs = np.linalg.eigh(rho_ab)
    bob = np.zeros((2, 2), dtype=complex)
    for weight, v in zip(w, vecs.T):
        if weight < 1e-15:
            continue
        t = np.zeros((2, 2, 2), dtype=complex)  # indices A, B, a
        t[:, :, 0] = v.reshape(2, 2)
        t = np.einsum("xA,Aba->xba", first, t)
        flipped = t.copy()
        flipped[1] = t[1, :, ::-1]  # CNOT: control A, target a
        t = np.einsum("xA,Aba->xba", second, flipped)
        branch = t[1]  # A = 1, indices b, a
        bob += weight * branch @ branch.conj().T
    prob = np.trace(bob).real
    return bob / prob, prob


def conj_ops(v):
    t = v.canonical()
    return u_theta_phi(t.theta, t.phi).conj().T, u_r(t.r)


class TestGates:
    def test_u_theta_phi_examples(self):
        assert qcore.allclose(u_theta_phi(0, 0), np.eye(2), 0)
        assert qcore.allclose(u_theta_phi(math.pi, 0), [[0, -1], [1, 0]], 1e-16)

    @settings(max_examples=100, deadline=None)
    @given(thetas, phis)
    def test_u_theta_phi_maps_zero_to_psi(self, theta, phi):
        u = u_theta_phi(theta, phi)
        psi, psi_perp, _, _ = pure_kets(theta, phi)
        assert qcore.allclose(u @ [1, 0], psi, 1e-15)
        assert qcore.allclose(u @ [0, 1], -psi_perp, 1e-15)
        assert qcore.allclose(u.conj().T @ u, np.eye(2), 1e-15)

    def test_u_r_examples(self):
        s = math.sqrt(0.5)
        assert qcore.allclose(u_r(1.0), np.eye(2), 0)
        assert qcore.allclose(u_r(0.0), [[s, -s], [s, s]], 1e-16)
        a, b = math.sqrt(0.75), math.sqrt(0.25)
        assert qcore.allclose(u_r(0.5), [[a, -b], [b, a]], 1e-16)

    @pytest.mark.parametrize("r", [-0.5, 1.5])
    def test_u_r_domain(self, r):
        with pytest.raises(DomainError):
            u_r(r)

    def test_cnot(self):
        c = cnot_A_to_a()
        assert qcore.allclose(c @ c, np.eye(4), 0)
        assert qcore.allclose(c @ [0, 0, 1, 0], [0, 0, 0, 1], 0)
        a, b = 0.6, 0.8j
        assert qcore.allclose(c @ np.kron([a, b], [1, 0]), [a, 0, 0, b], 0)

    @settings(max_examples=100, deadline=None)
    @given(thetas, phis)
    def test_singlet_expansion(self, theta, phi):
        # U^dagger on A maps the singlet to -(|0>psi_perp + |1>psi)/sqrt2 in our phase convention
        psi, psi_perp, _, _ = pure_kets(theta, phi)
        u = u_theta_phi(theta, phi)
        got = np.kron(u.conj().T, np.eye(2)) @ psi_minus_ket()
        expected = -(np.kron([1, 0], psi_perp) + np.kron([0, 1], psi)) / math.sqrt(2)
        assert qcore.allclose(got, expected, 1e-15)


class TestIdeal:
    @settings(max_examples=100, deadline=None)
    @given(radii, thetas, phis)
    def test_prepares_target(self, r, theta, phi):
        v = BlochVector(r, theta, phi)
        out = rsp_run(bell_psi_minus(), v)
        assert qcore.allclose(out.conditional_state, bloch_to_rho(v), 1e-12)
        assert abs(out.success_probability - 0.5) < 1e-12
        assert abs(out.branch0_probability - 0.5) < 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=-1.0, max_value=0.0), thetas, phis)
    def test_negative_radius(self, r, theta, phi):
        v = BlochVector(r, theta, phi)
        assert qcore.allclose(rsp_run(bell_psi_minus(), v).conditional_state, bloch_to_rho(v), 1e-12)

    def test_pure_target_branch0_is_orthogonal(self):
        out = rsp_run(bell_psi_minus(), BlochVector(1.0, 1.1, 0.3))
        psi_perp = pure_kets(1.1, 0.3)[1]
        assert qcore.allclose(out.branch0_state, projector(psi_perp), 1e-12)


class TestAgainstStateVector:
    @settings(max_examples=60, deadline=None)
    @given(radii, thetas, phis, probs)
    def test_noisy_channels(self, r, theta, phi, p):
        v = BlochVector(r, theta, phi)
        first, second = conj_ops(v)
        for rho_ab in (depolarized_bell(p), dephased_bell(p)):
            bob, prob = statevector_oracle(rho_ab, first, second)
            out = rsp_run(rho_ab, v)
            assert qcore.allclose(out.conditional_state, bob, 1e-12)
            assert abs(out.success_probability - prob) < 1e-12

    def test_random_channel_state(self, rng):
        for _ in range(10):
            rho_ab = random_density(rng, 4)
            first, second = random_unitary(rng, 2), random_unitary(rng, 2)
            bob, prob = statevector_oracle(rho_ab, first, second)
            out = rsp_run_unitaries(rho_ab, first, second)
            assert qcore.allclose(out.conditional_state, bob, 1e-12)
            assert abs(out.success_probability - prob) < 1e-12
            assert abs(out.success_probability + out.branch0_probability - 1) < 1e-12


class TestNoisyMixtures:
    @settings(max_examples=100, deadline=None)
    @given(radii, thetas, phis, probs)
    def test_depolarizing_mixture(self, r, theta, phi, p):
        psi, psi_perp, _, _ = pure_kets(theta, phi)
        expected = (1 + p * r) / 2 * projector(psi) + (1 - p * r) / 2 * projector(psi_perp)
        out = rsp_run(depolarized_bell(p), BlochVector(r, theta, phi))
        assert qcore.allclose(out.conditional_state, expected, 1e-12)
        assert abs(out.success_probability - 0.5) < 1e-12

    @settings(max_examples=100, deadline=None)
    @given(radii, thetas, phis, probs)
    def test_dephasing_mixture(self, r, theta, phi, p):
        psi, psi_perp, psi_p, psi_p_perp = pure_kets(theta, phi)
        a, b = (1 + p) / 2, (1 - p) / 2
        hi, lo = (1 + r) / 2, (1 - r) / 2
        expected = (
            a * hi * projector(psi) + a * lo * projector(psi_perp)
            + b * hi * projector(psi_p) + b * lo * projector(psi_p_perp)
        )
        out = rsp_run(dephased_bell(p), BlochVector(r, theta, phi))
        assert qcore.allclose(out.conditional_state, expected, 1e-12)


class TestErrors:
    def test_wrong_dimension(self):
        with pytest.raises(DimensionError):
            rsp_run(np.eye(2) / 2, BlochVector(1, 0, 0))

    def test_degenerate_postselection(self):
        # A in |0>, no rotation: outcome 1 never happens
        rho_ab = np.kron(projector([1, 0]), np.eye(2) / 2)
        with pytest.raises(DegeneratePostselectionError):
            rsp_run_unitaries(rho_ab, np.eye(2), np.eye(2))


class TestCorrection:
    def test_polar(self):
        psi, psi_perp, _, _ = pure_kets(0.7, 0.0)
        assert qcore.allclose(correct_result0("polar", projector(psi_perp)), projector(psi), 1e-15)

    def test_equatorial(self):
        psi, psi_perp, _, _ = pure_kets(math.pi / 2, 1.3)
        got = correct_result0("equatorial", projector(psi_perp))
        assert qcore.allclose(got, projector(psi), 1e-15)

    @settings(max_examples=50, deadline=None)
    @given(thetas)
    def test_polar_branch0_fixed(self, theta):
        out = rsp_run(bell_psi_minus(), BlochVector(1.0, theta, 0.0))
        fixed = correct_result0("polar-great-circle", out.branch0_state)
        assert qcore.allclose(fixed, out.conditional_state, 1e-12)

    @settings(max_examples=50, deadline=None)
    @given(phis)
    def test_equatorial_branch0_fixed(self, phi):
        out = rsp_run(bell_psi_minus(), BlochVector(1.0, math.pi / 2, phi))
        fixed = correct_result0("equatorial-circle", out.branch0_state)
        assert qcore.allclose(fixed, out.conditional_state, 1e-12)

    @pytest.mark.parametrize("ensemble", ["polar", "equatorial"])
    def test_involution(self, ensemble, rng):
        rho = random_density(rng, 2)
        assert qcore.allclose(correct_result0(ensemble, correct_result0(ensemble, rho)), rho, 1e-15)

    def test_unsupported(self):
        with pytest.raises(UnsupportedCorrectionError):
            correct_result0("generic", np.eye(2) / 2)
