"""Qubit state representations, norms and the two-mode parameter map.

Bloch vectors are plain ``numpy`` arrays of shape ``(3,)`` (or ``(..., 3)``
for batches); density matrices are ``(2, 2)`` complex arrays.  Units have
hbar = 1 throughout.
"""

from dataclasses import dataclass

import numpy as np

EPS_HERM = 1e-12
EPS_STATE = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

# Levi-Civita symbol eps[mu, nu, lam]
LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0


def as_bloch(r) -> np.ndarray:
    """Coerce to a finite float Bloch vector (or batch of them)."""
    r = np.asarray(r, dtype=float)
    if r.shape[-1:] != (3,):
        raise ValueError(f"Bloch vector must have trailing dimension 3, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValueError("Bloch vector has non-finite entries")
    return r


def is_hermitian(m, atol=EPS_HERM) -> bool:
    m = np.asarray(m)
    return bool(np.allclose(m, np.conj(np.swapaxes(m, -1, -2)), rtol=0, atol=atol))


def _check_hermitian(m, atol=EPS_HERM):
    m = np.asarray(m, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if not is_hermitian(m, atol=atol * scale):
        raise ValueError("matrix is not Hermitian within tolerance")
    return m


def density_from_bloch(r) -> np.ndarray:
    """Return rho = (I + r.sigma) / 2."""
    r = as_bloch(r)
    if np.any(np.linalg.norm(r, axis=-1) > 1 + EPS_STATE):
        raise ValueError("Bloch vector lies outside the unit ball")
    return 0.5 * (IDENTITY + np.einsum("...m,mij->...ij", r.astype(complex), PAULI))


def bloch_from_density(rho) -> np.ndarray:
    """Return r^mu = tr(rho sigma^mu)."""
    rho = _check_hermitian(rho)
    if rho.shape[-2:] != (2, 2):
        raise ValueError(f"expected 2x2 density matrix, got shape {rho.shape}")
    return np.einsum("...ij,mji->...m", rho, PAULI).real


def trace_norm(x) -> float:
    """Schatten 1-norm of a Hermitian matrix: the sum of absolute eigenvalues."""
    x = _check_hermitian(x)
    return float(np.sum(np.abs(np.linalg.eigvalsh(x))))


def trace_distance(rho_a, rho_b) -> float:
    """Unnormalized trace distance ||rho_a - rho_b||_1 (in [0, 2])."""
    return trace_norm(np.asarray(rho_a) - np.asarray(rho_b))


def positive_projector(x) -> np.ndarray:
    """Projector onto the strictly positive eigenspace of Hermitian ``x``.

    This is the optimal measurement operator E in max_{0<=E<=I} tr(E X).
    """
    w, v = np.linalg.eigh(_check_hermitian(x))
    vp = v[:, w > 0]
    return vp @ vp.conj().T


@dataclass(frozen=True)
class CoherentAmplitudes:
    """Single-atom amplitudes (psi0, psi1) with psi0 real and nonnegative."""

    psi0: float
    psi1: complex

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.psi0, self.psi1], dtype=complex)

    @property
    def bloch(self) -> np.ndarray:
        return bloch_from_density(np.outer(self.vector, self.vector.conj()))


def coherent_amplitudes(theta: float, phi: float) -> CoherentAmplitudes:
    if not 0.0 <= theta <= np.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    return CoherentAmplitudes(float(np.cos(theta / 2)), np.exp(1j * phi) * np.sin(theta / 2))


def bloch_from_angles(theta, phi) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def ket_from_bloch(r) -> np.ndarray:
    """Pure-state ket for a unit Bloch vector, with the first amplitude real >= 0."""
    r = as_bloch(r)
    n = np.linalg.norm(r)
    if abs(n - 1) > EPS_STATE:
        raise ValueError("ket_from_bloch needs a pure state (|r| = 1)")
    x, y, z = r / n
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.arctan2(y, x)
    return coherent_amplitudes(theta, phi).vector


def strip_global_phase(psi) -> np.ndarray:
    """Rotate the global phase so the first nonzero amplitude is real and positive."""
    psi = np.asarray(psi, dtype=complex)
    idx = int(np.argmax(np.abs(psi) > EPS_HERM))
    a = psi[idx]
    if abs(a) == 0:
        return psi
    return psi * (abs(a) / a)


@dataclass(frozen=True)
class EffectiveParams:
    bx: float
    bz: float
    g: float
    lam: float
    gamma0: float
    gamma1: float
    gamma_prime: float
    chi: float
    k0: float
    k1: float
    k_prime: float


def effective_params(omega0, omega1, rabi, u00, u11, u01, mass, n_atoms) -> EffectiveParams:
    """Map two-component condensate parameters to (B_x, B_z, g) and chi.

    Gaussian ground-state modes of width l = sqrt(1/(m omega)) give the
    mode-overlap integrals that set the two-mode couplings.  ``rabi`` is the
    drive frequency Omega.
    """
    for name, val in [("omega0", omega0), ("omega1", omega1), ("mass", mass), ("n_atoms", n_atoms)]:
        if not val > 0:
            raise ValueError(f"{name} must be positive, got {val}")
    l0sq = 1.0 / (mass * omega0)
    l1sq = 1.0 / (mass * omega1)
    gamma0 = u00 / (2 * (2 * np.pi * l0sq) ** 1.5)
    gamma1 = u11 / (2 * (2 * np.pi * l1sq) ** 1.5)
    gamma_p = u01 / (np.pi * (l0sq + l1sq)) ** 1.5
    lam = 0.5 * rabi * (2 * np.sqrt(l0sq * l1sq) / (l0sq + l1sq)) ** 1.5
    k0, k1, kp = n_atoms * gamma0, n_atoms * gamma1, n_atoms * gamma_p
    return EffectiveParams(
        bx=lam,
        bz=(omega0 - omega1) / 4 + (k0 - k1) / 2,
        g=(k0 + k1 - kp) / 2,
        lam=lam,
        gamma0=gamma0,
        gamma1=gamma1,
        gamma_prime=gamma_p,
        chi=gamma0 + gamma1 - gamma_p,
        k0=k0,
        k1=k1,
        k_prime=kp,
    )


def random_bloch_ball(rng, n, radius=1.0) -> np.ndarray:
    """Uniform samples from a ball of the given radius, shape (n, 3)."""
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.random(n)[:, None] ** (1 / 3)


def random_bloch_sphere(rng, n) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def make_rng(seed=42) -> np.random.Generator:
    """Counter-based (Philox) generator; spawn children with ``rng.spawn``."""
    return np.random.Generator(np.random.Philox(seed))
