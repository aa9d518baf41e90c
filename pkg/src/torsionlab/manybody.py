"""Symmetric N-atom dynamics in the Dicke basis, squeezing and pair entanglement.

Amplitudes ``c[k]`` are indexed by the number k of atoms in internal state 1,
so J_z has eigenvalue (N - 2k)/2 and J_+ = a_0^dagger a_1 lowers k by one.
In the qubit picture state 0 is |0> and state 1 is |1>, so a product state
|psi>^N with psi = (psi0, psi1) has c_k = sqrt(C(N, k)) psi0^(N-k) psi1^k.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.special import gammaln, xlogy

from .core import bloch_from_angles, coherent_amplitudes

EPS_NORM = 1e-12
EPS_T_NEG = 1e-10
MAX_FULL_N = 12

SIGMA_YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=float)


def log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


@dataclass(frozen=True)
class DickeState:
    n: int
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex)
        if c.shape != (self.n + 1,):
            raise ValueError(f"need {self.n + 1} amplitudes for N = {self.n}, got {c.shape}")
        nrm = np.vdot(c, c).real
        if abs(nrm - 1) > 1e-10:
            raise ValueError(f"Dicke amplitudes are not normalized (norm^2 = {nrm})")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def mz(self) -> np.ndarray:
        return (self.n - 2 * np.arange(self.n + 1)) / 2

    def overlap(self, other: "DickeState") -> complex:
        return complex(np.vdot(self.c, other.c))


def dicke_coherent(n, theta, phi) -> DickeState:
    """Spin coherent state |psi(theta, phi)>^N expanded on the Dicke basis."""
    if n < 1 or int(n) != n:
        raise ValueError(f"N must be a positive integer, got {n}")
    n = int(n)
    amp = coherent_amplitudes(theta, phi)
    k = np.arange(n + 1)
    logmag = 0.5 * log_binom(n, k) + xlogy(n - k, amp.psi0) + xlogy(k, abs(amp.psi1))
    c = np.exp(logmag) * np.exp(1j * k * phi)
    return DickeState(n, c / np.linalg.norm(c))


def evolve_ku(s: DickeState, chi, t) -> DickeState:
    """Apply U = exp(-i chi t J_z^2), diagonal in the Dicke basis."""
    # chi t m^2 reaches ~1e6 rad at N = 2048; split chi t so the large part of
    # the product is exact and only the small remainder rounds
    a = chi * t / 4
    q = (s.n - 2.0 * np.arange(s.n + 1)) ** 2
    c = 134217729.0 * a
    hi = c - (c - a)
    lo = a - hi
    return DickeState(s.n, s.c * np.exp(-1j * hi * q) * np.exp(-1j * lo * q))


def _ladder(n):
    k = np.arange(1, n + 1)
    return np.sqrt(k * (n - k + 1.0))  # <k-1| J_+ |k>


def apply_jplus(c, n):
    out = np.zeros_like(c)
    out[:-1] = _ladder(n) * c[1:]
    return out


def apply_jminus(c, n):
    out = np.zeros_like(c)
    out[1:] = _ladder(n) * c[:-1]
    return out


@dataclass(frozen=True)
class SpinMoments:
    n: int
    mean: np.ndarray  # <J_x>, <J_y>, <J_z>
    jplus: complex
    cov: np.ndarray  # symmetrized covariance matrix

    def var(self, phi):
        """Var(J_phi) for J_phi = sin(phi) J_y + cos(phi) J_z."""
        phi = np.asarray(phi, dtype=float)
        s, c = np.sin(phi), np.cos(phi)
        C = self.cov
        return s * s * C[1, 1] + c * c * C[2, 2] + 2 * s * c * C[1, 2]


def spin_moments(s: DickeState) -> SpinMoments:
    c, n = s.c, s.n
    jp = apply_jplus(c, n)
    jm = apply_jminus(c, n)
    vecs = np.stack([(jp + jm) / 2, (jp - jm) / 2j, s.mz * c])
    mean = np.einsum("i,ai->a", c.conj(), vecs).real
    second = np.einsum("ai,bi->ab", vecs.conj(), vecs).real
    cov = second - np.outer(mean, mean)
    cov = 0.5 * (cov + cov.T)
    return SpinMoments(n, mean, complex(np.vdot(c, jp)), cov)


def jplus_closed(n, chi, t, r) -> complex:
    """<J_+> after one-axis twisting of the product state with Bloch vector r."""
    x, y, z = r
    base = np.cos(chi * t) + 1j * z * np.sin(chi * t)
    return complex(n / 2 * (x + 1j * y) * base ** (n - 1))


def _cos_pow(x, p):
    """cos(x)^p evaluated as sign * exp(p ln|cos x|)."""
    c = np.cos(x)
    if p == 0:
        return np.ones_like(c)
    sign = np.where(c < 0, (-1.0) ** p, 1.0)
    with np.errstate(divide="ignore"):
        return sign * np.exp(p * np.log(np.abs(c)))


def var_jphi(n, chi, t, phi):
    """Large-N closed form for Var(J_phi) after twisting the x-polarized coherent state."""
    a = chi * t
    phi = np.asarray(phi, dtype=float)
    return (n / 4 + n * n / 8 * (1 - _cos_pow(2 * a, n - 2)) * np.sin(phi) ** 2
            + n * n / 4 * _cos_pow(a, n - 2) * np.sin(a) * np.sin(2 * phi))


def var_jphi_finite(n, chi, t, phi):
    """Same variance without the large-N step: N^2 becomes N(N - 1)."""
    a = chi * t
    phi = np.asarray(phi, dtype=float)
    nn = n * (n - 1)
    return (n / 4 + nn / 8 * (1 - _cos_pow(2 * a, n - 2)) * np.sin(phi) ** 2
            + nn / 4 * _cos_pow(a, n - 2) * np.sin(a) * np.sin(2 * phi))


def var_jphi_exact(n, chi, t, phi):
    """Var(J_phi) from exact Dicke second moments."""
    s = evolve_ku(dicke_coherent(n, np.pi / 2, 0.0), chi, t)
    return spin_moments(s).var(phi)


def torsion_rotate(r, g, t):
    """Mean-field z-torsion: rotate (x, y) by 2 g z t about the z axis."""
    x, y, z = r
    a = 2 * g * z * t
    return np.array([x * np.cos(a) - y * np.sin(a), x * np.sin(a) + y * np.cos(a), z])


def mean_field_error(n, g, t, theta, phi) -> float:
    """|R_exact(t) - r_torsion(t)| with chi = 2g/N."""
    if n < 2:
        raise ValueError("mean_field_error needs N >= 2")
    s = evolve_ku(dicke_coherent(n, theta, phi), 2 * g / n, t)
    R = 2 / n * spin_moments(s).mean
    r = torsion_rotate(bloch_from_angles(theta, phi), g, t)
    return float(np.linalg.norm(R - r))


@dataclass
class ErrorFit:
    n: np.ndarray
    t: np.ndarray
    eps: np.ndarray
    c: float
    t_ent: float
    residual: float  # rms of log(model / eps)
    extras: dict = field(default_factory=dict)

    def model(self, n, t):
        return self.c * np.expm1(np.asarray(t) / self.t_ent) / np.asarray(n)


def fit_error_bound(samples) -> ErrorFit:
    """Least-squares fit of eps ~ c (exp(t / t_ent) - 1) / N in log space.

    ``samples`` is an iterable of (N, t, eps) rows.  Rows with eps = 0 or
    t = 0 carry no information about the constants and are dropped.
    """
    arr = np.asarray(list(samples), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("samples must be rows of (N, t, eps)")
    if np.any(arr[:, 2] < 0):
        raise ValueError("eps must be nonnegative")
    arr = arr[(arr[:, 1] > 0) & (arr[:, 2] > 0)]
    if arr.shape[0] < 6:
        raise ValueError("need at least 6 informative samples")
    n, t, eps = arr.T
    if n.max() / n.min() < 10:
        raise ValueError("samples must span at least a decade in N")
    if np.unique(t).size < 2:
        raise ValueError("samples must include at least two distinct times")

    def resid(p):
        c, te = np.exp(p)
        return np.log(c * np.expm1(t / te) / n) - np.log(eps)

    # start from the small-t slope, with t_ent at the sampled time scale
    te0 = float(np.max(t))
    c0 = float(np.median(eps * n / np.expm1(t / te0)))
    sol = least_squares(resid, np.log([c0, te0]), method="lm", xtol=1e-14, ftol=1e-14)
    c, te = np.exp(sol.x)
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    return ErrorFit(n, t, eps, float(c), float(te), rms)


# ---------------------------------------------------------------- entanglement


def _validate_density(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise ValueError(f"expected 4x4 two-qubit density matrices, got {rho.shape}")
    if not np.allclose(rho, np.conj(np.swapaxes(rho, -1, -2)), atol=1e-10):
        raise ValueError("density matrix is not Hermitian")
    return rho


def concurrence_from_factor(V):
    """Concurrence of rho = V V^dagger, V of shape (..., 4, r).

    The square roots of the eigenvalues of rho rho~ are the singular values of
    Q = V^T (sigma_y x sigma_y) V, which avoids square-rooting tiny
    eigenvalues.
    """
    V = np.asarray(V, dtype=complex)
    Q = np.swapaxes(V, -1, -2) @ SIGMA_YY @ V
    sv = np.linalg.svd(Q, compute_uv=False)
    lam = np.zeros(sv.shape[:-1] + (4,))
    r = min(4, sv.shape[-1])
    lam[..., :r] = sv[..., :r]
    delta = lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]
    C = np.maximum(delta, 0.0)
    return C, C * C, lam


def concurrence(rho):
    """Concurrence C, tangle C^2 and the sorted lambda_i of a two-qubit state."""
    rho = _validate_density(rho)
    w, v = np.linalg.eigh(rho)
    if np.any(w < -EPS_T_NEG):
        raise ValueError(f"density matrix has eigenvalue {w.min():.3e} < 0")
    # drop numerically-null components: they only add noise to the singular values
    keep = w > EPS_T_NEG * np.max(w, axis=-1, keepdims=True)
    V = v * np.sqrt(np.where(keep, w, 0.0))[..., None, :]
    C, tau, lam = concurrence_from_factor(V)
    if np.ndim(C) == 0:
        return float(C), float(tau), lam
    return C, tau, lam


def dicke_basis_vectors(n) -> np.ndarray:
    """Columns are normalized Dicke states |D_k> in the 2^n computational basis."""
    idx = np.arange(2**n)
    pop = np.array([bin(i).count("1") for i in idx])
    D = np.zeros((2**n, n + 1))
    D[idx, pop] = np.exp(-0.5 * log_binom(n, pop))
    return D


def dicke_to_statevector(s) -> np.ndarray:
    """Full 2^N statevector (qubit 1 is the most significant bit)."""
    c = s.c if isinstance(s, DickeState) else np.asarray(s, dtype=complex)
    n = c.shape[-1] - 1
    if n > MAX_FULL_N:
        raise ValueError(f"full statevector path is capped at N = {MAX_FULL_N}")
    return c @ dicke_basis_vectors(n).T


def reduced_density(state, keep, method="auto") -> np.ndarray:
    """Reduced density matrix of the first ``keep`` qubits.

    ``state`` is a DickeState or a full statevector of length 2^N.  For a
    DickeState, ``method`` picks the symmetric closed form ("dicke") or the
    full statevector partial trace ("full"); "auto" uses the closed form.
    """
    if isinstance(state, DickeState):
        n = state.n
        if not 1 <= keep <= n:
            raise ValueError(f"keep must lie in [1, N], got {keep}")
        if method == "full":
            return reduced_density(dicke_to_statevector(state), keep)
        if method not in ("auto", "dicke"):
            raise ValueError(f"unknown method {method!r}")
        return _reduced_dicke(state, keep)
    psi = np.asarray(state, dtype=complex)
    n = int(np.log2(psi.shape[-1]))
    if 2**n != psi.shape[-1]:
        raise ValueError("statevector length must be a power of two")
    if not 1 <= keep <= n:
        raise ValueError(f"keep must lie in [1, N], got {keep}")
    m = psi.reshape(psi.shape[:-1] + (2**keep, 2 ** (n - keep)))
    return m @ np.conj(np.swapaxes(m, -1, -2))


def _reduced_dicke(s: DickeState, keep):
    n, rest = s.n, s.n - keep
    # |D_k^N> = sum_j alpha(k, j) |D_j^keep> |D_{k-j}^rest>
    k = np.arange(n + 1)[:, None]
    j = np.arange(keep + 1)[None, :]
    valid = (k - j >= 0) & (k - j <= rest)
    kj = np.clip(k - j, 0, rest)
    la = 0.5 * (log_binom(keep, j) + log_binom(rest, kj) - log_binom(n, k))
    alpha = np.where(valid, np.exp(la), 0.0)
    # amplitude tensor M[j, l] on |D_j^keep>|D_l^rest>
    M = np.zeros((keep + 1, rest + 1), dtype=complex)
    for jj in range(keep + 1):
        ks = np.arange(jj, jj + rest + 1)
        M[jj] = s.c[ks] * alpha[ks, jj]
    rho_sym = M @ M.conj().T
    D = dicke_basis_vectors(keep)
    return D @ rho_sym @ D.T


# ------------------------------------------------------------------ monogamy

W3 = np.zeros(8)
W3[[1, 2, 4]] = 1 / np.sqrt(3)
V3 = np.zeros(8)
V3[[3, 5, 6]] = 1 / np.sqrt(3)


@dataclass(frozen=True)
class SymmetricThreeQubit:
    """a|000> + b|111> + c|W> + d|V>."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        nrm = abs(self.a) ** 2 + abs(self.b) ** 2 + abs(self.c) ** 2 + abs(self.d) ** 2
        if abs(nrm - 1) > EPS_NORM:
            raise ValueError(f"amplitudes are not normalized (norm^2 = {nrm})")

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d], dtype=complex)

    def statevector(self) -> np.ndarray:
        psi = self.c * W3 + self.d * V3 + 0j
        psi[0] += self.a
        psi[7] += self.b
        return psi


def _pair_vectors(a, b, c, d):
    """Two-qubit vectors A, B (rho_12 = AA^+ + BB^+) and C, D (for rho_12~)."""
    s3 = np.sqrt(3.0)
    r = 1 / s3  # sqrt(2/3) times the 1/sqrt(2) weight inside Psi+
    A = np.stack([a, r * c, r * c, d / s3], axis=-1)
    B = np.stack([c / s3, r * d, r * d, b], axis=-1)
    C = np.stack([np.conj(d) / s3, -r * np.conj(c), -r * np.conj(c), np.conj(a)], axis=-1)
    D = np.stack([np.conj(b), -r * np.conj(d), -r * np.conj(d), np.conj(c) / s3], axis=-1)
    return A, B, C, D


@dataclass
class MonogamyResult:
    lhs: np.ndarray  # tau_12 + tau_13
    rhs: np.ndarray  # 4 det rho_1
    identity: np.ndarray  # columns: overlap sum, expanded polynomial, factored form, 2 det rho_1, tr(rho rho~)

    @property
    def violation(self):
        return self.lhs - self.rhs

    @property
    def identity_residual(self):
        return np.max(self.identity, axis=-1) - np.min(self.identity, axis=-1)


def monogamy_arrays(amps) -> MonogamyResult:
    """Vectorized monogamy evaluation; ``amps`` has shape (..., 4) = (a, b, c, d)."""
    amps = np.asarray(amps, dtype=complex)
    nrm = np.sum(np.abs(amps) ** 2, axis=-1)
    if np.any(np.abs(nrm - 1) > EPS_NORM):
        raise ValueError("amplitudes are not normalized")
    a, b, c, d = np.moveaxis(amps, -1, 0)
    A, B, C, D = _pair_vectors(a, b, c, d)

    def ov(u, v):
        return np.abs(np.sum(np.conj(u) * v, axis=-1)) ** 2

    overlap_sum = ov(A, C) + ov(A, D) + ov(B, C) + ov(B, D)
    aa, bb, cc, dd = (np.abs(v) ** 2 for v in (a, b, c, d))
    s3 = np.sqrt(3.0)
    expanded = (2 * aa * bb + 4 / 3 * (aa * dd + bb * cc) + 2 / 9 * cc * dd + 4 / 9 * (cc**2 + dd**2)
                - 4 / 3 * np.real(a * b * np.conj(c) * np.conj(d)
                                  + 2 / s3 * (a * np.conj(c) ** 2 * d + b * c * np.conj(d) ** 2)))
    p0 = aa + 2 / 3 * cc + 1 / 3 * dd
    p1 = bb + 1 / 3 * cc + 2 / 3 * dd
    off = a * np.conj(c) / s3 + 2 / 3 * c * np.conj(d) + np.conj(b) * d / s3
    factored = 2 * p0 * p1 - 2 * np.abs(off) ** 2
    det1 = p0 * p1 - np.abs(off) ** 2

    V = np.stack([A, B], axis=-1)  # rho_12 = V V^dagger
    rho12 = V @ np.conj(np.swapaxes(V, -1, -2))
    rho12_t = SIGMA_YY @ np.conj(rho12) @ SIGMA_YY
    tr_t = np.real(np.trace(rho12 @ rho12_t, axis1=-2, axis2=-1))
    _, tau12, _ = concurrence_from_factor(V)
    ident = np.stack([overlap_sum, expanded, factored, 2 * det1, tr_t], axis=-1)
    # tau_13 = tau_12 by permutation symmetry
    return MonogamyResult(2 * tau12, 4 * det1, ident)


def monogamy_check(s: SymmetricThreeQubit) -> MonogamyResult:
    return monogamy_arrays(s.amplitudes)


def random_symmetric_three(rng, n) -> np.ndarray:
    """n random (a, b, c, d) rows from normalized complex Gaussians."""
    z = rng.normal(size=(n, 4)) + 1j * rng.normal(size=(n, 4))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def random_dicke(rng, n_atoms, n=None):
    shape = (n_atoms + 1,) if n is None else (n, n_atoms + 1)
    z = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    z /= np.linalg.norm(z, axis=-1, keepdims=True)
    if n is None:
        return DickeState(n_atoms, z)
    return z


@dataclass(frozen=True)
class TangleBound:
    tau: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.tau <= self.bound + 1e-10


def pair_tangles(c) -> np.ndarray:
    """Pair tangles for a batch of Dicke amplitude rows via the full statevector."""
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    n = c.shape[-1] - 1
    if not 3 <= n <= MAX_FULL_N:
        raise ValueError(f"tangle check needs 3 <= N <= {MAX_FULL_N}, got {n}")
    psi = dicke_to_statevector(c)
    rho = reduced_density(psi, 2)
    return concurrence(rho)[1]


def tangle_bound_check(s: DickeState) -> TangleBound:
    tau = float(pair_tangles(s.c)[0])
    return TangleBound(tau, 1.0 / (s.n - 1))
