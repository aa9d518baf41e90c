"""Dissipative torsion: seven signed jump operators plus torsion.

The Bloch equations are

    dx/dt = m z - gamma x - 2 g y z
    dy/dt = -gamma y + 2 g x z
    dz/dt = m x - gamma z

For m > gamma the origin is a saddle and the flow splits the ball between two
stable fixed points r_plus and r_minus, which is what the autonomous
discriminator exploits.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .core import LEVI_CIVITA, PAULI, SIGMA_X, SIGMA_Y, SIGMA_Z, _check_hermitian, as_bloch
from .integrator import DormandPrince, solve
from .torsion import Trajectory, check_tol

# lambda_4 couples x and z symmetrically
LAMBDA4 = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
EPS_FP = 1e-6
JACOBIAN_STEP = 1e-6


@dataclass(frozen=True)
class JumpTerm:
    zeta: int
    B: np.ndarray

    def __post_init__(self):
        if self.zeta not in (1, -1):
            raise ValueError(f"zeta must be +1 or -1, got {self.zeta}")
        B = np.asarray(self.B, dtype=complex)
        if B.shape != (2, 2):
            raise ValueError(f"jump operator must be 2x2, got {B.shape}")
        object.__setattr__(self, "B", B)


def jump_table(gamma, m) -> list[JumpTerm]:
    """Three depolarizing jumps (weight gamma) and four signed jumps (weight m)."""
    if gamma < 0 or m < 0:
        raise ValueError("gamma and m must be nonnegative")
    a = np.sqrt(gamma) / 2
    b = np.sqrt(m / 8)
    rows = [JumpTerm(1, a * s) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)]
    rows += [
        JumpTerm(1, b * (SIGMA_X + SIGMA_Y + SIGMA_Z)),
        JumpTerm(1, b * (SIGMA_X - SIGMA_Y + SIGMA_Z)),
        JumpTerm(-1, b * (SIGMA_X + SIGMA_Y - SIGMA_Z)),
        JumpTerm(-1, b * (SIGMA_X - SIGMA_Y - SIGMA_Z)),
    ]
    return rows


def l_plus(jumps) -> np.ndarray:
    """L_+ = -1/2 sum_alpha zeta_alpha B_alpha^dagger B_alpha."""
    out = np.zeros((2, 2), dtype=complex)
    for j in jumps:
        out -= 0.5 * j.zeta * (j.B.conj().T @ j.B)
    return out


def jump_block(j: JumpTerm) -> np.ndarray:
    """(1/2) tr(sigma^mu B sigma^nu B^dagger) as a real 3x3 matrix."""
    Bd = j.B.conj().T
    M = 0.5 * np.einsum("aij,jk,bkl,li->ab", PAULI, j.B, PAULI, Bd)
    return M.real


@dataclass(frozen=True)
class PauliGenerator:
    G: np.ndarray
    C: np.ndarray

    def __call__(self, r):
        return np.asarray(r) @ self.G.T + self.C


def generator_from_master(H, jumps) -> PauliGenerator:
    """Pauli-basis form dr/dt = G r + C of a linear signed master equation."""
    H = _check_hermitian(H)
    if H.shape != (2, 2):
        raise ValueError(f"Hamiltonian must be 2x2, got {H.shape}")
    h = np.einsum("ij,lji->l", H, PAULI).real
    G = -np.einsum("mnl,l->mn", LEVI_CIVITA, h)
    C = np.zeros(3)
    for j in jumps:
        G += j.zeta * jump_block(j)
        comm = j.B @ j.B.conj().T - j.B.conj().T @ j.B
        C += 0.5 * j.zeta * np.einsum("mij,ji->m", PAULI, comm).real
    L = l_plus(jumps)
    # (1/2) tr(sigma^mu {L_+, sigma^nu}); equals tr(L_+) delta when L_+ is scalar
    G += 0.5 * np.einsum("mij,jk,nki->mn", PAULI, L, PAULI).real
    G += 0.5 * np.einsum("mij,njk,ki->mn", PAULI, PAULI, L).real
    return PauliGenerator(G, C)


@dataclass(frozen=True)
class DissipativeParams:
    gamma: float
    m: float
    g: float

    def __post_init__(self):
        if self.gamma < 0 or self.m < 0:
            raise ValueError("gamma and m must be nonnegative")
        if not np.isfinite(self.g):
            raise ValueError("g must be finite")

    @property
    def delta(self) -> float:
        return (self.m**2 - self.gamma**2) / self.m**2

    @property
    def g_min(self) -> float:
        return float(np.sqrt(max(self.m**2 - self.gamma**2, 0.0) / 2))


def dissipative_rhs(r, p: DissipativeParams) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    out = np.empty_like(r)
    out[..., 0] = p.m * z - p.gamma * x - 2 * p.g * y * z
    out[..., 1] = -p.gamma * r[..., 1] + 2 * p.g * x * z
    out[..., 2] = p.m * x - p.gamma * z
    return out


def torsion_hamiltonian(r, g) -> np.ndarray:
    """State-dependent H_eff = g z sigma^z."""
    return g * float(r[2]) * SIGMA_Z


def generator_at(r, p: DissipativeParams) -> PauliGenerator:
    """Nonlinear generator G(r) built through the linear assembly path."""
    return generator_from_master(torsion_hamiltonian(r, p.g), jump_table(p.gamma, p.m))


def jacobian(r, p: DissipativeParams, h=JACOBIAN_STEP) -> np.ndarray:
    r = as_bloch(r)
    J = np.empty((3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        J[:, k] = (dissipative_rhs(r + e, p) - dissipative_rhs(r - e, p)) / (2 * h)
    return J


@dataclass(frozen=True)
class FixedPoint:
    r: np.ndarray
    eigenvalues: np.ndarray

    @property
    def stable(self) -> bool:
        return bool(np.all(self.eigenvalues.real < 0))


@dataclass(frozen=True)
class FixedPointSet:
    origin: FixedPoint
    plus: FixedPoint | None
    minus: FixedPoint | None
    delta: float
    g_min: float

    @property
    def inside_ball(self) -> bool:
        return self.plus is not None and bool(np.linalg.norm(self.plus.r) <= 1.0)


def _fp(r, p):
    r = np.asarray(r, dtype=float)
    return FixedPoint(r, np.linalg.eigvals(jacobian(r, p)))


def fixed_points(p: DissipativeParams) -> FixedPointSet:
    if not (p.g > 0 and p.m > 0):
        raise ValueError("fixed_points needs g > 0 and m > 0")
    d = p.delta
    origin = _fp(np.zeros(3), p)
    if p.m <= p.gamma:
        return FixedPointSet(origin, None, None, d, p.g_min)
    sd = np.sqrt(d)
    rp = np.array([p.gamma / (2 * p.g) * sd, p.m / (2 * p.g) * d, p.m / (2 * p.g) * sd])
    rm = rp * np.array([-1.0, 1.0, -1.0])
    return FixedPointSet(origin, _fp(rp, p), _fp(rm, p), d, p.g_min)


def linearized_rates(p: DissipativeParams) -> tuple[float, float]:
    """Rates of xi_+ = (z + x)/2 and xi_- = (z - x)/2 near the origin."""
    return p.m - p.gamma, -(p.m + p.gamma)


class Basin(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    ORIGIN = "origin"
    UNDECIDED = "undecided"


def default_t_max(p: DissipativeParams) -> float:
    return 200.0 / max(p.gamma, p.m - p.gamma)


@dataclass
class BasinResult:
    labels: list
    final_r: np.ndarray
    t_hit: np.ndarray
    max_radius: np.ndarray


def flow_to_attractor(r0, p: DissipativeParams, t_max=None, eps_fp=EPS_FP, tol=1e-10) -> BasinResult:
    """Integrate a batch (n, 3) until every member is within ``eps_fp`` of an attractor.

    Records the largest |r| seen at accepted steps, so the same run doubles as
    a positivity check.
    """
    r0 = np.atleast_2d(as_bloch(r0))
    n = r0.shape[0]
    t_max = default_t_max(p) if t_max is None else t_max
    targets, names = [], []
    if p.m > p.gamma and p.g > 0:
        fps = fixed_points(p)
        targets += [fps.plus.r, fps.minus.r]
        names += [Basin.PLUS, Basin.MINUS]
    elif p.m < p.gamma:
        targets.append(np.zeros(3))
        names.append(Basin.ORIGIN)
    targets = np.array(targets)

    labels = [Basin.UNDECIDED] * n
    final = r0.copy()
    t_hit = np.full(n, np.nan)
    r_norm0 = np.linalg.norm(r0, axis=1)
    if p.m > p.gamma:
        # the saddle at the origin only holds states that start exactly on it
        for i in np.flatnonzero(r_norm0 < 1e-14):
            labels[i] = Basin.ORIGIN
            t_hit[i] = 0.0
    max_r = r_norm0.copy()
    open_ = np.array([lab is Basin.UNDECIDED for lab in labels])
    if not open_.any() or len(targets) == 0:
        return BasinResult(labels, final, t_hit, max_r)

    idx = np.flatnonzero(open_)
    stepper = DormandPrince(lambda t, y: dissipative_rhs(y, p), r0[idx], rtol=tol, atol=tol * 1e-2)
    while idx.size and stepper.t < t_max:
        stepper.step(t_max)
        y = stepper.y
        max_r[idx] = np.maximum(max_r[idx], np.linalg.norm(y, axis=1))
        dist = np.linalg.norm(y[:, None, :] - targets[None, :, :], axis=2)
        hit = dist.min(axis=1) <= eps_fp
        for j in np.flatnonzero(hit):
            i = idx[j]
            labels[i] = names[int(np.argmin(dist[j]))]
            final[i] = y[j]
            t_hit[i] = stepper.t
        if hit.any():
            keep = ~hit
            idx = idx[keep]
            # restart on the survivors; accepted-step bookkeeping stays valid
            t_now = stepper.t
            h = stepper.h
            if idx.size:
                stepper = DormandPrince(lambda t, y: dissipative_rhs(y, p), y[keep], t0=t_now,
                                        rtol=tol, atol=tol * 1e-2, h0=h)
    for j, i in enumerate(idx):
        final[i] = stepper.y[j]
    return BasinResult(labels, final, t_hit, max_r)


def classify_basin(r0, p: DissipativeParams, t_max=None, eps_fp=EPS_FP) -> Basin:
    return flow_to_attractor(r0, p, t_max, eps_fp).labels[0]


def autonomous_discriminate(r_in, p: DissipativeParams, t_max=None, eps_fp=EPS_FP):
    """Flow ``r_in`` to r_plus or r_minus; returns (label, final Bloch vector)."""
    if not p.m > p.gamma:
        raise ValueError("autonomous discrimination needs m > gamma")
    if p.g < p.g_min:
        raise ValueError(f"g = {p.g} is below g_min = {p.g_min}; fixed points leave the ball")
    res = flow_to_attractor(r_in, p, t_max, eps_fp)
    label = res.labels[0]
    if label is Basin.UNDECIDED:
        raise RuntimeError("no attractor reached within the time budget")
    return label, res.final_r[0]


def integrate(r0, p: DissipativeParams, t_end=None, tol=1e-10, t_eval=None, n_samples=201) -> Trajectory:
    """Sampled trajectory; the E column is the torsion energy (g/2) z^2."""
    check_tol(tol)
    r0 = as_bloch(r0)
    ts = np.linspace(0.0, t_end, n_samples) if t_eval is None else np.asarray(t_eval, dtype=float)
    sol = solve(lambda t, y: dissipative_rhs(y, p), r0, ts, rtol=tol, atol=tol)
    return Trajectory.from_samples(ts, sol.y, lambda v: 0.5 * p.g * v[..., 2] ** 2)


def positivity_sweep(r0, p: DissipativeParams, t_end, tol=1e-10) -> np.ndarray:
    """Largest |r(t)| over accepted steps on [0, t_end] for each initial state."""
    r0 = np.atleast_2d(as_bloch(r0))
    stepper = DormandPrince(lambda t, y: dissipative_rhs(y, p), r0, rtol=tol, atol=tol)
    max_r = np.linalg.norm(r0, axis=1)
    while stepper.t < t_end:
        stepper.step(t_end)
        max_r = np.maximum(max_r, np.linalg.norm(stepper.y, axis=1))
    return max_r

