"""Linear qubit master equations, Kraus channels and trace-distance monotonicity."""

from dataclasses import dataclass, field

import numpy as np

from .core import (IDENTITY, PAULI, _check_hermitian, bloch_from_density, density_from_bloch,
                   make_rng, random_bloch_ball, trace_distance)
from .dissipative import generator_from_master, l_plus
from .torsion import TorsionParams, integrate

TP_TOL = 1e-10
MONO_SLACK = 1e-12


@dataclass(frozen=True)
class MasterEquation:
    H: np.ndarray
    jumps: tuple = field(default_factory=tuple)

    def __post_init__(self):
        H = _check_hermitian(self.H)
        if H.shape != (2, 2):
            raise ValueError("Hamiltonian must be 2x2")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "jumps", tuple(self.jumps))

    @property
    def l_plus(self) -> np.ndarray:
        return l_plus(self.jumps)

    def generator(self):
        return generator_from_master(self.H, self.jumps)


def master_rhs(rho, me: MasterEquation) -> np.ndarray:
    """-i[H, rho] + sum zeta B rho B^dagger + {L_+, rho}."""
    rho = np.asarray(rho, dtype=complex)
    out = -1j * (me.H @ rho - rho @ me.H)
    for j in me.jumps:
        out += j.zeta * (j.B @ rho @ j.B.conj().T)
    L = me.l_plus
    out += L @ rho + rho @ L
    return out


@dataclass(frozen=True)
class KrausChannel:
    kraus: tuple

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise ValueError("a channel needs at least one Kraus operator")
        if any(k.shape != (2, 2) for k in ks):
            raise ValueError("Kraus operators must be 2x2")
        object.__setattr__(self, "kraus", ks)

    def tp_defect(self) -> float:
        s = sum(k.conj().T @ k for k in self.kraus)
        return float(np.max(np.abs(s - IDENTITY)))


def apply_kraus(ch: KrausChannel, rho) -> np.ndarray:
    if ch.tp_defect() > TP_TOL:
        raise ValueError(f"channel is not trace preserving (defect {ch.tp_defect():.2e})")
    rho = np.asarray(rho, dtype=complex)
    return sum(k @ rho @ k.conj().T for k in ch.kraus)


def random_cptp(seed, n_kraus=2) -> KrausChannel:
    """Random channel from a Haar isometry C^2 -> C^(2 n_kraus), cut into blocks."""
    if not 1 <= n_kraus <= 8:
        raise ValueError(f"n_kraus must lie in [1, 8], got {n_kraus}")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    d = 2 * n_kraus
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    # fix the phases so q is Haar distributed
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    iso = q[:, :2]
    return KrausChannel(tuple(iso[2 * i:2 * i + 2] for i in range(n_kraus)))


def depolarizing(p) -> KrausChannel:
    """rho -> (1 - p) rho + p I/2; Bloch vectors shrink by (1 - p)."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    ks = [np.sqrt(1 - 3 * p / 4) * IDENTITY] + [np.sqrt(p / 4) * s for s in PAULI]
    return KrausChannel(tuple(ks))


def unitary_channel(U) -> KrausChannel:
    return KrausChannel((np.asarray(U, dtype=complex),))


@dataclass(frozen=True)
class MonotonicityResult:
    d_before: float
    d_after: float

    @property
    def ok(self) -> bool:
        return self.d_after <= self.d_before + MONO_SLACK

    @property
    def excess(self) -> float:
        return self.d_after - self.d_before


def check_monotonicity(ch: KrausChannel, rho_a, rho_b) -> MonotonicityResult:
    d0 = trace_distance(rho_a, rho_b)
    d1 = trace_distance(apply_kraus(ch, rho_a), apply_kraus(ch, rho_b))
    return MonotonicityResult(d0, d1)


@dataclass
class MonotonicitySweep:
    trials: int
    violations: int
    max_excess: float

    def to_dict(self):
        return {"trials": self.trials, "violations": self.violations, "max_excess": self.max_excess}


def monotonicity_sweep(trials, seed=42) -> MonotonicitySweep:
    """Random (channel, state pair) triples; counts violations of contraction."""
    rng = make_rng(seed)
    violations, worst = 0, -np.inf
    for _ in range(trials):
        ch = random_cptp(rng, int(rng.integers(1, 9)))
        ra, rb = random_bloch_ball(rng, 2)
        res = check_monotonicity(ch, density_from_bloch(ra), density_from_bloch(rb))
        violations += not res.ok
        worst = max(worst, res.excess)
    return MonotonicitySweep(trials, violations, float(worst))


def expansivity_witness(p: TorsionParams, rho_a, rho_b, t, tol=1e-10):
    """Trace distances (d(0), d(t)) under the nonlinear torsion flow.

    The flow acts on Bloch vectors, so each state is evolved on its own.
    """
    ra, rb = bloch_from_density(rho_a), bloch_from_density(rho_b)
    traj = integrate(np.stack([ra, rb]), p, t_eval=[0.0, t], tol=tol)
    fa, fb = traj.r[0, -1], traj.r[1, -1]
    return trace_distance(rho_a, rho_b), trace_distance(density_from_bloch(fa), density_from_bloch(fb))


def distance_profile(p: TorsionParams, ra, rb, ts, tol=1e-10) -> np.ndarray:
    """|r_a(t) - r_b(t)| (the trace distance for qubits) on a time grid."""
    traj = integrate(np.stack([ra, rb]), p, t_eval=ts, tol=tol)
    return np.linalg.norm(traj.r[0] - traj.r[1], axis=-1)

