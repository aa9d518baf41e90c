"""Torsion Bloch dynamics and the Viviani-curve discrimination gate.

The flow is

    dx/dt = -2 g y z
    dy/dt =  2 g x z - 2 B_x z
    dz/dt =  2 B_x y

which conserves E = B_x x + (g/2) z^2 and |r|^2.  With B_x = g/2 the orbit
through (1, 0, 0) is the Viviani curve (cos^2 xi, cos xi sin xi, sin xi).
"""

from dataclasses import dataclass

import numpy as np

from .core import as_bloch
from .integrator import solve

AMBIGUOUS_Z = 1e-6
GATE_TOL = 1e-3
MAX_GATE_THETA = np.pi / 4


class AmbiguousVerdict(ValueError):
    """The final z coordinate is too close to zero to call a bit."""


@dataclass(frozen=True)
class TorsionParams:
    g: float
    bx: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.g) and np.isfinite(self.bx)):
            raise ValueError("torsion parameters must be finite")

    @property
    def viviani(self) -> bool:
        return bool(np.isclose(self.bx, self.g / 2, rtol=1e-12, atol=0.0))


def torsion_rhs(r, p: TorsionParams) -> np.ndarray:
    """Time derivative of the Bloch vector; accepts a (..., 3) batch."""
    r = np.asarray(r, dtype=float)
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    out = np.empty_like(r)
    out[..., 0] = -2 * p.g * y * z
    out[..., 1] = 2 * p.g * x * z - 2 * p.bx * z
    out[..., 2] = 2 * p.bx * y
    return out


def energy(r, p: TorsionParams):
    r = np.asarray(r, dtype=float)
    return p.bx * r[..., 0] + 0.5 * p.g * r[..., 2] ** 2


@dataclass
class Trajectory:
    t: np.ndarray
    r: np.ndarray
    energy: np.ndarray
    r2: np.ndarray

    @classmethod
    def from_samples(cls, t, r, energy_fn):
        r = np.asarray(r, dtype=float)
        return cls(np.asarray(t, dtype=float), r, energy_fn(r), np.einsum("...i,...i->...", r, r))

    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.r2 - self.r2[0])))

    def rows(self):
        for i in range(self.t.size):
            yield (self.t[i], *self.r[i], self.energy[i], self.r2[i])

    def to_csv(self, fh):
        from ._io import write_csv

        write_csv(fh, ["t", "x", "y", "z", "E", "r2"], self.rows())


def _sample_times(t_end, t_eval, n_samples):
    if t_eval is None:
        if not t_end > 0:
            raise ValueError("t_end must be positive")
        return np.linspace(0.0, t_end, n_samples)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval[0] != 0.0:
        t_eval = np.concatenate([[0.0], t_eval])
    return t_eval


def check_tol(tol):
    if not 1e-13 <= tol <= 1e-6:
        raise ValueError(f"tol must lie in [1e-13, 1e-6], got {tol}")


def integrate(r0, p: TorsionParams, t_end=None, tol=1e-10, t_eval=None, n_samples=201) -> Trajectory:
    """Integrate the torsion flow from ``r0`` and sample it.

    Either ``t_end`` (uniform grid of ``n_samples`` points) or an increasing
    ``t_eval`` is used; t = 0 is always the first sample.  ``r0`` may be a
    batch of shape (n, 3), integrated with a shared step.
    """
    check_tol(tol)
    r0 = as_bloch(r0)
    ts = _sample_times(t_end, t_eval, n_samples)
    sol = solve(lambda t, y: torsion_rhs(y, p), r0, ts, rtol=tol, atol=tol)
    r = np.moveaxis(sol.y, 0, -2) if r0.ndim > 1 else sol.y
    return Trajectory.from_samples(ts, r, lambda v: energy(v, p))


@dataclass(frozen=True)
class VivianiInputs:
    theta: float
    r_a: np.ndarray
    r_b: np.ndarray


def viviani_inputs(theta) -> VivianiInputs:
    """Place the candidate pair symmetrically about (1, 0, 0) on the curve."""
    if not 0.0 < theta <= np.pi:
        raise ValueError(f"theta_ab must lie in (0, pi], got {theta}")
    x = abs(np.cos(theta / 2))
    s = np.sin(theta / 2) / np.sqrt(2)
    return VivianiInputs(float(theta), np.array([x, s, s]), np.array([x, -s, -s]))


def viviani_xi(xi0, bx, t):
    """Curve parameter xi(t) = 2 arctan(tan(xi0/2) exp(2 B_x t))."""
    return 2 * np.arctan(np.tan(np.asarray(xi0) / 2) * np.exp(2 * bx * np.asarray(t)))


def viviani_point(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    c, s = np.cos(xi), np.sin(xi)
    return np.stack([c * c, c * s, s], axis=-1)


def viviani_time(theta, g) -> float:
    """Gate time t_V = ln(cot(theta / (4 sqrt 2))) / g."""
    if not g > 0:
        raise ValueError(f"g must be positive, got {g}")
    if not theta > 0:
        raise ValueError(f"theta_ab must be positive, got {theta}")
    arg = theta / (4 * np.sqrt(2))
    if arg >= np.pi / 4:
        raise ValueError(f"theta_ab = {theta} gives a non-positive gate time")
    return float(np.log(1.0 / np.tan(arg)) / g)


@dataclass(frozen=True)
class GateResult:
    bit: int
    t_v: float
    final_r: np.ndarray
    pole_distance: float


def run_viviani_gate(r_in, theta, g, tol=1e-10) -> tuple[float, np.ndarray]:
    """Evolve ``r_in`` with B_x = g/2 for t_V; return (t_V, final r)."""
    t_v = viviani_time(theta, g)
    traj = integrate(r_in, TorsionParams(g, g / 2), t_eval=[0.0, t_v], tol=tol)
    return t_v, traj.r[-1]


def discriminate_viviani(r_in, theta, g, tol=1e-10, max_theta=MAX_GATE_THETA) -> GateResult:
    """Single-shot gate: bit 0 if the state ends in the upper hemisphere, 1 if lower.

    Above pi/4 the pair no longer sits on the curve, so the state stops short
    of the pole; callers that only need the sign may raise ``max_theta``.
    """
    if not 0.0 < theta <= max_theta:
        raise ValueError(f"gate needs 0 < theta_ab <= {max_theta:.6g}, got {theta}")
    r_in = as_bloch(r_in)
    t_v, r = run_viviani_gate(r_in, theta, g, tol)
    z = r[2]
    if abs(z) < AMBIGUOUS_Z:
        raise AmbiguousVerdict(f"final z = {z:.3e} is on the separatrix")
    bit = 0 if z > 0 else 1
    pole = np.array([0.0, 0.0, 1.0 if bit == 0 else -1.0])
    return GateResult(bit, t_v, r, float(np.linalg.norm(r - pole)))
