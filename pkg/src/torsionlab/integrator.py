"""Adaptive Dormand-Prince 5(4) integrator with PI step control and dense output.

The state may be any float array; batches of independent trajectories are
integrated with a shared step size (the error norm is the max over all
components), which is what makes ensemble sweeps cheap.
"""

from dataclasses import dataclass, field

import numpy as np

C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# difference between the 5th and embedded 4th order weights (7 stages, FSAL)
E = np.array([-71 / 57600, 0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# continuous extension: y(t0 + s h) = y0 + h * K^T P [s, s^2, s^3, s^4]
P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
BETA = 0.04
ALPHA = 0.2 - 0.75 * BETA


class StepSizeUnderflow(RuntimeError):
    """Raised when the step size collapses below floating-point resolution."""

    def __init__(self, t):
        super().__init__(f"step size underflow at t = {t!r}")
        self.t = t


class DormandPrince:
    """Single-trajectory (or shared-step batch) stepper.

    ``rhs(t, y)`` must return an array shaped like ``y``.  After each call to
    :meth:`step`, :meth:`dense` interpolates anywhere in ``[t_old, t]``.
    """

    def __init__(self, rhs, y0, t0=0.0, rtol=1e-10, atol=1e-10, h0=None, max_step=np.inf):
        self.rhs = rhs
        self.t = float(t0)
        self.y = np.array(y0, dtype=float)
        self.rtol = rtol
        self.atol = atol
        self.max_step = max_step
        self.f = np.asarray(rhs(self.t, self.y), dtype=float)
        self.nfev = 1
        self.nsteps = 0
        self.nrejected = 0
        self.h = h0 if h0 is not None else self._initial_step()
        self._err_old = 1e-4
        self.t_old = self.t
        self.y_old = self.y
        self._K = None

    def _norm(self, e, y0, y1):
        scale = self.atol + self.rtol * np.maximum(np.abs(y0), np.abs(y1))
        return float(np.max(np.abs(e) / scale)) if e.size else 0.0

    def _initial_step(self):
        scale = self.atol + self.rtol * np.abs(self.y)
        d0 = np.max(np.abs(self.y) / scale)
        d1 = np.max(np.abs(self.f) / scale)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        y1 = self.y + h0 * self.f
        f1 = self.rhs(self.t + h0, y1)
        self.nfev += 1
        d2 = np.max(np.abs(f1 - self.f) / scale) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1 / 5)
        return min(100 * h0, h1, self.max_step)

    def _attempt(self, h):
        K = np.empty((7,) + self.y.shape)
        K[0] = self.f
        for s in range(1, 6):
            dy = sum(a * K[j] for j, a in enumerate(A[s]) if a != 0)
            K[s] = self.rhs(self.t + C[s] * h, self.y + h * dy)
        y_new = self.y + h * np.tensordot(B, K[:6], axes=1)
        K[6] = self.rhs(self.t + h, y_new)
        self.nfev += 6
        err = h * np.tensordot(E, K, axes=1)
        return y_new, K, self._norm(err, self.y, y_new)

    def step(self, t_bound=np.inf):
        """Take one accepted step, never passing ``t_bound``."""
        span = t_bound - self.t
        if span <= 0:
            raise ValueError("integration already reached t_bound")
        h = min(self.h, self.max_step, span)
        rejected = False
        while True:
            if h < 16 * np.spacing(max(abs(self.t), 1.0)):
                raise StepSizeUnderflow(self.t)
            y_new, K, err = self._attempt(h)
            if err <= 1.0:
                break
            self.nrejected += 1
            rejected = True
            fac = err ** ALPHA
            h = h / min(1 / MIN_FACTOR, fac / SAFETY)
        # PI controller for the next step
        if err == 0.0:
            factor = MAX_FACTOR
        else:
            factor = SAFETY * err ** -ALPHA * self._err_old ** BETA
            factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
        if rejected:
            factor = min(1.0, factor)
        self._err_old = max(err, 1e-4)
        self.t_old, self.y_old, self._K = self.t, self.y, K
        self.t = t_bound if h == span else self.t + h
        self.y = y_new
        self.f = K[6]
        self.h = h * factor
        self.nsteps += 1
        return self.t

    def dense(self, t):
        """Fourth-order continuous extension over the last accepted step."""
        h = self.t - self.t_old
        if h == 0:
            return self.y.copy()
        s = (t - self.t_old) / h
        Q = P @ np.array([s, s**2, s**3, s**4])
        return self.y_old + h * np.tensordot(Q, self._K, axes=1)


@dataclass
class OdeSolution:
    t: np.ndarray
    y: np.ndarray
    nfev: int = 0
    nsteps: int = 0
    nrejected: int = 0
    extras: dict = field(default_factory=dict)


def solve(rhs, y0, t_eval, rtol=1e-10, atol=1e-10, max_step=np.inf) -> OdeSolution:
    """Integrate ``dy/dt = rhs(t, y)`` from ``t_eval[0]`` and sample at ``t_eval``.

    ``t_eval`` must be strictly increasing; the first entry is the initial time
    and the returned first sample is ``y0`` itself.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.ndim != 1 or t_eval.size == 0:
        raise ValueError("t_eval must be a non-empty 1-D array")
    if np.any(np.diff(t_eval) <= 0):
        raise ValueError("t_eval must be strictly increasing")
    stepper = DormandPrince(rhs, y0, t0=t_eval[0], rtol=rtol, atol=atol, max_step=max_step)
    out = np.empty((t_eval.size,) + stepper.y.shape)
    out[0] = stepper.y
    i = 1
    t_end = t_eval[-1]
    while i < t_eval.size:
        stepper.step(t_bound=t_end)
        while i < t_eval.size and t_eval[i] <= stepper.t:
            out[i] = stepper.y if t_eval[i] == stepper.t else stepper.dense(t_eval[i])
            i += 1
    return OdeSolution(t_eval, out, stepper.nfev, stepper.nsteps, stepper.nrejected)
