"""Direct integration of the 1-D Hamiltonian flow.

Orbits are integrated in double precision with kick-drift-kick leapfrog,
which is symplectic and second order for the separable
``H = y**2/2 + f(x)**2/2``.  These runs are an empirical check on the
action series (``T(c) = dA/dc``), so float accuracy is plenty.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from .oned import OneDSystem, critical_points
from .scalar import isolate_monotone_root, to_real, working_digits


class BandExit(ArithmeticError):
    """A leapfrog step would cross a pole; carries the trajectory so far."""

    def __init__(self, message, trajectory):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class OrbitState:
    x: float
    y: float
    t: float


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    energy: np.ndarray

    @property
    def final(self) -> OrbitState:
        return OrbitState(float(self.x[-1]), float(self.y[-1]), float(self.t[-1]))

    def relative_energy_drift(self) -> float:
        e0 = self.energy[0]
        scale = abs(e0) if e0 != 0 else 1.0
        return float(np.max(np.abs(self.energy - e0)) / scale)


def hamiltonian_1d(sys: OneDSystem, x, y):
    if any(x == a for a in sys.poles):
        raise ValueError(f"x = {x} sits on a pole")
    return y * y / 2 + sys.f(x) ** 2 / 2


def _float_system(sys: OneDSystem):
    poles = [float(a) for a in sys.poles]
    weights = [float(l) for l in sys.weights]

    def f(x):
        acc = x
        for a, lam in zip(poles, weights):
            acc -= lam / (x - a)
        return acc

    def df(x):
        acc = 1.0
        for a, lam in zip(poles, weights):
            acc += lam / (x - a) ** 2
        return acc

    return poles, f, df


def _band_of(poles, x):
    lo, hi = -np.inf, np.inf
    for a in poles:
        if a < x:
            lo = a
        elif a > x:
            hi = a
            break
        else:
            raise ValueError(f"x = {x} sits on a pole")
    return lo, hi


def integrate_orbit(sys: OneDSystem, x0, y0, dt: float, steps: int) -> Trajectory:
    """Leapfrog with force ``-f(x) f'(x)``; stops with :class:`BandExit` before crossing a pole."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    poles, f, df = _float_system(sys)
    x, y = float(x0), float(y0)
    lo, hi = _band_of(poles, x)
    xs = np.empty(steps + 1)
    ys = np.empty(steps + 1)
    xs[0], ys[0] = x, y
    half = dt / 2
    fx = f(x)
    force = -fx * df(x)
    for n in range(1, steps + 1):
        yh = y + half * force
        xn = x + dt * yh
        if not lo < xn < hi:
            traj = _finish(xs[:n], ys[:n], dt, f)
            raise BandExit(f"step {n} would leave the band ({lo}, {hi})", traj)
        x = xn
        fx = f(x)
        force = -fx * df(x)
        y = yh + half * force
        xs[n], ys[n] = x, y
    return _finish(xs, ys, dt, f)


def _finish(xs, ys, dt, f) -> Trajectory:
    fx = np.array([f(x) for x in xs])
    energy = 0.5 * ys**2 + 0.5 * fx**2
    return Trajectory(np.arange(len(xs)) * dt, xs.copy(), ys.copy(), energy)


def measure_period(traj: Trajectory) -> float:
    """Mean spacing of upward zero crossings of ``y``, linearly interpolated."""
    y, t = traj.y, traj.t
    idx = np.nonzero((y[:-1] < 0) & (y[1:] >= 0))[0]
    if len(idx) < 3:
        raise ValueError(f"need at least 2 full cycles, found {max(len(idx) - 1, 0)}")
    y0, y1 = y[idx], y[idx + 1]
    crossings = t[idx] + (t[idx + 1] - t[idx]) * (-y0) / (y1 - y0)
    return float((crossings[-1] - crossings[0]) / (len(crossings) - 1))


def orbit_start(sys: OneDSystem, k: int, c, digits: int = 30) -> tuple[float, float]:
    """Turning point ``(x, 0)`` of the energy-c orbit in band k, on the side ``f(x) > 0``."""
    cp = critical_points(sys, digits)[k]
    with working_digits(digits):
        target = mpmath.sqrt(2 * to_real(c))
        real = OneDSystem(tuple(to_real(a) for a in sys.poles), tuple(to_real(l) for l in sys.weights))
        x = isolate_monotone_root(lambda s: real.f(s) - target, cp.location, cp.band[1], digits)
        return float(x), 0.0
