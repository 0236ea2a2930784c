"""The four infinitely divisible families indexed by (m, gamma, sigma).

One Levy triple generates all four laws: Boolean (exact atomic measure),
free (Newton inversion of w + phi(w) = z), classical (characteristic
function, FFT density on request), and monotone (the time-one map of the
ODE flow dF/dt = Phi(F) with Phi(z) = -gamma - log(m) z + integral of
(1+xz)/(x-z) dsigma).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import FlowError, ValidationError
from .measures import PARAMETER, FiniteAtomicMeasure
from .solvers import newton, upper_half_plane_guard
from .transforms import NevanlinnaData, TransformGrid, ZR, recover_measure

#: default RK4 step for flow integration
FLOW_STEP = 1e-3


@dataclass(frozen=True)
class LevyTriple:
    """(m, gamma, sigma) with m in (0, 1], sigma a parameter measure."""

    m: float
    gamma: float
    sigma: FiniteAtomicMeasure

    def __post_init__(self):
        if not (0.0 < self.m <= 1.0 + 1e-12):
            raise ValidationError(f"m={self.m} outside (0, 1]")
        if self.sigma.role != PARAMETER:
            object.__setattr__(self, "sigma", self.sigma.with_role(PARAMETER))

    @classmethod
    def from_parts(cls, m, gamma, sigma_pairs):
        return cls(float(m), float(gamma),
                   FiniteAtomicMeasure.from_pairs(sigma_pairs, role=PARAMETER))


def phi_eval(triple, z):
    """Phi(z) = -gamma - log(m) z + sum s (1+pz)/(p-z)."""
    acc = -triple.gamma - math.log(triple.m) * z
    for p, s in triple.sigma.atoms:
        acc = acc + s * (1.0 + p * z) / (p - z)
    return acc


def phi_deriv(triple, z):
    acc = complex(-math.log(triple.m))
    for p, s in triple.sigma.atoms:
        acc = acc + s * (1.0 + p * p) / (p - z) ** 2
    return acc


def boolean_idiv(triple):
    """The Boolean law of the triple: exact atomic measure of mass m."""
    nev = NevanlinnaData(triple.m, triple.gamma, triple.sigma)
    return recover_measure(nev.to_rational())


def free_idiv_eval(triple, z, tol=1e-12):
    """F of the free law at z: solve w + phi(w) = z by Newton from w = z."""
    if abs(triple.m - 1.0) > 1e-12:
        raise ValidationError("the free family needs m = 1")

    def voiculescu(w):
        acc = complex(triple.gamma)
        for p, s in triple.sigma.atoms:
            acc = acc + s * (1.0 + p * w) / (w - p)
        return acc

    def dvoiculescu(w):
        acc = 0.0j
        for p, s in triple.sigma.atoms:
            acc = acc - s * (1.0 + p * p) / (w - p) ** 2
        return acc

    def fun(w):
        return w + voiculescu(w) - z

    def dfun(w):
        return 1.0 + dvoiculescu(w)

    return newton(fun, dfun, z, tol=tol, guard=upper_half_plane_guard,
                  label="free_idiv")


def free_idiv(triple, points=ZR):
    return TransformGrid.sample(lambda z: free_idiv_eval(triple, z), points, "F", mass=1.0)


def _cf_integrand(t, x):
    # (e^{itx} - 1 - itx/(1+x^2)) (x^2+1)/x^2, continuously extended by
    # -t^2/2 at x = 0
    if x == 0.0:
        return -0.5 * t * t
    return (cmath.exp(1j * t * x) - 1.0 - 1j * t * x / (1.0 + x * x)) * (x * x + 1.0) / (x * x)


def classical_idiv_cf(triple):
    """Characteristic-function evaluator of the classical law (m = 1)."""
    if abs(triple.m - 1.0) > 1e-12:
        raise ValidationError("the classical family needs m = 1")
    atoms = triple.sigma.atoms
    gamma = triple.gamma

    def cf(t):
        acc = 1j * gamma * t
        for x, s in atoms:
            acc = acc + s * _cf_integrand(t, x)
        return cmath.exp(acc)

    return cf


def classical_idiv_density(triple, t_max=64.0, n_samples=2**14):
    """Density grid by FFT inversion of the characteristic function."""
    cf = classical_idiv_cf(triple)
    n = int(n_samples)
    dt = 2.0 * t_max / n
    ts = -t_max + dt * np.arange(n)
    vals = np.array([cf(t) for t in ts])
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    spec = np.fft.fft(vals * signs)
    dens = (dt / (2.0 * math.pi)) * (signs * spec).real
    dx = 2.0 * math.pi / (n * dt)
    xs = -math.pi / dt + dx * np.arange(n)
    return xs, dens


def _pole_distance(triple, w):
    if triple.sigma.is_zero:
        return math.inf
    return min(abs(w - p) for p in triple.sigma.positions)


def _rk4_leg(triple, w, t_from, t_to, step, im0, label):
    """Integrate dF/dt = Phi(F) from t_from to t_to.

    Fixed RK4 step, with a deterministic sub-step cap keeping each move well
    inside the distance to Phi's real poles (only relevant when starting
    near the real axis, e.g. on a density grid).
    """
    t = t_from
    log_m = math.log(triple.m)
    while t < t_to - 1e-15:
        speed = abs(phi_eval(triple, w))
        h = min(step, t_to - t)
        if speed > 0.0:
            h = min(h,
                    0.2 * _pole_distance(triple, w) / speed,
                    0.1 * max(1.0, abs(w)) / speed)
        k1 = phi_eval(triple, w)
        k2 = phi_eval(triple, w + 0.5 * h * k1)
        k3 = phi_eval(triple, w + 0.5 * h * k2)
        k4 = phi_eval(triple, w + h * k3)
        w = w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        floor = math.exp(-log_m * t) * im0
        if w.imag < floor * (1.0 - 1e-7) - 1e-12:
            raise FlowError(
                f"{label}: Im F fell below m^-t Im z at t={t:.6f} (z0 im {im0})"
            )
    return w


def flow_map(triple, t_end, z, step=FLOW_STEP):
    """F_t(z) by RK4 from F_0 = z."""
    z = complex(z)
    if z.imag <= 0:
        raise ValidationError("flow starts in the open upper half-plane")
    if t_end < 0:
        raise ValidationError("backward flows are not supported")
    if t_end == 0:
        return z
    return _rk4_leg(triple, z, 0.0, float(t_end), step, z.imag, "flow")


@dataclass(frozen=True)
class FlowResult:
    """Snapshots of the flow at t = 0, t_end/2, t_end on a fixed grid."""

    times: tuple
    grids: tuple  # TransformGrid per time, kind F
    step_size: float


def monotone_idiv_flow(triple, t_end=1.0, step=FLOW_STEP, points=ZR):
    """Integrate the generator flow; the time-one grid is the monotone law."""
    if step > 1e-2:
        raise ValidationError("flow step must be <= 1e-2")
    if t_end < 0:
        raise ValidationError("backward flows are not supported")
    times = (0.0, 0.5 * t_end, float(t_end))
    snapshots = [[], [], []]
    for z in points:
        z = complex(z)
        half = _rk4_leg(triple, z, 0.0, times[1], step, z.imag, "flow")
        full = _rk4_leg(triple, half, times[1], times[2], step, z.imag, "flow")
        snapshots[0].append(z)
        snapshots[1].append(half)
        snapshots[2].append(full)
    grids = tuple(
        TransformGrid(tuple(points), tuple(vals), "F", mass=triple.m**t)
        for t, vals in zip(times, snapshots)
    )
    return FlowResult(times, grids, float(step))


def semigroup_defect(triple, t_end=1.0, step=FLOW_STEP, points=ZR):
    """max |F_t(z) - F_{t/2}(F_{t/2}(z))| over the grid.

    The composed legs run at the stated step; the direct reference runs at
    step/2, so the defect is a real quantity (integrator-limited semigroup
    deviation) rather than a bit-identical replay.
    """
    worst = 0.0
    for z in points:
        z = complex(z)
        direct = _rk4_leg(triple, z, 0.0, t_end, 0.5 * step, z.imag, "flow")
        half = _rk4_leg(triple, z, 0.0, 0.5 * t_end, step, z.imag, "flow")
        comp = _rk4_leg(triple, half, 0.0, 0.5 * t_end, step, half.imag, "flow")
        worst = max(worst, abs(direct - comp))
    return worst


@dataclass(frozen=True)
class DistanceBound:
    epsilon: float
    m1: float
    bound: float
    observed: float


def flow_distance_bound(t1, t2, points=ZR, step=FLOW_STEP):
    """Perturbation bound for two generator flows over the unit time interval.

    epsilon = max |Phi_1 - Phi_2| over the enclosing compact C (all RK4
    states of both flows started from the grid); m1 = max |Phi_2'| over C;
    the observed time-one distance must stay within twice
    (e^{m1} - 1)/m1 * epsilon, else this raises.
    """
    states = []

    def run(triple, z):
        t, w = 0.0, complex(z)
        states.append(w)
        while t < 1.0 - 1e-15:
            h = min(step, 1.0 - t)
            k1 = phi_eval(triple, w)
            k2 = phi_eval(triple, w + 0.5 * h * k1)
            k3 = phi_eval(triple, w + 0.5 * h * k2)
            k4 = phi_eval(triple, w + h * k3)
            w = w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
            states.append(w)
            if not (abs(w) < 1e6 and w.imag > 0):
                raise FlowError("flow escaped the admissible region")
        return w

    end1 = [run(t1, z) for z in points]
    end2 = [run(t2, z) for z in points]
    eps = max(abs(phi_eval(t1, w) - phi_eval(t2, w)) for w in states)
    m1 = max(abs(phi_deriv(t2, w)) for w in states)
    factor = (math.expm1(m1) / m1) if m1 > 1e-12 else 1.0
    bound = factor * eps
    observed = max(abs(a - b) for a, b in zip(end1, end2))
    if observed > 2.0 * bound + 1e-15:
        raise FlowError(
            f"observed flow distance {observed} exceeds twice the bound {bound}"
        )
    return DistanceBound(float(eps), float(m1), float(bound), float(observed))
