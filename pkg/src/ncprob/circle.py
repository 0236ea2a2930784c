"""Multiplicative transforms on the unit circle and the disk flow.

psi and eta live on the unit disk; the three convolutions are defined
through them (Sigma multiplies, eta/z multiplies, eta composes).  Weak
convergence on the circle is decided by the maximum eta-difference over a
fixed sixteen-point grid inside the disk of radius 0.4: uniform convergence
of eta on compacts of the disk is equivalent to weak convergence of the
measures.

Monotone convolution semigroups on the circle solve d eta/dt = A(eta) with
A(z) = z(i beta - integral (1+zeta z)/(1-zeta z) dsigma); the k_n-th roots
sampled from such a flow are the arrays whose powers the rotation-correction
machinery repairs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ConvergenceError, FlowError, ValidationError, ZeroMeanError
from .measures import PARAMETER, CircleMeasure
from .solvers import disk_guard, newton

#: evaluation grid: two rings of eight points, radii 0.4 and 0.2
DISK_GRID = tuple(
    r * cmath.exp(2j * math.pi * j / 8.0) for r in (0.4, 0.2) for j in range(8)
)

FLOW_STEP = 1e-3

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DiskGrid:
    """Sampled eta values on a fixed disk grid."""

    points: tuple
    values: tuple

    def __post_init__(self):
        if len(self.points) != len(self.values):
            raise ValidationError("points/values length mismatch")
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))

    @classmethod
    def sample(cls, fn, points=DISK_GRID):
        return cls(tuple(points), tuple(fn(z) for z in points))


def eta_distance(a, b):
    """max |eta_a - eta_b| over a shared grid."""
    pa, va = (a.points, a.values) if isinstance(a, DiskGrid) else (None, a)
    pb, vb = (b.points, b.values) if isinstance(b, DiskGrid) else (None, b)
    if pa is not None and pb is not None and pa != pb:
        raise ValidationError("eta grids sampled on different points")
    return max(abs(x - y) for x, y in zip(va, vb))


@dataclass(frozen=True)
class CircleGenerator:
    """(beta, sigma) indexing the disk flow field A(z) = z(i beta - integral...)."""

    beta: float
    sigma: CircleMeasure

    def __post_init__(self):
        if self.sigma.role != PARAMETER:
            object.__setattr__(
                self, "sigma",
                CircleMeasure(self.sigma.angles, self.sigma.weights, PARAMETER),
            )

    def a_eval(self, z):
        acc = 1j * self.beta
        for t, w in self.sigma.atoms:
            zeta = cmath.exp(1j * t)
            acc = acc - w * (1.0 + zeta * z) / (1.0 - zeta * z)
        return z * acc

    @property
    def mean_rate(self):
        """A'(0) = i beta - sigma(T): the exponential rate of the flow mean."""
        return 1j * self.beta - self.sigma.mass


def psi(mu, z):
    """psi(z) = integral of z zeta/(1 - z zeta) dmu."""
    if abs(z) >= 1.0:
        raise ValidationError("psi needs |z| < 1")
    return sum(w * z * zeta / (1.0 - z * zeta)
               for zeta, (t, w) in zip(mu.points, mu.atoms))


def eta(mu, z):
    """eta = psi/(1 + psi); |eta(z)| <= |z| on the disk."""
    p = psi(mu, z)
    if abs(1.0 + p) < 1e-300:
        raise ValidationError("1 + psi vanished (impossible for |z| < 1)")
    return p / (1.0 + p)


def eta_fn(mu):
    return lambda z: eta(mu, z)


def _eta_deriv_atomic(mu, z):
    p = psi(mu, z)
    dp = sum(w * zeta / (1.0 - z * zeta) ** 2
             for zeta, (t, w) in zip(mu.points, mu.atoms))
    return dp / (1.0 + p) ** 2


def _eta_with_deriv(obj):
    """(eta, eta') callables from a CircleMeasure or a plain eta callable."""
    if isinstance(obj, CircleMeasure):
        return eta_fn(obj), lambda z: _eta_deriv_atomic(obj, z)
    h = 1e-6

    def deriv(z):
        return (obj(z + h) - obj(z - h)) / (2.0 * h)

    return obj, deriv


def circle_mean(mu):
    """Integral of zeta dmu = eta'(0)."""
    return mu.mean


def sigma_transform(mu, z):
    """Sigma(z) = eta^{-1}(z)/z near zero; needs a non-zero mean."""
    mean = circle_mean(mu)
    if abs(mean) < 1e-14:
        raise ZeroMeanError("Sigma-transform needs a non-zero mean")
    if abs(z) > 0.2 * abs(mean):
        raise ValidationError("Sigma evaluated outside |z| <= 0.2 |mean|")
    if z == 0:
        return 1.0 / mean
    e, de = _eta_with_deriv(mu)
    u = newton(lambda w: e(w) - z, de, z / mean, tol=1e-13,
               guard=disk_guard(1.0), label="sigma_transform")
    return u / z


def mult_boolean(a, b, points=DISK_GRID):
    """eta(z)/z multiplies."""
    ea, _ = _eta_with_deriv(a)
    eb, _ = _eta_with_deriv(b)
    return DiskGrid.sample(lambda z: ea(z) * eb(z) / z, points)


def mult_monotone(a, b, points=DISK_GRID):
    """eta composes (left factor outside)."""
    ea, _ = _eta_with_deriv(a)
    eb, _ = _eta_with_deriv(b)
    return DiskGrid.sample(lambda z: ea(eb(z)), points)


def _invert_eta(e, de, target, w0):
    return newton(lambda w: e(w) - target, de, w0, tol=1e-13,
                  guard=disk_guard(1.0), label="eta inverse")


def mult_free(a, b, points=DISK_GRID, n_continuation=24):
    """Sigma multiplies: eta of the product by radial analytic continuation.

    Per grid point the relation eta^{-1}(w) = eta_a^{-1}(w) eta_b^{-1}(w)/w
    is inverted by Newton, walking the target radially out from zero with
    warm starts for the two inner inverses.
    """
    means = []
    for m in (a, b):
        if isinstance(m, CircleMeasure):
            mean = circle_mean(m)
            if abs(mean) < 1e-14:
                raise ZeroMeanError("multiplicative free convolution needs non-zero means")
            means.append(mean)
        else:
            means.append((m(1e-5) / 1e-5))
    ea, dea = _eta_with_deriv(a)
    eb, deb = _eta_with_deriv(b)

    def one_point(zeta):
        # q(w) = eta_a^{-1}(w) eta_b^{-1}(w) / w ~ w/(mean_a mean_b) near 0
        w = means[0] * means[1] * zeta / n_continuation
        ua = _invert_eta(ea, dea, w, w / means[0])
        ub = _invert_eta(eb, deb, w, w / means[1])
        for j in range(1, n_continuation + 1):
            target = zeta * j / n_continuation
            for _ in range(80):
                ua = _invert_eta(ea, dea, w, ua)
                ub = _invert_eta(eb, deb, w, ub)
                res = ua * ub / w - target
                if abs(res) <= 1e-12:
                    break
                dq = (ub / dea(ua) + ua / deb(ub)) / w - ua * ub / (w * w)
                w = w - res / dq
                if abs(w) >= 1.0:
                    raise ConvergenceError("free product inverse left the disk")
            else:
                raise ConvergenceError("free product continuation stalled")
        return w

    return DiskGrid.sample(one_point, points)


def _herglotz_sum(sigma, z):
    acc = 0.0j
    for t, w in sigma.atoms:
        zeta = cmath.exp(1j * t)
        acc = acc + w * (1.0 + zeta * z) / (1.0 - zeta * z)
    return acc


def boolean_idiv_eta(gamma, sigma):
    """eta(z) = gamma z exp(-integral (1+zeta z)/(1-zeta z) dsigma)."""
    gamma = complex(gamma)
    if abs(abs(gamma) - 1.0) > 1e-9:
        raise ValidationError("gamma must lie on the unit circle")
    return lambda z: gamma * z * cmath.exp(-_herglotz_sum(sigma, z))


def circle_boolean_idiv(gamma, sigma, points=DISK_GRID):
    return DiskGrid.sample(boolean_idiv_eta(gamma, sigma), points)


def circle_free_idiv(gamma, sigma, points=DISK_GRID, n_continuation=24):
    """eta of the free law: invert eta^{-1}(w) = w gamma exp(integral...)."""
    gamma = complex(gamma)
    if abs(abs(gamma) - 1.0) > 1e-9:
        raise ValidationError("gamma must lie on the unit circle")

    def inv(w):
        return w * gamma * cmath.exp(_herglotz_sum(sigma, w))

    def dinv(w):
        s = cmath.exp(_herglotz_sum(sigma, w))
        ds = s * sum(
            wt * 2.0 * cmath.exp(1j * t) / (1.0 - cmath.exp(1j * t) * w) ** 2
            for t, wt in sigma.atoms
        )
        return gamma * (s + w * ds)

    start_scale = cmath.exp(-_herglotz_sum(sigma, 0.0)) / gamma

    def one_point(zeta):
        w = start_scale * zeta / n_continuation
        for j in range(1, n_continuation + 1):
            target = zeta * j / n_continuation
            w = newton(lambda v: inv(v) - target, dinv, w, tol=1e-13,
                       guard=disk_guard(1.0), label="circle free idiv")
        return w

    return DiskGrid.sample(one_point, points)


def _fourier_integrand(p, angle):
    zeta = cmath.exp(1j * angle)
    denom = 1.0 - zeta.real
    if denom < 1e-12:
        return complex(-p * p)
    return (zeta**p - 1.0 - 1j * p * zeta.imag) / denom


def circle_classical_idiv_fourier(gamma, sigma, p):
    """Fourier coefficient gamma^p exp(integral (zeta^p - 1 - ip Im zeta)/(1 - Re zeta))."""
    gamma = complex(gamma)
    if abs(abs(gamma) - 1.0) > 1e-9:
        raise ValidationError("gamma must lie on the unit circle")
    p = int(p)
    if any(1.0 - math.cos(t) < 1e-12 for t in sigma.angles):
        # extension value -p^2 must agree with continuation just off zeta = 1
        probe = _fourier_integrand(p, 1e-4)
        if abs(probe - (-p * p)) > 1e-6 * max(1.0, float(p * p)):
            raise ValidationError(
                "integrand extension at zeta = 1 disagrees with continuation"
            )
    acc = sum(w * _fourier_integrand(p, t) for t, w in sigma.atoms)
    return gamma**p * cmath.exp(acc)


def _rk4_disk_leg(gen, w, t_from, t_to, step, r0):
    t = t_from
    while t < t_to - 1e-15:
        h = min(step, t_to - t)
        k1 = gen.a_eval(w)
        k2 = gen.a_eval(w + 0.5 * h * k1)
        k3 = gen.a_eval(w + 0.5 * h * k2)
        k4 = gen.a_eval(w + h * k3)
        w = w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        if abs(w) > r0 * (1.0 + 1e-9):
            raise FlowError(f"disk flow violated |eta_t(z)| <= |z| at t={t:.6f}")
    return w


def circle_flow_map(gen, t_end, z, step=FLOW_STEP):
    """eta_t(z) by RK4 from eta_0 = id."""
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValidationError("disk flow starts inside the unit disk")
    if t_end < 0:
        raise ValidationError("backward flows are not supported")
    if t_end == 0:
        return z
    return _rk4_disk_leg(gen, z, 0.0, float(t_end), step, abs(z))


@dataclass(frozen=True)
class CircleFlowResult:
    times: tuple
    grids: tuple   # DiskGrid per time
    means: tuple   # analytically tracked eta_t'(0) per time
    step_size: float


def circle_semigroup_defect(gen, t_end=1.0, step=FLOW_STEP, points=DISK_GRID):
    """max |eta_t(z) - eta_{t/2}(eta_{t/2}(z))| over the grid.

    Composed legs run at the stated step, the direct reference at step/2, so
    the defect measures the integrator-limited semigroup deviation.
    """
    worst = 0.0
    for z in points:
        z = complex(z)
        direct = _rk4_disk_leg(gen, z, 0.0, t_end, 0.5 * step, abs(z))
        half = _rk4_disk_leg(gen, z, 0.0, 0.5 * t_end, step, abs(z))
        comp = _rk4_disk_leg(gen, half, 0.0, 0.5 * t_end, step, abs(half))
        worst = max(worst, abs(direct - comp))
    return worst


def circle_monotone_flow(gen, t_end=1.0, step=FLOW_STEP, points=DISK_GRID):
    """Integrate the disk flow; the derivative at 0 is tracked analytically."""
    if step > 1e-2:
        raise ValidationError("flow step must be <= 1e-2")
    times = (0.0, 0.5 * t_end, float(t_end))
    cols = [[], [], []]
    for z in points:
        z = complex(z)
        half = _rk4_disk_leg(gen, z, 0.0, times[1], step, abs(z))
        full = _rk4_disk_leg(gen, half, times[1], times[2], step, abs(z))
        cols[0].append(z)
        cols[1].append(half)
        cols[2].append(full)
    grids = tuple(DiskGrid(tuple(points), tuple(v)) for v in cols)
    means = tuple(cmath.exp(gen.mean_rate * t) for t in times)
    return CircleFlowResult(times, grids, means, float(step))


def boolean_power_eta(e, k, points=DISK_GRID):
    """k-fold multiplicative Boolean power: eta(z) = z (eta(z)/z)^k."""
    return DiskGrid.sample(lambda z: z * (e(z) / z) ** k, points)


def monotone_power_eta(e, k, points=DISK_GRID):
    """k-fold multiplicative monotone power: iterate eta."""

    def it(z):
        w = complex(z)
        for _ in range(k):
            nxt = complex(e(w))
            if abs(nxt) > abs(w) * (1.0 + 1e-9):
                raise FlowError("eta iteration grew the modulus")
            w = nxt
        return w

    return DiskGrid.sample(it, points)


@dataclass(frozen=True)
class CircleArraySpec:
    """One eta-evaluator per row n, with its mean and the target generator."""

    name: str
    n_values: tuple
    eta_factory: object          # n -> callable z -> eta_n(z)
    mean_fn: object              # n -> complex mean of row n
    generator: CircleGenerator   # target (beta, sigma)
    k_table: tuple = None
    construction_ell: object = 0  # rotation index used to build the array: int or n -> int

    def __post_init__(self):
        ns = tuple(int(n) for n in self.n_values)
        if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValidationError("n_values must be strictly increasing")
        object.__setattr__(self, "n_values", ns)

    def k_of(self, n):
        if self.k_table is None:
            return int(n)
        table = dict(self.k_table)
        if n not in table:
            raise ValidationError(f"k_n table has no entry for n={n}")
        return int(table[n])

    def eta_of(self, n):
        return self.eta_factory(n)

    def mean_of(self, n):
        return complex(self.mean_fn(n))

    @classmethod
    def semigroup(cls, gen, n_values, flow_step=FLOW_STEP, rotation_ell=0):
        """Rows eta_n = flow at time 1/k_n, optionally rotated by e^{2 pi i l/k_n}.

        rotation_ell is an integer or a per-row callable n -> integer
        (e.g. n//2 for the lambda_n = -1 witness).
        """
        ell_of = rotation_ell if callable(rotation_ell) else (lambda n: int(rotation_ell))

        def factory(n):
            k = n
            lam = cmath.exp(2j * math.pi * ell_of(n) / k)
            return lambda z: lam * circle_flow_map(
                gen, 1.0 / k, z, step=min(flow_step, 0.5 / k)
            )

        def mean(n):
            return cmath.exp(2j * math.pi * ell_of(n) / n) * cmath.exp(gen.mean_rate / n)

        rotated = any(ell_of(n) != 0 for n in n_values)
        name = "rotated_semigroup" if rotated else "semigroup"
        return cls(name, tuple(n_values), factory, mean, gen,
                   construction_ell=ell_of)

    @classmethod
    def from_measures(cls, measures, gen, n_values=None):
        table = dict(measures)
        ns = tuple(sorted(table)) if n_values is None else tuple(n_values)
        return cls(
            "custom", ns,
            lambda n: eta_fn(table[n]),
            lambda n: circle_mean(table[n]),
            gen,
        )


def detect_rotation(spec, beta, n):
    """The integer l minimizing |k_n arg(mean_n) + 2 pi l - beta|."""
    k = spec.k_of(n)
    x = k * cmath.phase(spec.mean_of(n))
    ell = round((beta - x) / TWO_PI)
    if abs(x + TWO_PI * ell - beta) > math.pi + 1e-9:
        raise ConvergenceError("rotation detection is branch-ambiguous")
    return int(ell)


def _eta_verdict(distances, tol):
    if distances[-1] > tol:
        return False
    tail = distances[-3:]
    for a, b in zip(tail, tail[1:]):
        if b > 1.1 * a + 1e-9:
            return False
    return True


def rotation_correction(spec, beta, tol=0.05, flow_step=FLOW_STEP, points=DISK_GRID):
    """Detect per-row rotations and compare corrected vs raw monotone powers.

    The target is the time-one flow of the spec's generator.  Returns rows
    (n, detected l, uncorrected and corrected distances) plus convergence
    verdicts for both sequences.
    """
    target = circle_monotone_flow(
        spec.generator, 1.0, flow_step, points
    ).grids[-1]
    rows, raw_d, fix_d = [], [], []
    for n in spec.n_values:
        k = spec.k_of(n)
        ell = detect_rotation(spec, beta, n)
        e = spec.eta_of(n)
        lam = cmath.exp(2j * math.pi * ell / k)
        raw = eta_distance(monotone_power_eta(e, k, points), target)
        fixed = eta_distance(
            monotone_power_eta(lambda z: lam * e(z), k, points), target
        )
        rows.append({"n": n, "k": k, "ell": ell,
                     "uncorrected": float(raw), "corrected": float(fixed)})
        raw_d.append(float(raw))
        fix_d.append(float(fixed))
    return {
        "array": spec.name,
        "rows": rows,
        "uncorrected_converged": _eta_verdict(raw_d, tol),
        "corrected_converged": _eta_verdict(fix_d, tol),
        "tolerance": tol,
    }


def beta_condition_check(spec, beta, tol=0.05):
    """k_n * Im(mean_n) -> beta: the drift condition for verdict transfer."""
    rows = []
    for n in spec.n_values:
        k = spec.k_of(n)
        val = k * spec.mean_of(n).imag
        rows.append({"n": n, "k": k, "k_im_mean": float(val),
                     "gap": float(abs(val - beta))})
    ok = rows[-1]["gap"] <= tol
    return ok, rows


def circle_equivalence(spec, beta, sigma, tol=0.05, flow_step=FLOW_STEP,
                       points=DISK_GRID):
    """Boolean vs monotone verdict agreement on the circle under the drift condition."""
    gamma = cmath.exp(1j * beta)
    bool_target = DiskGrid.sample(boolean_idiv_eta(gamma, sigma), points)
    mono_target = circle_monotone_flow(
        CircleGenerator(beta, sigma), 1.0, flow_step, points
    ).grids[-1]
    beta_ok, beta_rows = beta_condition_check(spec, beta, tol)
    rows_b, rows_m, db, dm = [], [], [], []
    for n in spec.n_values:
        k = spec.k_of(n)
        e = spec.eta_of(n)
        dist_b = eta_distance(boolean_power_eta(e, k, points), bool_target)
        dist_m = eta_distance(monotone_power_eta(e, k, points), mono_target)
        rows_b.append({"n": n, "k": k, "distance": float(dist_b)})
        rows_m.append({"n": n, "k": k, "distance": float(dist_m)})
        db.append(float(dist_b))
        dm.append(float(dist_m))
    conv_b = _eta_verdict(db, tol)
    conv_m = _eta_verdict(dm, tol)
    return {
        "array": spec.name,
        "beta_condition": {"holds": beta_ok, "rows": beta_rows},
        "ops": {
            "boolean": {"rows": rows_b, "converged": conv_b},
            "monotone": {"rows": rows_m, "converged": conv_m},
        },
        "agreement": conv_b == conv_m,
        "both_converged": conv_b and conv_m,
        "tolerance": tol,
    }
