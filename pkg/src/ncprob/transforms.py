"""Half-plane transforms G, F, E, phi and their inverses.

G is the Cauchy transform, F = 1/G, E = z/mass - F.  For atomic measures F
and E are exact rational maps; measures are recovered from rational
F-transforms through poles and residues of G, and from sampled G-values
through Stieltjes inversion on a line just above the real axis.

The weak-convergence metric used throughout the package lives here: the
maximum G-difference over a fixed ten-point grid ZR plus the mass gap.
Uniform convergence of Cauchy transforms on compacts metrizes vague
convergence, and the mass term upgrades it to weak convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RecoveryError, ValidationError
from .measures import PARAMETER, STATE, FiniteAtomicMeasure
from .rational import Polynomial, RationalMap, partial_fractions, real_roots
from .solvers import newton, upper_half_plane_guard

#: canonical evaluation grid: Im >= 1 keeps every engine well-conditioned
ZR = tuple(
    complex(x, y) for y in (1.0, 2.0) for x in (-3.0, -1.5, 0.0, 1.5, 3.0)
)

#: 100 fixed sample points of C^+_1 for sup-norm style diagnostics
CPLUS1_SAMPLES = tuple(
    complex(x, y)
    for y in (1.0, 1.5, 2.5, 5.0, 10.0)
    for x in np.linspace(-10.0, 10.0, 20)
)


def eps_line_grid(x_window, n_points, eps):
    """Points x + i*eps across a window; used for density evaluation."""
    lo, hi = float(x_window[0]), float(x_window[1])
    if not (hi > lo and eps > 0):
        raise ValidationError("bad inversion window")
    return tuple(complex(x, eps) for x in np.linspace(lo, hi, int(n_points)))


@dataclass(frozen=True)
class TransformGrid:
    """Sampled transform values on a fixed complex grid.

    Points must stay above the configured imaginary-part floor (default
    0.25, which keeps metric evaluations well-conditioned); density grids
    on the eps-line lower the floor explicitly.
    """

    points: tuple
    values: tuple
    kind: str  # "G" | "F" | "E"
    mass: float | None = None
    floor: float = 0.25

    def __post_init__(self):
        if self.kind not in ("G", "F", "E"):
            raise ValidationError(f"unknown grid kind {self.kind!r}")
        if len(self.points) != len(self.values):
            raise ValidationError("points/values length mismatch")
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))
        if any(p.imag < self.floor for p in self.points):
            raise ValidationError(
                f"grid point below the imaginary-part floor {self.floor}")
        if any(not (abs(v) < math.inf) for v in self.values):
            raise ValidationError("non-finite grid value")

    @classmethod
    def sample(cls, fn, points, kind, mass=None, floor=0.25):
        return cls(tuple(points), tuple(fn(z) for z in points), kind, mass, floor)

    def g_values(self):
        if self.kind == "G":
            return self.values
        if self.kind == "F":
            return tuple(1.0 / v for v in self.values)
        if self.mass is None:
            raise ValidationError("E-grid needs a mass to produce G values")
        return tuple(1.0 / (z / self.mass - v) for z, v in zip(self.points, self.values))


@dataclass(frozen=True)
class StolzAngle:
    """Truncated cone {Im z > beta, Im z > alpha |Re z|}."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValidationError("Stolz angle parameters must be positive")

    def contains(self, z):
        return z.imag > self.beta and z.imag > self.alpha * abs(z.real)


@dataclass(frozen=True)
class NevanlinnaData:
    """Canonical representation F(z) = z/m - gamma + sum s_j (1+p_j z)/(p_j - z)."""

    m: float
    gamma: float
    sigma: FiniteAtomicMeasure

    def __post_init__(self):
        if not (0.0 < self.m <= 1.0 + 1e-9):
            raise ValidationError(f"mass parameter m={self.m} outside (0, 1]")
        if self.sigma.role != PARAMETER:
            object.__setattr__(self, "sigma", self.sigma.with_role(PARAMETER))

    def f_eval(self, z):
        acc = z / self.m - self.gamma
        for p, s in self.sigma.atoms:
            acc = acc + s * (1.0 + p * z) / (p - z)
        return acc

    def to_rational(self):
        num = Polynomial((-self.gamma, 1.0 / self.m))
        den = Polynomial.one()
        for p, s in self.sigma.atoms:
            factor = Polynomial((p, -1.0))  # (p - z)
            num = num * factor + s * Polynomial((1.0, p)) * den
            den = den * factor
        return RationalMap(num, den)


def cauchy_G(mu, z):
    """G(z) = sum of w/(z - x); requires Im z > 0 (accepts numpy arrays)."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValidationError("cauchy_G requires Im z > 0")
    x = np.asarray(mu.positions)
    w = np.asarray(mu.weights)
    vals = (w / (z[..., None] - x)).sum(axis=-1)
    return complex(vals) if vals.ndim == 0 else vals


def f_transform(mu):
    """Exact rational F = 1/G for an atomic measure."""
    if mu.is_zero:
        raise ValidationError("F-transform of the zero measure is undefined")
    xs = list(mu.positions)
    den_g = Polynomial.from_roots(xs)
    num_g = Polynomial.zero()
    for j, w in enumerate(mu.weights):
        num_g = num_g + w * Polynomial.from_roots(xs[:j] + xs[j + 1 :])
    return RationalMap(den_g, num_g)


def e_transform(mu):
    """E = z/mass - F, additive under Boolean convolution."""
    f = f_transform(mu)
    return RationalMap.from_linear(1.0 / mu.mass) - f


def voiculescu_phi(mu, z, tol=1e-12, max_iter=100):
    """phi(z) = F^{-1}(z) - z by Newton from w0 = z.

    Meaningful for probability measures at z high in a Stolz angle, where F
    is injective; outside that region Newton may legitimately fail.
    """
    if abs(mu.mass - 1.0) > 1e-12:
        raise ValidationError("voiculescu_phi needs a probability measure")
    f = f_transform(mu)

    def fun(w):
        return f(w) - z

    def dfun(w):
        return f.eval_with_derivative(w)[1]

    w = newton(fun, dfun, z, tol=tol, max_iter=max_iter,
               guard=upper_half_plane_guard, label="voiculescu_phi")
    return w - z


def nevanlinna_decompose(f, m):
    """Extract (m, gamma, sigma) from a rational F-transform of mass m."""
    pf = partial_fractions(f)
    if abs(pf.slope - 1.0 / m) > 1e-6 * max(1.0, 1.0 / m):
        raise ValidationError(
            f"slope {pf.slope} does not match 1/m = {1.0 / m}"
        )
    atoms = []
    for p, r in pf.poles:
        if r > 1e-12:
            raise ValidationError(f"positive residue {r} at {p}: not an F-transform")
        s = -r / (1.0 + p * p)
        if s > 1e-14:
            atoms.append((p, s))
    sigma = FiniteAtomicMeasure.from_pairs(atoms, role=PARAMETER)
    gamma = -pf.intercept - sum(p * s for p, s in atoms)
    return NevanlinnaData(float(m), float(gamma), sigma)


def recover_measure(f):
    """Invert F = 1/G: atoms at real poles of G, weights from residues."""
    if f.num.degree != f.den.degree + 1:
        raise RecoveryError("numerator degree must exceed denominator degree by 1")
    slope = f.num.leading  # denominator is monic
    if slope <= 0:
        raise RecoveryError("leading slope must be positive")
    mass = 1.0 / slope
    roots = real_roots(f.num)
    if sum(m for _, m in roots) < f.num.degree:
        raise RecoveryError("complex pole of G: not the F-transform of a measure")
    if any(m > 1 for _, m in roots):
        raise RecoveryError("multiple pole of G")
    dnum = f.num.derivative()
    atoms = []
    for x, _ in roots:
        w = float(np.real(f.den(x) / dnum(x)))
        if w < -1e-12:
            raise RecoveryError(f"negative residue {w} at {x}")
        if w > 0:
            atoms.append((x, w))
    total = sum(w for _, w in atoms)
    if abs(total - mass) > 1e-6 * max(1.0, mass):
        raise RecoveryError(
            f"residue mass {total} inconsistent with slope mass {mass}"
        )
    role = STATE if total <= 1.0 + 1e-9 else PARAMETER
    return FiniteAtomicMeasure.from_pairs(atoms, role=role)


@dataclass(frozen=True)
class InversionResult:
    density: tuple  # ((x, density), ...)
    atoms: tuple    # ((position, weight), ...)


def _golden_max(fn, lo, hi, iters=60):
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def stieltjes_invert(g, eps, x_window, n_bins=400, atom_threshold=0.1):
    """Density and atoms of a measure from its G-values near the real axis.

    g is either a callable G(z) or a TransformGrid of kind G sampled on the
    line Im z = eps.  density(x) = -Im G(x + i eps)/pi.

    Atom search: every local maximum of a(x) = eps |Im G(x + i eps)| is
    refined by a golden-section search between its neighbouring bins (the
    spike of an atom is O(eps) wide, usually narrower than a bin); the
    refined peak is an atom when it exceeds the 0.1 threshold, dominates
    half its local neighbourhood, and is eps-stable (value within 20% under
    a 10x larger eps -- a sharp density bump fails this).  The weight is
    -eps Im G at the refined peak.  With a plain grid as input no
    refinement is possible, so only atoms wider than a bin are found.
    """
    if isinstance(g, TransformGrid):
        if g.kind != "G":
            raise ValidationError("stieltjes_invert needs a G-grid")
        pts = g.points
        if any(abs(p.imag - eps) > 1e-15 * max(1.0, eps) for p in pts):
            raise ValidationError("grid must be sampled on the line Im z = eps")
        xs = np.array([p.real for p in pts])
        vals = np.array(g.values)
        g_fn = None
    else:
        pts = eps_line_grid(x_window, n_bins, eps)
        xs = np.array([p.real for p in pts])
        g_fn = g
        vals = np.array([g(p) for p in pts])
    dens = -vals.imag / math.pi
    a = eps * np.abs(vals.imag)
    dx = xs[1] - xs[0] if len(xs) > 1 else 0.0

    atoms = []
    half = max(3, int(0.05 * len(xs)))
    for i in range(len(xs)):
        lo, hi = max(0, i - 1), min(len(xs), i + 2)
        if a[i] < np.max(a[lo:hi]) or a[i] < 1e-4:
            continue
        if i > 0 and a[i] == a[i - 1]:  # plateau: keep leftmost only
            continue
        if g_fn is None:
            local = np.max(a[max(0, i - half): i + half + 1])
            if a[i] <= max(atom_threshold, 0.5 * local):
                continue
            atoms.append((float(xs[i]), float(a[i])))
            continue
        x_star, peak = _golden_max(
            lambda x: eps * abs(g_fn(complex(x, eps)).imag),
            xs[i] - dx, xs[i] + dx,
        )
        neighbourhood = float(np.max(a[max(0, i - half): i + half + 1]))
        if peak <= max(atom_threshold, 0.5 * neighbourhood):
            continue
        coarse = (10.0 * eps) * abs(g_fn(complex(x_star, 10.0 * eps)).imag)
        if not (0.8 * peak <= coarse <= 1.2 * peak):
            continue  # not eps-stable: a sharp density bump, not an atom
        weight = -eps * g_fn(complex(x_star, eps)).imag
        atoms.append((float(x_star), float(weight)))
    density = tuple((float(x), float(d)) for x, d in zip(xs, dens))
    return InversionResult(density, tuple(atoms))


def _resolve_g_and_mass(obj):
    if isinstance(obj, FiniteAtomicMeasure):
        return tuple(cauchy_G(obj, z) for z in ZR), obj.mass
    if isinstance(obj, TransformGrid):
        if obj.points != ZR:
            raise ValidationError("weak_distance grids must be sampled on ZR")
        if obj.mass is None:
            raise ValidationError("weak_distance needs the grid's mass")
        return obj.g_values(), obj.mass
    raise ValidationError(f"cannot compute weak distance for {type(obj)!r}")


def weak_distance(a, b):
    """max over ZR of |G_a - G_b| plus |mass(a) - mass(b)|."""
    ga, ma = _resolve_g_and_mass(a)
    gb, mb = _resolve_g_and_mass(b)
    return max(abs(x - y) for x, y in zip(ga, gb)) + abs(ma - mb)


def maassen_bound_check(mu):
    """Boundedness of z/m - F on C^+_1 against the first-moment/variance bound."""
    m = mu.mass
    bound = abs(mu.mean) / m**2 + mu.generalized_variance / m**2
    f = f_transform(mu)
    observed = max(abs(z / m - f(z)) for z in CPLUS1_SAMPLES)
    return observed <= bound + 1e-9 * max(1.0, bound)


def stolz_tail_estimate(mu, k_n, y, m_limit=None):
    """Tail and imaginary-part diagnostics for one row of a triangular array.

    Returns both sides of the sigma-tail estimate
        k_n sigma_n(|t|>y) <= 2 k_n * integral (1+t^2)/(t^2+y^2) dsigma_n
    and of the k_n Im(F - z/m) <= 2 Im(F^{ok_n} - z/m^{k_n}) comparison at
    z = iy, with the (1/m - 1)/(-log m) factor taken at m_limit (default:
    mass^{k_n}).
    """
    f = f_transform(mu)
    nev = nevanlinna_decompose(f, mu.mass)
    sig = nev.sigma
    left_tail = k_n * sum(w for p, w in sig.atoms if abs(p) > y)
    right_tail = 2.0 * k_n * sum(
        w * (1.0 + p * p) / (p * p + y * y) for p, w in sig.atoms
    )
    z = complex(0.0, y)
    m_n = mu.mass
    if m_limit is None:
        m_limit = m_n**k_n
    factor = 1.0 if m_limit >= 1.0 - 1e-12 else (1.0 / m_limit - 1.0) / (-math.log(m_limit))
    left_im = k_n * (f(z) - z / m_n).imag * factor
    w = z
    for _ in range(k_n):
        w = f(w)
    right_im = 2.0 * (w - z / m_n**k_n).imag
    return {
        "tail_left": float(left_tail),
        "tail_right": float(right_tail),
        "im_left": float(left_im),
        "im_right": float(right_im),
    }
