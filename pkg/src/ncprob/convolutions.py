"""The four additive convolutions and their k-fold powers.

Single classical/Boolean/monotone convolutions of atomic measures are exact
(measure algebra or rational algebra); free convolution and large monotone
powers are evaluated pointwise on complex grids.  The hybrid split exists
because the degree of a composed F-transform grows exponentially with the
power, so exact algebra only serves small k.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, ValidationError
from .measures import FiniteAtomicMeasure
from .rational import DEGREE_CAP, RationalMap
from .solvers import newton, upper_half_plane_guard
from .transforms import ZR, TransformGrid, e_transform, f_transform, recover_measure

#: iteration budget for the subordination fixed point
_SUBORD_TOL = 1e-13
_SUBORD_MAX = 500
_CROSS_TOL = 1e-10

#: overflow guard on iterated F-evaluation
_ITER_OVERFLOW = 1e12


def classical_convolve(mu, nu):
    """Atoms at x_i + y_j with weights w_i v_j, merged."""
    pairs = [
        (x + y, wx * wy)
        for x, wx in mu.atoms
        for y, wy in nu.atoms
    ]
    return FiniteAtomicMeasure.from_pairs(pairs, role=mu.role)


def boolean_convolve(mu, nu):
    """Boolean convolution: E adds, mass multiplies."""
    f = RationalMap.from_linear(1.0 / (mu.mass * nu.mass)) - e_transform(mu) - e_transform(nu)
    return recover_measure(f)


def monotone_convolve(mu, nu, cap=DEGREE_CAP):
    """Monotone convolution: F composes.  Mass multiplies.

    Raises DegreeCapExceeded when the composed degree passes the cap; the
    caller should fall back to monotone_power_grid / pointwise iteration.
    """
    f = f_transform(mu).compose(f_transform(nu), cap=cap)
    return recover_measure(f)


def free_convolve_F(f_mu, f_nu):
    """Two-sided subordination for the free convolution of F-callables.

    Returns a callable evaluating F of the free convolution anywhere in the
    upper half-plane.  Per point, omega is the fixed point of
    w -> z + h_mu(z + h_nu(w)) with h = F - id; the two equivalent
    expressions F_nu(omega) and F_mu(z + h_nu(omega)) are cross-checked and
    their mismatch or non-convergence raises.
    """

    def h_mu(w):
        return f_mu(w) - w

    def h_nu(w):
        return f_nu(w) - w

    def f_conv(z):
        w = complex(z)
        for _ in range(_SUBORD_MAX):
            nxt = z + h_mu(z + h_nu(w))
            if abs(nxt - w) <= _SUBORD_TOL:
                w = nxt
                break
            w = nxt
        else:
            raise ConvergenceError(f"subordination fixed point stalled at z={z}")
        via_nu = f_nu(w)
        via_mu = f_mu(z + h_nu(w))
        if abs(via_nu - via_mu) > _CROSS_TOL * max(1.0, abs(via_nu)):
            raise ConvergenceError(
                f"subordination cross-check failed at z={z}: {via_nu} vs {via_mu}"
            )
        return 0.5 * (via_nu + via_mu)

    return f_conv


def free_convolve(mu, nu, points=ZR):
    """Free convolution of two probability measures, sampled on a grid."""
    for m in (mu, nu):
        if abs(m.mass - 1.0) > 1e-12:
            raise ValidationError("free convolution needs probability measures")
    fn = free_convolve_F(f_transform(mu), f_transform(nu))
    return TransformGrid.sample(fn, points, "F", mass=1.0)


def boolean_power(mu, k):
    """k-fold Boolean power, exact for any k: F = z/m^k - k E."""
    if k < 1:
        raise ValidationError("power must be >= 1")
    f = RationalMap.from_linear(1.0 / mu.mass**k) - float(k) * e_transform(mu)
    return recover_measure(f)


def iterate_f(f_eval, k, z):
    """k-fold composition of an F-evaluator at a single point."""
    w = complex(z)
    im_prev = w.imag
    for _ in range(k):
        w = complex(f_eval(w))
        if abs(w) > _ITER_OVERFLOW:
            raise ConvergenceError(f"iterated F overflow at z={z}")
        if w.imag < im_prev * (1.0 - 1e-12) - 1e-15:
            raise ConvergenceError("iterated F decreased the imaginary part")
        im_prev = w.imag
    return w


def monotone_power_grid(mu, k, points=ZR):
    """k-fold monotone power: pointwise iteration of the exact rational F."""
    if k < 1:
        raise ValidationError("power must be >= 1")
    f = f_transform(mu)
    values = tuple(iterate_f(f, k, z) for z in points)
    return TransformGrid(tuple(points), values, "F", mass=mu.mass**k)


def cf_of(mu):
    """Characteristic function t -> sum of w e^{itx} (no normalization)."""
    x = np.asarray(mu.positions)
    w = np.asarray(mu.weights)

    def cf(t):
        return complex((w * np.exp(1j * t * x)).sum())

    return cf


def classical_power_cf(mu, k):
    """k-fold classical power as an exact characteristic-function evaluator."""
    if k < 1:
        raise ValidationError("power must be >= 1")
    base = cf_of(mu)

    def cf(t):
        return base(t) ** k

    return cf


def free_power_eval(mu, k, z, tol=1e-12):
    """F of the k-fold free power at z, via phi-additivity.

    With v = F_mu^{-1}(w) the equation w + k phi(w) = z becomes
    k v + (1-k) F_mu(v) = z, a rational equation solved by Newton from
    v = z; the returned value is F_mu(v).
    """
    f = f_transform(mu)

    def fun(v):
        return k * v + (1.0 - k) * f(v) - z

    def dfun(v):
        return k + (1.0 - k) * f.eval_with_derivative(v)[1]

    v = newton(fun, dfun, z, tol=tol * max(1.0, abs(z)),
               guard=upper_half_plane_guard, label="free_power")
    return complex(f(v))


def free_power_grid(mu, k, points=ZR):
    """k-fold free power of a probability measure on a grid."""
    if abs(mu.mass - 1.0) > 1e-12:
        raise ValidationError("free powers need a probability measure")
    if k < 1:
        raise ValidationError("power must be >= 1")
    values = tuple(free_power_eval(mu, k, z) for z in points)
    return TransformGrid(tuple(points), values, "F", mass=1.0)
