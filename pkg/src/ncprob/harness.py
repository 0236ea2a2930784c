"""Triangular-array experiments: k_n-fold convolution powers vs their limits.

An ArraySpec fixes one measure per row n together with the power count k_n.
run_powers computes the k_n-fold power for one convolution and its distance
to a target law; bp_crosscheck runs all four convolutions against the four
laws of one Levy triple and asserts that the verdicts agree, which is the
executable content of the limit-theorem correspondence.

"Converges" is operationalized as: distance <= tol at the largest n, with no
distance increase above 10% over the last three horizon points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .convolutions import (
    boolean_power,
    classical_power_cf,
    free_power_grid,
    iterate_f,
    monotone_power_grid,
)
from .errors import NumericalError, ValidationError
from .idiv import (
    FLOW_STEP,
    LevyTriple,
    boolean_idiv,
    classical_idiv_cf,
    flow_map,
    free_idiv,
    monotone_idiv_flow,
    phi_eval,
)
from .measures import PARAMETER, FiniteAtomicMeasure
from .transforms import TransformGrid, ZR, f_transform, stolz_tail_estimate, weak_distance

DEFAULT_NS = (16, 32, 64, 128, 256)

#: t-grid for the characteristic-function metric on the classical side
T_GRID = tuple(s * 0.5 * j for j in range(1, 11) for s in (1, -1))

OPS = ("classical", "free", "boolean", "monotone")


def _bernoulli():
    return FiniteAtomicMeasure.from_pairs([(-1.0, 0.5), (1.0, 0.5)])


@dataclass(frozen=True)
class ArraySpec:
    """One measure per row n, plus the power rule k_n and the target triple."""

    name: str
    n_values: tuple
    measure_fn: object = None      # n -> FiniteAtomicMeasure, or None
    f_eval_fn: object = None       # n -> callable z -> F_{mu_n}(z)
    mass_fn: object = None         # n -> float
    k_table: tuple = None          # ((n, k), ...) or None for k_n = n
    limit: LevyTriple = None       # target triple for this array

    def __post_init__(self):
        ns = tuple(int(n) for n in self.n_values)
        if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValidationError("n_values must be strictly increasing")
        object.__setattr__(self, "n_values", ns)
        ks = [self.k_of(n) for n in ns]
        if any(b <= a for a, b in zip(ks, ks[1:])) or ks[0] < 1:
            raise ValidationError("k_n must be positive and strictly increasing")

    def k_of(self, n):
        if self.k_table is None:
            return int(n)
        table = dict(self.k_table)
        if n not in table:
            raise ValidationError(f"k_n table has no entry for n={n}")
        return int(table[n])

    def measure(self, n):
        if self.measure_fn is None:
            return None
        return self.measure_fn(n)

    def f_eval(self, n):
        if self.f_eval_fn is not None:
            return self.f_eval_fn(n)
        return f_transform(self.measure(n))

    def mass_of(self, n):
        if self.mass_fn is not None:
            return self.mass_fn(n)
        return self.measure(n).mass

    # --- shipped families -------------------------------------------------

    @classmethod
    def bernoulli_clt(cls, n_values=DEFAULT_NS):
        """mu_n = symmetric Bernoulli dilated by 1/sqrt(n)."""
        base = _bernoulli()
        return cls(
            name="bernoulli_clt",
            n_values=tuple(n_values),
            measure_fn=lambda n: base.dilate(1.0 / math.sqrt(n)),
            limit=LevyTriple.from_parts(1.0, 0.0, [(0.0, 1.0)]),
        )

    @classmethod
    def poisson(cls, lam=1.0, n_values=DEFAULT_NS):
        """mu_n = (1 - lam/n) delta_0 + (lam/n) delta_1."""
        lam = float(lam)

        def mk(n):
            return FiniteAtomicMeasure.from_pairs(
                [(0.0, 1.0 - lam / n), (1.0, lam / n)]
            )

        return cls(
            name=f"poisson({lam})",
            n_values=tuple(n_values),
            measure_fn=mk,
            limit=LevyTriple.from_parts(1.0, lam / 2.0, [(1.0, lam / 2.0)]),
        )

    @classmethod
    def damped_poisson(cls, lam=1.0, c=1.0, shift_scale=0.0, n_values=DEFAULT_NS):
        """Sub-probability rows: mass (1 - c/n), Poisson shape, optional drift.

        shift_scale > 0 translates row n by shift_scale/sqrt(n); that makes
        k_n gamma_n divergent, the standard broken array.
        """
        lam, c, shift = float(lam), float(c), float(shift_scale)

        def mk(n):
            a = shift / math.sqrt(n)
            return FiniteAtomicMeasure.from_pairs(
                [(a, (1.0 - c / n) * (1.0 - lam / n)),
                 (1.0 + a, (1.0 - c / n) * (lam / n))]
            )

        return cls(
            name=f"damped_poisson(lam={lam},c={c},shift={shift})",
            n_values=tuple(n_values),
            measure_fn=mk,
            limit=LevyTriple.from_parts(math.exp(-c), lam / 2.0, [(1.0, lam / 2.0)]),
        )

    @classmethod
    def fixed(cls, measure=None, n_values=DEFAULT_NS, limit=None):
        """mu_n constant in n: the non-infinitesimal divergence witness."""
        measure = measure if measure is not None else _bernoulli()
        limit = limit if limit is not None else LevyTriple.from_parts(1.0, 0.0, [(0.0, 1.0)])
        return cls(
            name="fixed",
            n_values=tuple(n_values),
            measure_fn=lambda n: measure,
            limit=limit,
        )

    @classmethod
    def custom(cls, measures, limit=None, n_values=None):
        """Explicit row measures, as a mapping n -> measure."""
        table = dict(measures)
        ns = tuple(sorted(table)) if n_values is None else tuple(n_values)
        return cls(
            name="custom",
            n_values=ns,
            measure_fn=lambda n: table[n],
            limit=limit,
        )

    @classmethod
    def flow_root(cls, triple, n_values=DEFAULT_NS, flow_step=FLOW_STEP):
        """Rows given by the flow map g_n = F_{1/k_n} of a generator triple.

        These rows have no atomic representation; only monotone powers and
        generator diagnostics apply.
        """

        def fe(n):
            k = n  # identity k-rule for flow roots
            return lambda z: flow_map(triple, 1.0 / k, z, step=min(flow_step, 0.5 / k))

        return cls(
            name="flow_root",
            n_values=tuple(n_values),
            f_eval_fn=fe,
            mass_fn=lambda n: triple.m ** (1.0 / n),
            limit=triple,
        )


def condition_e(spec, n):
    """The moment-condition data of row n: (gamma_n, sigma_n), both exact.

    sigma_n reweights each atom by k_n w x^2/(x^2+1); gamma_n is
    k_n * sum of w x/(x^2+1).
    """
    mu = spec.measure(n)
    if mu is None:
        raise ValidationError("condition_e needs an atomic row measure")
    k = spec.k_of(n)
    gamma_n = k * sum(w * x / (x * x + 1.0) for x, w in mu.atoms)
    sigma_n = FiniteAtomicMeasure.from_pairs(
        ((x, k * w * x * x / (x * x + 1.0)) for x, w in mu.atoms),
        role=PARAMETER,
    )
    return float(gamma_n), sigma_n


@dataclass(frozen=True)
class ConvergenceReport:
    op: str
    ns: tuple
    ks: tuple
    distances: tuple
    converged: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "op": self.op,
            "rows": [
                {"n": n, "k": k, "distance": dist}
                for n, k, dist in zip(self.ns, self.ks, self.distances)
            ],
            "converged": self.converged,
        }
        d.update(self.extra)
        return d


def _verdict(distances, tol):
    if distances[-1] > tol:
        return False
    tail = distances[-3:]
    for a, b in zip(tail, tail[1:]):
        if b > 1.1 * a + 1e-9:
            return False
    return True


def _resolve_target(op, target, flow_step):
    if isinstance(target, LevyTriple):
        if op == "boolean":
            return boolean_idiv(target)
        if op == "free":
            return free_idiv(target)
        if op == "monotone":
            return monotone_idiv_flow(target, 1.0, flow_step).grids[-1]
        if op == "classical":
            return classical_idiv_cf(target)
    return target


def _cf_distance(cf_a, cf_b):
    return max(abs(cf_a(t) - cf_b(t)) for t in T_GRID)


def run_powers(spec, op, target, tol=0.05, flow_step=FLOW_STEP):
    """Distances of the k_n-fold op-powers of the array to the target law."""
    if op not in OPS:
        raise ValidationError(f"unknown convolution {op!r}")
    target = _resolve_target(op, target, flow_step)
    ns, ks, dists = [], [], []
    for n in spec.n_values:
        k = spec.k_of(n)
        try:
            if op == "classical":
                power = classical_power_cf(spec.measure(n), k)
                dist = _cf_distance(power, target)
            elif op == "free":
                power = free_power_grid(spec.measure(n), k)
                dist = weak_distance(power, target)
            elif op == "boolean":
                power = boolean_power(spec.measure(n), k)
                dist = weak_distance(power, target)
            else:  # monotone
                mu = spec.measure(n)
                if mu is not None:
                    power = monotone_power_grid(mu, k)
                else:
                    fe = spec.f_eval(n)
                    power = TransformGrid(
                        ZR, tuple(iterate_f(fe, k, z) for z in ZR), "F",
                        mass=spec.mass_of(n) ** k,
                    )
                dist = weak_distance(power, target)
        except (NumericalError, ValidationError) as exc:
            raise type(exc)(f"{exc} (op={op}, row n={n}, k={k})") from exc
        ns.append(n)
        ks.append(k)
        dists.append(float(dist))
    return ConvergenceReport(op, tuple(ns), tuple(ks), tuple(dists), _verdict(dists, tol))


def chernoff_residual(spec, triple, n):
    """max over ZR of |k_n (F_{mu_n}(z) - z) - Phi(z)|: generator convergence."""
    k = spec.k_of(n)
    fe = spec.f_eval(n)
    return max(abs(k * (fe(z) - z) - phi_eval(triple, z)) for z in ZR)


def bp_crosscheck(spec, tol=0.05, flow_step=FLOW_STEP):
    """Run all four power sequences of one array against one triple's laws.

    The triple is the array's limit field (mass 1 required: free and
    classical convolutions only exist for probability rows).  Also reports
    the moment-condition data per row and whether all four convergence
    verdicts agree.
    """
    triple = spec.limit
    if triple is None:
        raise ValidationError("bp_crosscheck needs the array's target triple")
    if abs(triple.m - 1.0) > 1e-12:
        raise ValidationError("bp_crosscheck needs a mass-1 triple")
    cond_rows = []
    for n in spec.n_values:
        gamma_n, sigma_n = condition_e(spec, n)
        cond_rows.append({
            "n": n,
            "gamma_n": gamma_n,
            "gamma_gap": abs(gamma_n - triple.gamma),
            "sigma_distance": weak_distance(sigma_n, triple.sigma),
            "chernoff_residual": chernoff_residual(spec, triple, n),
        })
    cond_converged = (
        cond_rows[-1]["gamma_gap"] <= tol
        and cond_rows[-1]["sigma_distance"] <= tol
    )
    reports = {op: run_powers(spec, op, triple, tol, flow_step) for op in OPS}
    flags = [r.converged for r in reports.values()] + [cond_converged]
    return {
        "array": spec.name,
        "condition_e": {"rows": cond_rows, "converged": cond_converged},
        "ops": {op: r.to_dict() for op, r in reports.items()},
        "agreement": len(set(flags)) == 1,
        "all_converged": all(flags),
        "tolerance": tol,
    }


def subprobability_equivalence(spec, triple=None, tol=0.05, flow_step=FLOW_STEP):
    """Boolean vs monotone verdict agreement for sub-probability rows.

    The target triple (m, gamma, sigma) is explicit input; the row masses
    must satisfy mass^{k_n} -> m with m in (0, 1].
    """
    triple = triple if triple is not None else spec.limit
    if triple is None:
        raise ValidationError("subprobability_equivalence needs a target triple")
    n_last = spec.n_values[-1]
    mhat = spec.mass_of(n_last) ** spec.k_of(n_last)
    if mhat < 0.01:
        raise ValidationError("row masses collapse: mass^{k_n} -> 0")
    if abs(mhat - triple.m) > 0.05:
        raise ValidationError(
            f"mass^k = {mhat} at the horizon does not approach m = {triple.m}"
        )
    rep_b = run_powers(spec, "boolean", triple, tol, flow_step)
    rep_m = run_powers(spec, "monotone", triple, tol, flow_step)
    return {
        "array": spec.name,
        "mass_limit": {"target": triple.m, "observed": mhat},
        "ops": {"boolean": rep_b.to_dict(), "monotone": rep_m.to_dict()},
        "agreement": rep_b.converged == rep_m.converged,
        "both_converged": rep_b.converged and rep_m.converged,
        "tolerance": tol,
    }


def tightness_diagnostics(spec, n, y_values, m_limit=None):
    """Tail rows at z = iy for one array row; left <= right within 5% slack."""
    mu = spec.measure(n)
    if mu is None:
        raise ValidationError("tightness diagnostics need an atomic row measure")
    k = spec.k_of(n)
    rows = []
    for y in y_values:
        est = stolz_tail_estimate(mu, k, float(y), m_limit=m_limit)
        rows.append({
            "y": float(y),
            "im_left": est["im_left"],
            "im_right": est["im_right"],
            "right_over_y": est["im_right"] / float(y),
            "ok": est["im_left"] <= est["im_right"] * 1.05 + 1e-12,
        })
    return rows
