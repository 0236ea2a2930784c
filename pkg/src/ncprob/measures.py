"""Finite atomic measures on the real line and on the unit circle.

These are the value types every engine consumes.  Instances are immutable;
construction normalizes the atom list (sorted positions, strictly positive
weights, near-duplicate positions merged), so rebuilding a measure from its
own atoms is a no-op.

Two roles exist.  ``state`` measures are the (sub-)probability inputs of the
convolution calculus: total mass in (0, 1] on the line, exactly 1 on the
circle.  ``parameter`` measures carry Nevanlinna / Levy data and may have any
finite mass, including zero.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ValidationError

#: positions closer than this are summed at construction time (root finders
#: downstream produce near-duplicate atoms)
MERGE_TOL = 1e-12

#: slack on the "mass <= 1" / "mass == 1" checks, for float noise from engines
MASS_TOL = 1e-9

STATE = "state"
PARAMETER = "parameter"

TWO_PI = 2.0 * math.pi


def _normalize(pairs, merge_tol, wrap=None):
    cleaned = []
    for x, w in pairs:
        x = float(x)
        w = float(w)
        if not (math.isfinite(x) and math.isfinite(w)):
            raise ValidationError(f"non-finite atom ({x}, {w})")
        if w < 0.0:
            raise ValidationError(f"negative weight {w} at position {x}")
        if w == 0.0:
            continue
        if wrap is not None:
            x = x % wrap
        cleaned.append((x, w))
    cleaned.sort()
    merged: list[list[float]] = []
    for x, w in cleaned:
        if merged and x - merged[-1][0] <= merge_tol:
            x0, w0 = merged[-1]
            merged[-1] = [(x0 * w0 + x * w) / (w0 + w), w0 + w]
        else:
            merged.append([x, w])
    if wrap is not None and len(merged) >= 2:
        # endpoints may coincide modulo the period
        if merged[0][0] + wrap - merged[-1][0] <= merge_tol:
            xl, wl = merged.pop()
            x0, w0 = merged[0]
            merged[0] = [(((xl - wrap) * wl + x0 * w0) / (wl + w0)) % wrap, wl + w0]
            merged.sort()
    return tuple(tuple(a) for a in merged)


@dataclass(frozen=True)
class FiniteAtomicMeasure:
    """Positive weighted atoms on the real line."""

    positions: tuple
    weights: tuple
    role: str = STATE

    def __post_init__(self):
        if self.role not in (STATE, PARAMETER):
            raise ValidationError(f"unknown role {self.role!r}")
        pairs = _normalize(zip(self.positions, self.weights), MERGE_TOL)
        object.__setattr__(self, "positions", tuple(x for x, _ in pairs))
        object.__setattr__(self, "weights", tuple(w for _, w in pairs))
        total = sum(self.weights)
        if self.role == STATE:
            if not self.positions:
                raise ValidationError("state measure must be non-zero")
            if total > 1.0 + MASS_TOL:
                raise ValidationError(f"state measure mass {total} exceeds 1")

    @classmethod
    def from_pairs(cls, pairs, role=STATE):
        pairs = list(pairs)
        return cls(tuple(x for x, _ in pairs), tuple(w for _, w in pairs), role)

    @classmethod
    def dirac(cls, position, weight=1.0, role=STATE):
        return cls((position,), (weight,), role)

    @classmethod
    def zero(cls):
        """The zero measure; only valid in parameter role."""
        return cls((), (), PARAMETER)

    @property
    def atoms(self):
        return tuple(zip(self.positions, self.weights))

    @property
    def is_zero(self):
        return not self.positions

    @property
    def mass(self):
        return sum(self.weights)

    def moment(self, k):
        return sum(w * x**k for x, w in self.atoms)

    @property
    def mean(self):
        return self.moment(1)

    @property
    def generalized_variance(self):
        """mu(x^2) mu(R) - mu(x)^2; reduces to variance for probability mass."""
        return self.moment(2) * self.mass - self.mean**2

    @property
    def support_width(self):
        if len(self.positions) < 2:
            return 0.0
        return self.positions[-1] - self.positions[0]

    def dilate(self, s):
        """Pushforward under x -> s*x.  Mass preserved; s must be non-zero."""
        s = float(s)
        if s == 0.0:
            raise ValidationError("dilation factor must be non-zero")
        return FiniteAtomicMeasure(
            tuple(s * x for x in self.positions), self.weights, self.role
        )

    def translate(self, a):
        """Pushforward under x -> x + a."""
        a = float(a)
        return FiniteAtomicMeasure(
            tuple(x + a for x in self.positions), self.weights, self.role
        )

    def scale_mass(self, c):
        """Multiply every weight by c > 0 (role preserved)."""
        c = float(c)
        if c <= 0.0:
            raise ValidationError("mass scale must be positive")
        return FiniteAtomicMeasure(
            self.positions, tuple(c * w for w in self.weights), self.role
        )

    def with_role(self, role):
        return FiniteAtomicMeasure(self.positions, self.weights, role)

    def to_json_pairs(self):
        """[[position, weight], ...] for JSON output; round-trips exactly."""
        return [[x, w] for x, w in self.atoms]

    @classmethod
    def from_json_pairs(cls, pairs, role=STATE):
        return cls.from_pairs(((float(x), float(w)) for x, w in pairs), role)


@dataclass(frozen=True)
class CircleMeasure:
    """Positive weighted atoms on the unit circle, stored by angle in [0, 2pi)."""

    angles: tuple
    weights: tuple
    role: str = STATE

    def __post_init__(self):
        if self.role not in (STATE, PARAMETER):
            raise ValidationError(f"unknown role {self.role!r}")
        pairs = _normalize(zip(self.angles, self.weights), MERGE_TOL, wrap=TWO_PI)
        object.__setattr__(self, "angles", tuple(x for x, _ in pairs))
        object.__setattr__(self, "weights", tuple(w for _, w in pairs))
        total = sum(self.weights)
        if self.role == STATE and abs(total - 1.0) > MASS_TOL:
            raise ValidationError(f"circle state measure mass {total} must equal 1")

    @classmethod
    def from_pairs(cls, pairs, role=STATE):
        pairs = list(pairs)
        return cls(tuple(x for x, _ in pairs), tuple(w for _, w in pairs), role)

    @classmethod
    def dirac(cls, angle, weight=1.0, role=STATE):
        return cls((angle,), (weight,), role)

    @classmethod
    def zero(cls):
        return cls((), (), PARAMETER)

    @property
    def atoms(self):
        return tuple(zip(self.angles, self.weights))

    @property
    def is_zero(self):
        return not self.angles

    @property
    def mass(self):
        return sum(self.weights)

    @property
    def points(self):
        """Atom locations as unit complex numbers."""
        return tuple(cmath.exp(1j * t) for t in self.angles)

    def moment(self, p):
        """Integral of zeta^p: sum of w * e^{i p theta}."""
        return sum(w * cmath.exp(1j * p * t) for t, w in self.atoms)

    @property
    def mean(self):
        return self.moment(1)

    def to_json_pairs(self):
        return [[t, w] for t, w in self.atoms]

    @classmethod
    def from_json_pairs(cls, pairs, role=STATE):
        return cls.from_pairs(((float(t), float(w)) for t, w in pairs), role)
