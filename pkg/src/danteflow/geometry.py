"""Static geometry of a homogeneously deformed 3-sphere (Bianchi type IX).

A round 3-sphere of radius R is stretched along its three orthogonal
left-invariant directions by positive factors derived from a triple
``(a, b, c)``.  The resulting left-invariant metric has diagonal
coefficients

    u = 1/(bc),   v = 1/(ac),   w = 1/(ab),

and its curvature is governed by Heron-like combinations of ``(a, b, c)``
with the semiperimeter ``s = (a + b + c)/2``:

    kappa_1 = (4/R^2) * [a(s-a) - (s-b)(s-c)]          (cyclically)
    R_11    = kappa_2 + kappa_3 = (8/R^2) (s-b)(s-c)   (cyclically)
    scalar  = 2 (kappa_1 + kappa_2 + kappa_3)

All operations here are pure functions of value types and can be called
concurrently without coordination.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError

#: Radius-squared normalization used everywhere unless overridden.
DEFAULT_R_SQUARED = 4.0

#: Default relative tolerance for equality / sign decisions in classify().
DEFAULT_EQ_TOL = 1e-9


def _require_positive(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class StretchFactors:
    """Deformation parameters (a, b, c) of a stretched S^3 plus R^2.

    All four numbers must be positive.  Curvature-valued operations are
    permutation-equivariant, so unordered triples are accepted; flow entry
    points require the ordered convention a <= b <= c (use :meth:`ordered`).
    """

    a: float
    b: float
    c: float
    r_squared: float = DEFAULT_R_SQUARED

    def __post_init__(self) -> None:
        _require_positive("a", self.a)
        _require_positive("b", self.b)
        _require_positive("c", self.c)
        _require_positive("r_squared", self.r_squared)

    @classmethod
    def ordered(cls, a: float, b: float, c: float,
                r_squared: float = DEFAULT_R_SQUARED) -> "StretchFactors":
        """Construct with the ordered convention enforced; rejects a > b or b > c."""
        if not (a <= b <= c):
            raise DomainError(f"stretch factors must satisfy a <= b <= c, got ({a}, {b}, {c})")
        return cls(a, b, c, r_squared)

    def sorted(self) -> "StretchFactors":
        """The same shape with (a, b, c) rearranged into ascending order."""
        a, b, c = sorted((self.a, self.b, self.c))
        return StretchFactors(a, b, c, self.r_squared)


@dataclass(frozen=True)
class MetricCoeffs:
    """Diagonal metric coefficients (u, v, w), the variables the flow evolves.

    For an ordered shape a <= b <= c the mirrored ordering w >= v >= u holds.
    """

    u: float
    v: float
    w: float

    def __post_init__(self) -> None:
        _require_positive("u", self.u)
        _require_positive("v", self.v)
        _require_positive("w", self.w)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.u, self.v, self.w)

    @property
    def sigma(self) -> float:
        """Half-sum (u + v + w)/2, computed on demand."""
        return math.fsum((self.u, self.v, self.w)) / 2.0


@dataclass(frozen=True)
class CurvatureSummary:
    """Principal curvatures, Ricci eigenvalues, and the Ricci scalar.

    By construction ricci11 = kappa2 + kappa3 (cyclically) and
    scalar = 2 (kappa1 + kappa2 + kappa3), exactly.
    """

    kappa1: float
    kappa2: float
    kappa3: float
    ricci11: float
    ricci22: float
    ricci33: float
    scalar: float


class ShapeKind(Enum):
    ISOTROPIC = "isotropic"
    SNAKE = "snake"
    TURTLE = "turtle"
    DRAGON = "dragon"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class Classification:
    """Shape kind plus sign data for curvatures (-1, 0, +1 per entry)."""

    shape: ShapeKind
    curvature_signs: tuple[int, int, int]
    ricci_signs: tuple[int, int, int]
    scalar_sign: int


def semiperimeter(f: StretchFactors) -> float:
    """Half the sum of the stretch factors, s = (a + b + c)/2."""
    return math.fsum((f.a, f.b, f.c)) / 2.0


def principal_curvatures(f: StretchFactors) -> tuple[float, float, float]:
    """Eigenvalues (kappa1, kappa2, kappa3) of the Riemann tensor.

    kappa_1 = (4/R^2) [a(s-a) - (s-b)(s-c)], and cyclically.  Permuting
    (a, b, c) permutes the result identically; scaling (a, b, c) by l
    scales each kappa by l^2.
    """
    a, b, c = f.a, f.b, f.c
    s = semiperimeter(f)
    scale = 4.0 / f.r_squared
    k1 = scale * (a * (s - a) - (s - b) * (s - c))
    k2 = scale * (b * (s - b) - (s - a) * (s - c))
    k3 = scale * (c * (s - c) - (s - a) * (s - b))
    return (k1, k2, k3)


def ricci_eigenvalues(f: StretchFactors) -> tuple[float, float, float]:
    """Diagonal Ricci entries via the product form (8/R^2)(s-b)(s-c), cyclically.

    Equals the pairwise sums of the principal curvatures to machine precision.
    """
    s = semiperimeter(f)
    scale = 8.0 / f.r_squared
    r11 = scale * ((s - f.b) * (s - f.c))
    r22 = scale * ((s - f.a) * (s - f.c))
    r33 = scale * ((s - f.a) * (s - f.b))
    return (r11, r22, r33)


def scalar_curvature(f: StretchFactors) -> float:
    """Ricci scalar, twice the sum of the principal curvatures."""
    k1, k2, k3 = principal_curvatures(f)
    return 2.0 * (k1 + k2 + k3)


def connection_coefficients(f: StretchFactors) -> tuple[float, float, float]:
    """Diagonal coefficients of the vectorial connection form.

    ((a - b - c)/R, (b - a - c)/R, (c - a - b)/R) with R = sqrt(r_squared).
    """
    r = math.sqrt(f.r_squared)
    return (
        (f.a - f.b - f.c) / r,
        (f.b - f.a - f.c) / r,
        (f.c - f.a - f.b) / r,
    )


def curvature_summary(f: StretchFactors) -> CurvatureSummary:
    """Bundle curvatures with the trace relations applied exactly."""
    k1, k2, k3 = principal_curvatures(f)
    return CurvatureSummary(
        kappa1=k1, kappa2=k2, kappa3=k3,
        ricci11=k2 + k3, ricci22=k1 + k3, ricci33=k1 + k2,
        scalar=2.0 * (k1 + k2 + k3),
    )


def metric_coeffs(f: StretchFactors) -> MetricCoeffs:
    """Metric coefficients (u, v, w) = (1/(bc), 1/(ac), 1/(ab))."""
    return MetricCoeffs(
        u=1.0 / (f.b * f.c),
        v=1.0 / (f.a * f.c),
        w=1.0 / (f.a * f.b),
    )


def stretch_from_metric(m: MetricCoeffs) -> tuple[float, float, float]:
    """Invert metric coefficients back to stretch factors.

    abc = 1/sqrt(uvw), hence a = u * abc and cyclically.  Round-trips with
    :func:`metric_coeffs` to within 1e-12 relative.
    """
    root = math.sqrt(m.u * m.v * m.w)
    return (m.u / root, m.v / root, m.w / root)


def _sign(value: float, deadband: float) -> int:
    if abs(value) <= deadband:
        return 0
    return 1 if value > 0.0 else -1


def classify(f: StretchFactors, eq_tol: float = DEFAULT_EQ_TOL) -> Classification:
    """Classify the shape kind and report curvature signs.

    Equality of stretch factors is decided relative to the largest factor:
    after sorting a <= b <= c, the tests are (b - a) <= eq_tol * c and
    (c - b) <= eq_tol * c, with a <= eq_tol * c flagging a degenerate shape.
    Signs use a deadband of eq_tol * max|kappa| so that the measure-zero
    vanishing loci are reported as zeros when hit by construction.
    """
    if eq_tol < 0.0:
        raise DomainError(f"eq_tol must be nonnegative, got {eq_tol!r}")
    lo, mid, hi = sorted((f.a, f.b, f.c))

    if lo <= eq_tol * hi:
        shape = ShapeKind.DEGENERATE
    else:
        low_pair_equal = (mid - lo) <= eq_tol * hi
        high_pair_equal = (hi - mid) <= eq_tol * hi
        if low_pair_equal and high_pair_equal:
            shape = ShapeKind.ISOTROPIC
        elif low_pair_equal:
            shape = ShapeKind.SNAKE
        elif high_pair_equal:
            shape = ShapeKind.TURTLE
        else:
            shape = ShapeKind.DRAGON

    kappas = principal_curvatures(f)
    riccis = ricci_eigenvalues(f)
    deadband = eq_tol * max(abs(k) for k in kappas)
    return Classification(
        shape=shape,
        curvature_signs=tuple(_sign(k, deadband) for k in kappas),
        ricci_signs=tuple(_sign(r, deadband) for r in riccis),
        scalar_sign=_sign(scalar_curvature(f), deadband),
    )
