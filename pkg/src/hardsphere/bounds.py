"""Closed-form bound calculus: Lambert-W machinery and the packing-density,
pressure, entropy, and cell-model bounds it yields.

The finite-d density bound is

    alpha >= lambda * exp(-W(lambda * 2^d * exp(lambda * 2 * 3^(d/2))))

evaluated exactly (no asymptotic fudging); its d -> infinity main term is
log(2/sqrt(3)) * d / 2^d at the fugacity choice lambda = 3^(-d/2)/d.
Every asymptotic-only formula is exposed with an explicit main-term-only
flag, since the vanishing correction terms are not computable.
"""

import math
from dataclasses import dataclass, field

LOG2 = math.log(2.0)
LOG3_HALF = 0.5 * math.log(3.0)
LOG_2_OVER_SQRT3 = math.log(2.0 / math.sqrt(3.0))  # 0.14384103622589045


def lambert_w0(x, tol=1e-14, max_iter=64):
    """Principal branch of w * e^w = x for x >= -1/e, by Halley iteration.

    Seeded with log x - log log x for large x, a branch-point series near
    -1/e; 3-4 iterations reach machine precision over the needed range.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    min_x = -1.0 / math.e
    if x < min_x - 1e-12:
        raise ValueError(f"argument must be >= -1/e, got {x}")
    x = max(x, min_x)
    if x == 0.0:
        return 0.0
    if x > math.e:
        lx = math.log(x)
        w = lx - math.log(lx)
    elif x > 0.0:
        w = x / (1.0 + x)
    else:
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + p - p * p / 3.0
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        denom = ew * (w + 1.0)
        if denom != 0.0:
            denom -= (w + 2.0) * f / (2.0 * w + 2.0)
        if denom == 0.0:
            break
        step = f / denom
        w -= step
        if abs(step) <= tol * max(1.0, abs(w)):
            break
    return w


def _w_from_log(y, tol=1e-14, max_iter=64):
    """Solve w * e^w = e^y, i.e. w + log w = y, stable for huge y."""
    if y <= 30.0:
        return lambert_w0(math.exp(y))
    w = y - math.log(y)
    for _ in range(max_iter):
        # Newton on g(w) = w + log w - y
        step = (w + math.log(w) - y) * w / (w + 1.0)
        w -= step
        if abs(step) <= tol * w:
            break
    return w


def theorem1_bound(d, lam):
    """Exact finite-d value of the density lower bound at fugacity lambda.

    Evaluated in the log domain throughout: the W argument
    lambda * 2^d * e^(lambda*2*3^(d/2)) overflows binary floats near d=700
    otherwise.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if lam <= 0:
        raise ValueError(f"fugacity must be positive, got {lam}")
    log_lam = math.log(lam)
    log_penalty = log_lam + math.log(2.0) + d * LOG3_HALF  # log(lambda*2*3^(d/2))
    if log_penalty > 700.0:
        return 0.0  # penalty e^(huge): the bound underflows to zero
    penalty = math.exp(log_penalty)
    y = log_lam + d * LOG2 + penalty
    z_star = _w_from_log(y)
    out = log_lam - z_star
    return math.exp(out) if out > -745.0 else 0.0


def proof_fugacity(d):
    """The fugacity d^{-1} 3^{-d/2} at which the finite-d bound is evaluated."""
    return math.exp(-math.log(d) - d * LOG3_HALF)


def theorem1_bound_monotone(d, lam, grid=256):
    """Monotonicity-corrected bound: max of the raw formula over fugacities
    <= lam (the expected density only grows with the fugacity, so any
    smaller fugacity's bound applies)."""
    if lam <= 0:
        raise ValueError(f"fugacity must be positive, got {lam}")
    lo = math.log(lam) - 4.0 * max(1, d)
    best = 0.0
    for i in range(grid + 1):
        ll = lo + (math.log(lam) - lo) * i / grid
        best = max(best, theorem1_bound(d, math.exp(ll)))
    return best


def asymptotic_alpha(d):
    """Main term log(2/sqrt(3)) * d / 2^d of the density bound."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return LOG_2_OVER_SQRT3 * d * math.exp(-d * LOG2)


@dataclass(frozen=True)
class GeneralCBound:
    finite_d: float
    asymptotic: float
    main_term_only: bool = True  # applies to the asymptotic field


def general_c_bound(d, c):
    """Density bound at fugacity e^{-cd}: finite-d exact value next to the
    asymptotic main term (log 2 - c) * d / 2^d, for c in (log3/2, log2)."""
    if not (LOG3_HALF < c < LOG2):
        raise ValueError(f"c must lie in (log(3)/2, log(2)), got {c}")
    lam = math.exp(-c * d)
    return GeneralCBound(
        finite_d=theorem1_bound(d, lam),
        asymptotic=(LOG2 - c) * d * math.exp(-d * LOG2),
    )


@dataclass(frozen=True)
class PressureBound:
    main_term: float
    finite_d: float
    main_term_only: bool = True  # applies to main_term; finite_d is integrated


def pressure_bound(d, c, nodes=1000):
    """Lower bound on the pressure at fugacity e^{-cd}.

    Main term (log2 - c)^2 / 2 * d^2 / 2^d, plus a finite-d companion from
    integrating the finite-d density bound over fugacities below e^{-cd}
    (trapezoid rule over u in [c, log 2])."""
    if not (LOG3_HALF <= c < LOG2):
        raise ValueError(f"c must lie in [log(3)/2, log(2)), got {c}")
    main = 0.5 * (LOG2 - c) ** 2 * d * d * math.exp(-d * LOG2)
    us = [c + (LOG2 - c) * i / nodes for i in range(nodes + 1)]
    vals = [theorem1_bound(d, math.exp(-u * d)) for u in us]
    h = (LOG2 - c) / nodes
    integral = h * (0.5 * vals[0] + sum(vals[1:-1]) + 0.5 * vals[-1])
    return PressureBound(main_term=main, finite_d=d * integral)


@dataclass(frozen=True)
class EntropyBound:
    alpha: float
    value: float
    main_term_only: bool = True


def entropy_bound(d):
    """Main-term entropy-density bound: value -log(2/sqrt(3)) * d attained
    at density log(2/sqrt(3)) * d / 2^d."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return EntropyBound(alpha=asymptotic_alpha(d), value=-LOG_2_OVER_SQRT3 * d)


@dataclass(frozen=True)
class CellModelBound:
    value: float  # per-center log-probability main term d*log(eps) - 1
    density: float  # packing density certified: c1 * (1-eps)^d * d / 2^d
    main_term_only: bool = True


def cell_model_bound(d, c1, c2, eps):
    """Entropy from shrinking the cells of a fixed dense packing by eps.

    At eps = c2/d the certified density stays Theta(d * 2^-d) but the
    entropy is only ~ -d log d per center, far below the direct bound.
    """
    if c1 <= 0 or c2 <= 0:
        raise ValueError("c1 and c2 must be positive")
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return CellModelBound(
        value=d * math.log(eps) - 1.0,
        density=c1 * (1.0 - eps) ** d * d * math.exp(-d * LOG2),
    )


@dataclass
class BoundCurve:
    """A (parameter, value) curve of one bound family at one or many d."""

    kind: str  # alpha_lower | pressure_lower | entropy_lower | cell_model | asymptotic_alpha
    points: list = field(default_factory=list)  # (d, parameter, value)
    main_term_only: bool = False

    def add(self, d, parameter, value):
        if not math.isfinite(value):
            raise ValueError(f"non-finite bound value at d={d}, parameter={parameter}")
        self.points.append((d, parameter, value))

    def csv_rows(self):
        yield "d,parameter,value,kind,main_term_only"
        for d, p, v in self.points:
            yield f"{d},{p!r},{v!r},{self.kind},{str(self.main_term_only).lower()}"

    def dat_rows(self):
        """gnuplot-friendly two-column data."""
        for _, p, v in self.points:
            yield f"{p!r} {v!r}"
