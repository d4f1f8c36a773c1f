"""The explicit Hilbert-space embedding and its certified norms.

An element (f, k) maps to cursor (+) lamps (+) phi, where phi assigns, to each
abstract orthonormal coordinate keyed by (half-line side, endpoint n,
restriction of f to that half-line), the coefficient (n - k)^alpha on the
right side (n > k) and (k - n)^alpha on the left (n < k). Only disjoint
supports and unit norms of the underlying vectors matter, so the coordinates
stay abstract keys and no function space is materialized.

Norms and distances are certified: coefficients are enumerated inside an
explicit window, and the infinite tail (where both restrictions vanish and the
per-endpoint difference is (m + delta)^alpha - m^alpha with delta the cursor
gap) is summed in closed form as a binomial series in Hurwitz zeta values,

    sum_{m >= m0} ((m + delta)^alpha - m^alpha)^2
        = sum_{p >= 2} c_p delta^p zeta(p - 2 alpha, m0),

with c_p the convolution of binomial coefficients C(alpha, j) and a rigorous
geometric remainder once delta/m0 <= 1/4. The reported errorBound covers the
truncation of that series; it always lands at or below the requested eps.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy.special import zeta

from . import metric
from .errors import EstimationError, InvariantViolation, ResourceLimitError, ValidationError
from .group import GroupElement, IDENTITY, LampConfig, canonical_generators, encode

__all__ = [
    "EmbeddingKey",
    "TailDescriptor",
    "SparseHilbertVector",
    "EmbeddingImage",
    "half_line_restriction",
    "half_line_coefficient",
    "embedding_distance",
    "embedding_norm",
    "embedding_image",
    "lipschitz_audit",
    "CompressionReport",
    "norm_observations",
    "fit_exponent",
    "compression_scan",
    "LowerBoundAudit",
    "lower_bound_audit",
    "ball_elements",
    "pure_cursor_family",
    "pure_lamp_family",
    "balanced_family",
    "worst_balanced_exponent",
    "random_element_sampler",
    "lower_shape_exponent",
]

EPS_FLOOR = 1e-9
BASE_MARGIN = 16
SERIES_MAX_ORDER = 400


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 0.5:
        raise ValidationError("alpha must lie in the open interval (0, 1/2)")
    return alpha


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if eps < EPS_FLOOR:
        raise ValidationError(f"eps must be >= {EPS_FLOOR} (floating accumulation floor)")
    return eps


@dataclass(frozen=True, slots=True)
class EmbeddingKey:
    """One abstract orthonormal coordinate."""

    side: str  # "right" | "left"
    endpoint: int
    restriction: LampConfig

    def __post_init__(self):
        if self.side not in ("right", "left"):
            raise ValidationError("side must be 'right' or 'left'")
        support = self.restriction.support()
        if support:
            if self.side == "right" and support[0] < self.endpoint:
                raise ValidationError("restriction leaks outside the right half-line")
            if self.side == "left" and support[-1] > self.endpoint:
                raise ValidationError("restriction leaks outside the left half-line")


def half_line_restriction(lamps: LampConfig, side: str, endpoint: int) -> LampConfig:
    """Restriction of a lamp assignment to [endpoint, inf) or (-inf, endpoint]."""
    positions = [p for p, _ in lamps.entries]
    if side == "right":
        cut = bisect_left(positions, endpoint)
        return LampConfig(lamps.entries[cut:])
    if side == "left":
        cut = bisect_right(positions, endpoint)
        return LampConfig(lamps.entries[:cut])
    raise ValidationError("side must be 'right' or 'left'")


def half_line_coefficient(lamps: LampConfig, cursor: int, key: EmbeddingKey, alpha: float) -> float:
    """Coefficient of one phi coordinate for the element (lamps, cursor)."""
    alpha = _check_alpha(alpha)
    if key.side == "right":
        if key.endpoint <= cursor:
            return 0.0
        if half_line_restriction(lamps, "right", key.endpoint) != key.restriction:
            return 0.0
        return float(key.endpoint - cursor) ** alpha
    if key.endpoint >= cursor:
        return 0.0
    if half_line_restriction(lamps, "left", key.endpoint) != key.restriction:
        return 0.0
    return float(cursor - key.endpoint) ** alpha


def _binomial_coefficients(alpha: float, order: int) -> list[float]:
    # b[j] = C(alpha, j) for j = 1..order, built by the downward recurrence
    b = [alpha]
    for j in range(1, order):
        b.append(b[-1] * (alpha - j) / (j + 1))
    return b


def shifted_power_tail(delta: int, m0: int, alpha: float, tol: float) -> tuple[float, float]:
    """(estimate, remainder bound) for sum_{m >= m0} ((m+delta)^a - m^a)^2.

    Requires delta/m0 <= 1/4 so the binomial series in delta/m converges
    geometrically. The remainder bound is rigorous:
    |c_p| <= 2 alpha^2 and zeta(s, m0) <= m0^{-s} (1 + m0/(s - 1)).
    """
    if delta == 0:
        return (0.0, 0.0)
    if delta < 0 or m0 <= 0:
        raise ValidationError("delta must be >= 0 and m0 positive")
    u = delta / m0
    if u > 0.25:
        raise ValidationError("window margin too small: delta/m0 must be <= 1/4")
    b = _binomial_coefficients(alpha, SERIES_MAX_ORDER)
    log_m0 = math.log(m0)
    m0_2a = m0 ** (2 * alpha)
    terms: list[float] = []
    slack = 0.0
    for p in range(2, SERIES_MAX_ORDER + 1):
        c_p = math.fsum(b[j - 1] * b[p - j - 1] for j in range(1, p))
        s = p - 2 * alpha
        if s * log_m0 < 700.0:
            zr = float(zeta(s, m0)) * m0**s  # in [1, 1 + m0/(s-1)]
        else:
            # beyond float range; bracket zeta by the integral comparison
            zr = 0.5 + m0 / (s - 1)
            slack += abs(c_p) * u**p * m0_2a * 0.5
        terms.append(c_p * u**p * m0_2a * zr)
        remainder = (
            2 * alpha**2 * m0_2a * (1 + m0 / (p - 2 * alpha)) * u ** (p + 1) / (1 - u)
        )
        if remainder + slack <= tol:
            return (math.fsum(terms), remainder + slack)
    raise ResourceLimitError("tail series did not certify within the order cap")


class _SideSum(NamedTuple):
    window: float  # exact-window contribution to the squared phi distance
    tail: float  # series estimate of the infinite tail
    remainder: float  # certified bound on the tail estimate's error
    cutoff: int  # last explicitly enumerated endpoint (right) / first (left)


def _restriction_suffixes(entries: tuple[tuple[int, int], ...]):
    positions = [p for p, _ in entries]

    def right_of(n: int) -> tuple:
        return entries[bisect_left(positions, n) :]

    def left_of(n: int) -> tuple:
        return entries[: bisect_right(positions, n)]

    return right_of, left_of


def _side_sum(
    a: GroupElement, b: GroupElement, alpha: float, side: str, margin: int, tail_tol: float
) -> _SideSum:
    k1, k2 = a.cursor, b.cursor
    delta = abs(k1 - k2)
    right_a, left_a = _restriction_suffixes(a.lamps.entries)
    right_b, left_b = _restriction_suffixes(b.lamps.entries)
    terms: list[float] = []
    if side == "right":
        k_hi = max(k1, k2)
        support_hi = max(
            [p for p, _ in a.lamps.entries] + [p for p, _ in b.lamps.entries],
            default=k_hi,
        )
        cutoff = max(k_hi + margin, support_hi)
        for n in range(min(k1, k2) + 1, cutoff + 1):
            ca = float(n - k1) ** alpha if n > k1 else 0.0
            cb = float(n - k2) ** alpha if n > k2 else 0.0
            if right_a(n) == right_b(n):
                terms.append((ca - cb) ** 2)
            else:
                terms.append(ca * ca + cb * cb)
        m0 = cutoff - k_hi + 1
    else:
        k_lo = min(k1, k2)
        support_lo = min(
            [p for p, _ in a.lamps.entries] + [p for p, _ in b.lamps.entries],
            default=k_lo,
        )
        cutoff = min(k_lo - margin, support_lo)
        for n in range(cutoff, max(k1, k2)):
            ca = float(k1 - n) ** alpha if n < k1 else 0.0
            cb = float(k2 - n) ** alpha if n < k2 else 0.0
            if left_a(n) == left_b(n):
                terms.append((ca - cb) ** 2)
            else:
                terms.append(ca * ca + cb * cb)
        m0 = k_lo - cutoff + 1
    tail, remainder = shifted_power_tail(delta, m0, alpha, tail_tol)
    return _SideSum(math.fsum(terms), tail, remainder, cutoff)


def _squared_parts(
    a: GroupElement, b: GroupElement, alpha: float, eps: float, margin: int | None
) -> tuple[int, float, float]:
    """(exact cursor+lamp part, phi part estimate, certified phi error)."""
    delta = abs(a.cursor - b.cursor)
    if margin is None:
        margin = max(4 * delta, BASE_MARGIN)
    elif margin < max(4 * delta, 1):
        raise ValidationError("margin must be at least max(4 |cursor gap|, 1)")
    lamp_diff = dict(a.lamps.entries)
    for p, v in b.lamps.entries:
        q = lamp_diff.get(p, 0) - v
        if q:
            lamp_diff[p] = q
        else:
            lamp_diff.pop(p, None)
    exact = delta * delta + sum(v * v for v in lamp_diff.values())
    # clamp so the slack stays below the squared gap of distinct elements
    # (>= 1), keeping error_bound <= eps even for generous eps requests
    tail_tol = min(eps, 1.0) ** 2 / 8.0
    right = _side_sum(a, b, alpha, "right", margin, tail_tol)
    left = _side_sum(a, b, alpha, "left", margin, tail_tol)
    phi = math.fsum([right.window, left.window, right.tail, left.tail])
    return exact, phi, right.remainder + left.remainder


def embedding_distance(
    a: GroupElement,
    b: GroupElement,
    alpha: float,
    eps: float = 1e-6,
    margin: int | None = None,
) -> tuple[float, float]:
    """Certified distance between two embedded elements.

    Returns (value, error_bound) with |value - true| <= error_bound <= eps.
    The optional margin widens the explicit window (used by the monotonicity
    tests); the default already satisfies the series precondition.
    """
    alpha = _check_alpha(alpha)
    eps = _check_eps(eps)
    if a == b:
        return (0.0, 0.0)
    exact, phi, slack = _squared_parts(a, b, alpha, eps, margin)
    total = exact + phi
    # distinct elements differ in cursor or lamps, so total >= 1 and the
    # square root inflates the squared-value error by at most 1/2
    value = math.sqrt(total)
    error_bound = slack / (math.sqrt(max(total - slack, 0.0)) + value)
    return (value, error_bound)


def embedding_norm(g: GroupElement, alpha: float, eps: float = 1e-6) -> tuple[float, float]:
    """Certified norm of one embedded element (distance to the identity)."""
    return embedding_distance(g, IDENTITY, alpha, eps)


@dataclass(frozen=True)
class TailDescriptor:
    """Closed-form family of coefficients beyond the explicit window.

    On the named side, every endpoint past the cutoff carries the coefficient
    (n - cursor_a)^alpha - (n - cursor_b)^alpha (mirrored on the left), whose
    total squared mass is mass with certified error at most mass_slack.
    """

    side: str
    cutoff: int
    cursor_a: int
    cursor_b: int
    mass: float
    mass_slack: float

    @property
    def certified_mass_bound(self) -> float:
        return self.mass + self.mass_slack


@dataclass(frozen=True)
class SparseHilbertVector:
    """Finitely many explicit coefficients plus certified tails."""

    coefficients: dict[EmbeddingKey, float]
    tails: tuple[TailDescriptor, ...]

    def squared_norm(self) -> tuple[float, float]:
        body = math.fsum(c * c for c in self.coefficients.values())
        tail = math.fsum(t.mass for t in self.tails)
        slack = math.fsum(t.mass_slack for t in self.tails)
        return (body + tail, slack)


@dataclass(frozen=True)
class EmbeddingImage:
    """cursor (+) lamps (+) phi difference, with a certified norm."""

    cursor_part: int
    lamp_part: LampConfig
    phi_part: SparseHilbertVector

    def norm(self) -> tuple[float, float]:
        phi_sq, slack = self.phi_part.squared_norm()
        total = self.cursor_part**2 + sum(v * v for _, v in self.lamp_part.entries) + phi_sq
        if total <= 0.0 and slack == 0.0:
            return (0.0, 0.0)
        value = math.sqrt(total)
        denom = math.sqrt(max(total - slack, 0.0)) + value
        return (value, slack / denom if denom > 0 else math.sqrt(slack))


def embedding_image(g: GroupElement, alpha: float, eps: float = 1e-6) -> EmbeddingImage:
    """Materialize the image of one element relative to the identity.

    Keys with a nonzero lamp restriction get explicit coefficients (the
    identity contributes nothing there); zero-restriction keys inside the
    window get the explicit difference of the two pure-cursor coefficients;
    past the window the difference families are stored as TailDescriptors.
    """
    alpha = _check_alpha(alpha)
    eps = _check_eps(eps)
    k = g.cursor
    delta = abs(k)
    margin = max(4 * delta, BASE_MARGIN)
    entries = g.lamps.entries
    support = [p for p, _ in entries]
    coeffs: dict[EmbeddingKey, float] = {}
    tails: list[TailDescriptor] = []
    tail_tol = eps * eps / 8.0

    k_hi = max(k, 0)
    cutoff_r = max(k_hi + margin, support[-1] if support else k_hi)
    for n in range(min(k, 0) + 1, cutoff_r + 1):
        restriction = half_line_restriction(g.lamps, "right", n)
        cg = float(n - k) ** alpha if n > k else 0.0
        ce = float(n) ** alpha if n > 0 else 0.0
        if restriction:
            # the element's own key, untouched by the identity
            if cg:
                coeffs[EmbeddingKey("right", n, restriction)] = cg
            if ce:
                coeffs[EmbeddingKey("right", n, LampConfig())] = -ce
        elif cg - ce:
            coeffs[EmbeddingKey("right", n, LampConfig())] = cg - ce
    if delta:
        mass, slack = shifted_power_tail(delta, cutoff_r - k_hi + 1, alpha, tail_tol)
        tails.append(TailDescriptor("right", cutoff_r, k, 0, mass, slack))

    k_lo = min(k, 0)
    cutoff_l = min(k_lo - margin, support[0] if support else k_lo)
    for n in range(cutoff_l, max(k, 0)):
        restriction = half_line_restriction(g.lamps, "left", n)
        cg = float(k - n) ** alpha if n < k else 0.0
        ce = float(-n) ** alpha if n < 0 else 0.0
        if restriction:
            if cg:
                coeffs[EmbeddingKey("left", n, restriction)] = cg
            if ce:
                coeffs[EmbeddingKey("left", n, LampConfig())] = -ce
        elif cg - ce:
            coeffs[EmbeddingKey("left", n, LampConfig())] = cg - ce
    if delta:
        mass, slack = shifted_power_tail(delta, k_lo - cutoff_l + 1, alpha, tail_tol)
        tails.append(TailDescriptor("left", cutoff_l, k, 0, mass, slack))

    return EmbeddingImage(k, g.lamps, SparseHilbertVector(coeffs, tuple(tails)))


def lipschitz_audit(alpha: float, eps: float = EPS_FLOOR) -> float:
    """Largest embedded norm among the four generators.

    By invariance this bounds the Lipschitz constant of the whole embedding.
    The lamp generators contribute exactly 1; the cursor generators carry the
    half-line series and dominate.
    """
    values = [embedding_norm(s, alpha, eps)[0] for s in canonical_generators()]
    return max(values)


@dataclass(frozen=True)
class CompressionReport:
    """Distance/norm observations with fitted shape constants."""

    alpha: float
    observations: tuple[tuple[int, float, float], ...]  # (distance, norm, error bound)
    fitted_exponent: float
    fitted_lower_constant: float
    lipschitz_max: float


def lower_shape_exponent(alpha: float) -> float:
    """The lower-bound shape exponent (2 alpha + 1) / (2 alpha + 2)."""
    alpha = _check_alpha(alpha)
    return (2 * alpha + 1) / (2 * alpha + 2)


def norm_observations(
    elements: Iterable[GroupElement], alpha: float, eps: float
) -> list[tuple[int, float, float]]:
    out = []
    for g in elements:
        d = metric.distance(IDENTITY, g).total
        if d < 1:
            raise ValidationError("sampler produced the identity (distance 0)")
        value, bound = embedding_norm(g, alpha, eps)
        out.append((d, value, bound))
    return out


def fit_exponent(observations: Sequence[tuple[int, float, float]]) -> tuple[float, float]:
    """(slope, intercept) of log norm against log distance."""
    if len(observations) < 4:
        raise EstimationError("need >= 4 observations for the exponent fit")
    distances = np.array([d for d, _, _ in observations], dtype=float)
    norms = np.array([v for _, v, _ in observations], dtype=float)
    if np.all(distances == distances[0]):
        raise EstimationError("degenerate sample: all observations at one distance")
    if np.any(norms <= 0):
        raise EstimationError("nonpositive norm in observations")
    x = np.log(distances)
    y = np.log(norms)
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    return (float(slope), float(intercept))


def compression_scan(
    alpha: float,
    sampler: Callable[[np.random.Generator, int], Iterable[GroupElement]],
    count: int,
    eps: float,
    seed: int,
) -> CompressionReport:
    """Sample elements, record (distance, certified norm), fit the shape.

    fitted_lower_constant is the smallest ratio norm / distance^shape for the
    lower-bound shape exponent; lipschitz_max is the largest norm / distance.
    """
    alpha = _check_alpha(alpha)
    eps = _check_eps(eps)
    if count < 10:
        raise ValidationError("count must be >= 10")
    rng = np.random.default_rng(seed)
    elements = list(sampler(rng, count))
    if not elements:
        raise EstimationError("sampler produced no elements")
    observations = norm_observations(elements, alpha, eps)
    slope, _ = fit_exponent(observations)
    shape = lower_shape_exponent(alpha)
    lower_constant = min(v / d**shape for d, v, _ in observations)
    lipschitz_max = max(v / d for d, v, _ in observations)
    return CompressionReport(alpha, tuple(observations), slope, lower_constant, lipschitz_max)


class LowerBoundAudit(NamedTuple):
    norm2: float
    k_term: float
    lamp_term: float
    travel_term: float
    rhs: float


def lower_bound_audit(g: GroupElement, alpha: float, eps: float = 1e-6) -> LowerBoundAudit:
    """The three exact lower-bound ingredients against the squared norm.

    k_term = cursor^2 and lamp_term = sum f^2 sit inside the cursor and lamp
    summands; travel_term = sum_{l=1}^{spread} l^{2 alpha} is carried by the
    phi keys with nonzero restriction on the side of the farthest lamp. Each
    ingredient is individually asserted against norm^2; rhs is the squared
    lower-bound shape of the distance, reported for scan-style comparisons.
    """
    alpha = _check_alpha(alpha)
    eps = _check_eps(eps)
    value, bound = embedding_norm(g, alpha, eps)
    norm2 = value * value
    slack = 2 * value * bound + bound * bound
    k, spread, _ = metric.lower_bound_profile(g)
    k_term = float(k * k)
    lamp_term = float(sum(v * v for _, v in g.lamps.entries))
    travel_term = math.fsum(float(l) ** (2 * alpha) for l in range(1, spread + 1))
    d = metric.distance(IDENTITY, g).total
    rhs = float(d) ** (2 * lower_shape_exponent(alpha)) if d else 0.0
    for name, term in (("k", k_term), ("lamp", lamp_term), ("travel", travel_term)):
        if term > norm2 + slack:
            raise InvariantViolation(
                f"squared norm {norm2} fails to dominate the {name} term {term}"
            )
    return LowerBoundAudit(norm2, k_term, lamp_term, travel_term, rhs)


def ball_elements(radius: int) -> list[GroupElement]:
    """Every element at distance 1..radius, deterministically ordered."""
    table = metric.ball(radius)
    out = [g for g in table if table.distance_of(g) >= 1]
    out.sort(key=encode)
    return out


def pure_cursor_family(k_max: int) -> list[GroupElement]:
    if k_max < 1:
        raise ValidationError("k_max must be >= 1")
    return [GroupElement(LampConfig(), k) for k in range(1, k_max + 1)]


def pure_lamp_family(spread: int, max_mass: int) -> list[GroupElement]:
    """Single lamp of growing value at a fixed position (cursor stays home)."""
    if spread < 0 or max_mass < 1:
        raise ValidationError("spread must be >= 0 and max_mass >= 1")
    return [GroupElement(LampConfig(((spread, w),)), 0) for w in range(1, max_mass + 1)]


def balanced_family(alpha: float, prefactor: float, max_distance: int) -> list[GroupElement]:
    """Lamp mass ~ prefactor * spread^(1 + alpha) spread evenly over 1..spread.

    These are the elements whose travel and lamp costs trade off at the
    lower-bound shape exponent; distance is exactly 2 spread + mass.
    """
    alpha = _check_alpha(alpha)
    if prefactor <= 0:
        raise ValidationError("prefactor must be positive")
    out = []
    m = 1
    while True:
        mass = max(m, round(prefactor * m ** (1 + alpha)))
        if 2 * m + mass > max_distance:
            break
        base, extra = divmod(mass, m)
        entries = tuple(
            (position, base + 1 if position <= extra else base)
            for position in range(1, m + 1)
        )
        out.append(GroupElement(LampConfig(entries), 0))
        m += 1
    return out


def worst_balanced_exponent(
    alpha: float,
    prefactors: Sequence[float] = (1, 2, 4, 8, 16),
    max_distance: int = 200,
    eps: float = 1e-6,
) -> tuple[float, dict[float, float]]:
    """Fitted exponent of each balanced family; the minimum is the worst case.

    Larger prefactors weight lamp mass over travel, which is where the
    lower-bound shape is tight; the sweep's minimum is the honest worst case.
    """
    fits: dict[float, float] = {}
    for prefactor in prefactors:
        family = balanced_family(alpha, prefactor, max_distance)
        observations = norm_observations(family, alpha, eps)
        slope, _ = fit_exponent(observations)
        fits[prefactor] = slope
    worst = min(fits.values())
    return (worst, fits)


def random_element_sampler(
    max_cursor: int = 6, max_spread: int = 4, max_value: int = 3
) -> Callable[[np.random.Generator, int], list[GroupElement]]:
    """Random nonidentity elements inside a cursor/spread/value budget."""

    def sample(rng: np.random.Generator, count: int) -> list[GroupElement]:
        out = []
        while len(out) < count:
            cursor = int(rng.integers(-max_cursor, max_cursor + 1))
            entries = []
            for position in range(-max_spread, max_spread + 1):
                if rng.random() < 0.35:
                    value = int(rng.integers(1, max_value + 1)) * (1 if rng.random() < 0.5 else -1)
                    entries.append((position, value))
            g = GroupElement(LampConfig(tuple(entries)), cursor)
            if g != IDENTITY:
                out.append(g)
        return out

    return sample
