"""Exact left-invariant word metric for the canonical four-generator set.

The closed form: reduce distance(a, b) to h = inverse(a) * b = (f, k). The
lamp cost is the total absolute lamp mass of f. The cursor must visit every
support position, starting at 0 and ending at k, so with
L = min(supp(f) + {0, k}) and R = max(supp(f) + {0, k}) the travel cost is the
better of sweeping left first or right first:

    left-first  : (0 - L) + (R - L) + (R - k)
    right-first : (R - 0) + (R - L) + (k - L)

When the support already lies between 0 and k both sweeps degenerate to |k|.
Correctness is gated on the breadth-first oracle over the Cayley graph; the
two agree exactly on the whole radius-8 ball.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator

from .errors import RadiusExceededError, ResourceLimitError, ValidationError
from .group import (
    GroupElement,
    IDENTITY,
    LampConfig,
    canonical_generators,
    inverse,
    multiply,
)

__all__ = [
    "MetricWitness",
    "BallTable",
    "distance",
    "distance_bfs",
    "ball",
    "neighbors",
    "lower_bound_profile",
    "profile_bracket",
]

DEFAULT_BALL_CAP = 10_000_000


@dataclass(frozen=True, slots=True)
class MetricWitness:
    """Distance plus its decomposition. total == lamp_cost + travel_cost."""

    total: int
    lamp_cost: int
    travel_cost: int
    direction: str  # "left-first" | "right-first" | "degenerate"


def _travel_parts(support: tuple[int, ...], k: int) -> tuple[int, int, int, int]:
    if support:
        lo = support[0]
        hi = support[-1]
        left = min(lo, 0, k)
        right = max(hi, 0, k)
    else:
        left = min(0, k)
        right = max(0, k)
    return left, right, (0 - left) + (right - left) + (right - k), (right - 0) + (right - left) + (k - left)


def witness_for(lamps: LampConfig, cursor: int) -> MetricWitness:
    """Witness for the distance from the identity to (lamps, cursor)."""
    lamp_cost = sum(abs(v) for _, v in lamps.entries)
    support = lamps.support()
    left, right, left_first, right_first = _travel_parts(support, cursor)
    travel = min(left_first, right_first)
    segment_lo, segment_hi = min(0, cursor), max(0, cursor)
    if left == segment_lo and right == segment_hi:
        direction = "degenerate"  # support inside the 0..cursor segment
    elif left_first <= right_first:
        direction = "left-first"
    else:
        direction = "right-first"
    return MetricWitness(lamp_cost + travel, lamp_cost, travel, direction)


def distance(a: GroupElement, b: GroupElement) -> MetricWitness:
    """Exact graph distance in the canonical Cayley graph, with witness."""
    h = multiply(inverse(a), b)
    return witness_for(h.lamps, h.cursor)


def neighbors(g: GroupElement) -> list[GroupElement]:
    """The four Cayley-graph neighbors g * s."""
    return [multiply(g, s) for s in canonical_generators()]


def distance_bfs(a: GroupElement, b: GroupElement, max_radius: int) -> int:
    """Breadth-first oracle. Exact, but cost grows with the ball volume.

    Raises RadiusExceededError when the target is farther than max_radius.
    """
    if max_radius < 0:
        raise ValidationError("max_radius must be nonnegative")
    target = multiply(inverse(a), b)
    if target == IDENTITY:
        return 0
    seen = {IDENTITY}
    frontier = [IDENTITY]
    for radius in range(1, max_radius + 1):
        next_frontier = []
        for g in frontier:
            for h in neighbors(g):
                if h in seen:
                    continue
                if h == target:
                    return radius
                seen.add(h)
                next_frontier.append(h)
        frontier = next_frontier
    raise RadiusExceededError(f"no path within radius {max_radius}")


@dataclass(frozen=True)
class BallTable:
    """All elements within a radius of the identity, with exact distances."""

    radius: int
    distances: dict[GroupElement, int]

    def __len__(self) -> int:
        return len(self.distances)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.distances)

    def __contains__(self, g: GroupElement) -> bool:
        return g in self.distances

    def distance_of(self, g: GroupElement) -> int:
        return self.distances[g]

    def by_encoding(self) -> dict[bytes, int]:
        from .group import encode

        return {encode(g): d for g, d in self.distances.items()}

    def layer_sizes(self) -> list[int]:
        sizes = [0] * (self.radius + 1)
        for d in self.distances.values():
            sizes[d] += 1
        return sizes


def ball(radius: int, cap: int = DEFAULT_BALL_CAP) -> BallTable:
    """Enumerate the radius ball around the identity by breadth-first search."""
    if radius < 0:
        raise ValidationError("radius must be nonnegative")
    distances = {IDENTITY: 0}
    frontier = deque([IDENTITY])
    while frontier:
        g = frontier.popleft()
        d = distances[g]
        if d == radius:
            continue
        for h in neighbors(g):
            if h not in distances:
                distances[h] = d + 1
                if len(distances) > cap:
                    raise ResourceLimitError(f"ball enumeration exceeded cap {cap}")
                frontier.append(h)
    return BallTable(radius, distances)


def lower_bound_profile(g: GroupElement) -> tuple[int, int, int]:
    """(cursor, spread, lamp mass): the coarse size profile of an element.

    spread is the farthest support position measured from the cursor, so the
    lamps live inside [cursor - spread, cursor + spread].
    """
    k = g.cursor
    spread = max((abs(p - k) for p in g.lamps.support()), default=0)
    lamp_sum = sum(abs(v) for _, v in g.lamps.entries)
    return (k, spread, lamp_sum)


def profile_bracket(profile: tuple[int, int, int]) -> tuple[int, int]:
    """Two-sided distance bracket implied by a profile.

    max(|k|, spread, mass) <= distance <= 2(|k| + 2 spread) + mass. The upper
    side holds because the two sweep strategies sum to 4(R - L), so the better
    one costs at most 2(R - L) <= 2(|k| + 2 spread).
    """
    k, spread, lamp_sum = profile
    lower = max(abs(k), spread, lamp_sum)
    upper = 2 * (abs(k) + 2 * spread) + lamp_sum
    return (lower, upper)
