"""Host Cayley graphs for the finite-chain experiments.

Each host exposes uniform-degree adjacency, an exact graph metric, and a
deterministic vertex ordering. The line and the grid use their closed-form
metrics; the wreath host delegates to the exact word metric, so none of the
chain constructions ever needs a graph search for distances.
"""

from __future__ import annotations

from collections import deque
from typing import Hashable, Iterable

from . import metric
from .errors import ResourceLimitError, ValidationError
from .group import GroupElement, LampConfig, encode

__all__ = [
    "ZLine",
    "ZGrid",
    "WreathCayley",
    "host_by_name",
    "interval",
    "box",
    "wreath_truncation",
    "ball_around",
    "union_of_balls",
]


class ZLine:
    """The integers with steps of one."""

    name = "z"
    degree = 2

    def neighbors(self, v: int) -> list[int]:
        return [v - 1, v + 1]

    def distance(self, u: int, v: int) -> int:
        return abs(u - v)

    def sort_key(self, v: int):
        return v

    def coordinates(self, v: int) -> tuple[float, ...]:
        return (float(v),)


class ZGrid:
    """The square grid: two independent integer coordinates, L1 metric."""

    name = "z2"
    degree = 4

    def neighbors(self, v: tuple[int, int]) -> list[tuple[int, int]]:
        x, y = v
        return [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]

    def distance(self, u: tuple[int, int], v: tuple[int, int]) -> int:
        return abs(u[0] - v[0]) + abs(u[1] - v[1])

    def sort_key(self, v: tuple[int, int]):
        return v

    def coordinates(self, v: tuple[int, int]) -> tuple[float, ...]:
        return (float(v[0]), float(v[1]))


class WreathCayley:
    """The wreath product's Cayley graph under the canonical four generators."""

    name = "zwrz"
    degree = 4

    def neighbors(self, v: GroupElement) -> list[GroupElement]:
        return metric.neighbors(v)

    def distance(self, u: GroupElement, v: GroupElement) -> int:
        return metric.distance(u, v).total

    def sort_key(self, v: GroupElement):
        return encode(v)


_HOSTS = {"z": ZLine(), "z2": ZGrid(), "zwrz": WreathCayley()}


def host_by_name(name: str):
    try:
        return _HOSTS[name]
    except KeyError:
        raise ValidationError(f"unknown host {name!r}; expected one of {sorted(_HOSTS)}") from None


def interval(lo: int, hi: int) -> list[int]:
    if lo > hi:
        raise ValidationError("empty interval")
    return list(range(lo, hi + 1))


def box(x_lo: int, x_hi: int, y_lo: int, y_hi: int) -> list[tuple[int, int]]:
    if x_lo > x_hi or y_lo > y_hi:
        raise ValidationError("empty box")
    return [(x, y) for x in range(x_lo, x_hi + 1) for y in range(y_lo, y_hi + 1)]


def wreath_truncation(max_cursor: int, max_support: int, max_value: int) -> list[GroupElement]:
    """Every element with cursor in [-max_cursor, max_cursor], lamps supported
    in [-max_support, max_support], and values in [-max_value, max_value]."""
    if min(max_cursor, max_support, max_value) < 0:
        raise ValidationError("truncation bounds must be nonnegative")
    positions = range(-max_support, max_support + 1)
    values = range(-max_value, max_value + 1)
    configs: list[tuple[tuple[int, int], ...]] = [()]
    for p in positions:
        configs = [c + ((p, v),) if v else c for c in configs for v in values]
    out = [
        GroupElement(LampConfig(c), k)
        for c in configs
        for k in range(-max_cursor, max_cursor + 1)
    ]
    out.sort(key=encode)
    return out


def ball_around(host, center, radius: int, cap: int = metric.DEFAULT_BALL_CAP) -> list:
    """Vertices within the radius of one center, in host order."""
    return union_of_balls(host, [center], radius, cap)


def union_of_balls(host, centers: Iterable[Hashable], radius: int, cap: int = metric.DEFAULT_BALL_CAP) -> list:
    """Multi-source breadth-first enumeration of a union of balls."""
    if radius < 0:
        raise ValidationError("radius must be nonnegative")
    seen = dict.fromkeys(centers, 0)
    if not seen:
        raise ValidationError("at least one center required")
    frontier = deque(seen)
    while frontier:
        v = frontier.popleft()
        d = seen[v]
        if d == radius:
            continue
        for w in host.neighbors(v):
            if w not in seen:
                seen[w] = d + 1
                if len(seen) > cap:
                    raise ResourceLimitError(f"ball union exceeded cap {cap}")
                frontier.append(w)
    return sorted(seen, key=host.sort_key)
