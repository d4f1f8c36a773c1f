"""Finite stationary reversible chains and the inequalities they certify.

Three jobs live here:

* exact two-sided evaluation of the Markov-type inequality
  E[||f(Z_t) - f(Z_0)||^p] <= K^p t E[||f(Z_1) - f(Z_0)||^p]
  on explicit chains (matrix powers, compensated sums);
* construction of the delayed walk on a subset A of a host Cayley graph
  (step to an in-subset neighbor with probability 1/degree, stay put with the
  leftover mass) together with the ball-union fattening that makes the delayed
  walk indistinguishable from the free walk for t steps when started in the
  core set;
* a replay of the resulting sandwich on concrete finite instances: the
  compression lower term never exceeds the Markov-type upper term.

The bound calculator at the bottom turns a displacement exponent into an upper
bound on the compression exponent, exactly, in rational arithmetic.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvariantViolation, ValidationError

__all__ = [
    "FiniteChain",
    "chain_residuals",
    "markov_type_sides",
    "random_reversible_chain",
    "SubsetWalkSpec",
    "delayed_walk",
    "FatteningReport",
    "folner_fatten",
    "ReplayReport",
    "delayed_walk_replay",
    "alpha_upper",
    "iterated_wreath_beta",
    "iterated_wreath_table",
    "compression_bound_sides",
]

CHAIN_TOL = 1e-12


@dataclass(frozen=True)
class FiniteChain:
    """States, stationary distribution pi, and row-stochastic transitions a."""

    states: tuple
    pi: np.ndarray
    a: np.ndarray

    @property
    def n(self) -> int:
        return len(self.states)

    def validate(self, tol: float = CHAIN_TOL) -> None:
        residuals = chain_residuals(self)
        for name, value in residuals.items():
            if value > tol:
                raise ValidationError(f"chain fails {name}: residual {value:.3e} > {tol:.1e}")


def chain_residuals(chain: FiniteChain) -> dict[str, float]:
    """Worst-case violations of the chain axioms, for validation and reports."""
    pi, a = chain.pi, chain.a
    n = chain.n
    if pi.shape != (n,) or a.shape != (n, n):
        raise ValidationError("shape mismatch between states, pi, and a")
    if np.any(pi < 0) or np.any(a < -0.0):
        raise ValidationError("negative probabilities")
    balance = pi[:, None] * a
    return {
        "row-stochasticity": float(np.abs(a.sum(axis=1) - 1.0).max()),
        "pi-normalization": float(abs(math.fsum(pi.tolist()) - 1.0)),
        "stationarity": float(np.abs(pi @ a - pi).max()),
        "detailed-balance": float(np.abs(balance - balance.T).max()),
    }


def _pairwise_power(points: np.ndarray, p: float) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    np.maximum(sq, 0.0, out=sq)
    if p == 2.0:
        return sq
    return sq ** (p / 2.0)


def markov_type_sides(
    chain: FiniteChain, points: np.ndarray, p: float, t: int
) -> tuple[float, float]:
    """Both sides of the Markov-type inequality at constant K = 1.

    Returns (lhs, rhs) with
    lhs = sum_i pi_i (a^t)_ij ||x_i - x_j||^p and rhs = t sum_i pi_i a_ij ||.||^p,
    so the caller may test lhs <= K^p rhs for any K. Exact matrix power, fsum
    accumulation.
    """
    if t < 1:
        raise ValidationError("t must be >= 1")
    if p < 1:
        raise ValidationError("p must be >= 1")
    chain.validate()
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] != chain.n:
        raise ValidationError("one point per state required")
    if not np.isfinite(points).all():
        raise ValidationError("points must be finite")
    dp = _pairwise_power(points, p)
    at = np.linalg.matrix_power(chain.a, t)
    lhs = math.fsum((chain.pi[:, None] * at * dp).ravel().tolist())
    rhs = t * math.fsum((chain.pi[:, None] * chain.a * dp).ravel().tolist())
    return (lhs, rhs)


def markov_type_campaign(
    chains: int, max_states: int, tmax: int, seed: int, tol: float = 1e-9
) -> dict:
    """Check the p = 2, K = 1 inequality on a batch of random chains.

    Each chain gets a random Euclidean embedding and is tested at every
    t = 1..tmax, with the matrix power built incrementally. Returns a summary
    dict; the caller decides whether maxViolation > tolerance is fatal.
    """
    if chains < 1:
        raise ValidationError("chains must be >= 1")
    if max_states < 1:
        raise ValidationError("max_states must be >= 1")
    if tmax < 1:
        raise ValidationError("tmax must be >= 1")
    rng = np.random.default_rng(seed)
    max_violation = -math.inf
    worst = None
    checks = 0
    for index in range(chains):
        n = int(rng.integers(1, max_states + 1))
        chain = random_reversible_chain(n, seed=int(rng.integers(0, 2**31)))
        chain.validate()
        dim = int(rng.integers(1, 5))
        points = rng.standard_normal((n, dim)) * rng.uniform(0.5, 3.0)
        dp = _pairwise_power(points, 2.0)
        weighted = chain.pi[:, None] * chain.a
        rhs_step = math.fsum((weighted * dp).ravel().tolist())
        at = np.eye(n)
        for t in range(1, tmax + 1):
            at = at @ chain.a
            lhs = math.fsum((chain.pi[:, None] * at * dp).ravel().tolist())
            violation = lhs - t * rhs_step
            checks += 1
            if violation > max_violation:
                max_violation = violation
                worst = {"chain": index, "states": n, "t": t}
    return {
        "chains": chains,
        "checks": checks,
        "maxViolation": max_violation,
        "tolerance": tol,
        "worst": worst,
        "pass": max_violation <= tol,
    }


def random_reversible_chain(n: int, seed: int) -> FiniteChain:
    """Random-walk chain on a random connected weighted graph.

    a_ij = w_ij / sum_k w_ik with pi proportional to row weight, so detailed
    balance holds by construction: pi_i a_ij = w_ij / total.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if n == 1:
        return FiniteChain((0,), np.array([1.0]), np.array([[1.0]]))
    rng = np.random.default_rng(seed)
    w = np.zeros((n, n))
    for i in range(1, n):
        j = int(rng.integers(0, i))  # random tree keeps the graph connected
        weight = rng.uniform(0.5, 2.0)
        w[i, j] += weight
        w[j, i] += weight
    for _ in range(int(rng.integers(0, n))):
        i, j = rng.integers(0, n, size=2)
        if i == j:
            continue
        weight = rng.uniform(0.5, 2.0)
        w[i, j] += weight
        w[j, i] += weight
    row = w.sum(axis=1)
    a = w / row[:, None]
    pi = row / row.sum()
    return FiniteChain(tuple(range(n)), pi, a)


@dataclass(frozen=True)
class SubsetWalkSpec:
    """A finite subset of a host Cayley graph, ready for the delayed walk."""

    host: object
    subset: tuple

    def __post_init__(self):
        if not self.subset:
            raise ValidationError("subset must be nonempty")
        if len(set(self.subset)) != len(self.subset):
            raise ValidationError("subset has duplicate vertices")

    @property
    def degree(self) -> int:
        return self.host.degree


def delayed_walk(spec: SubsetWalkSpec) -> FiniteChain:
    """The delayed standard walk restricted to the subset.

    From x: step to each in-subset neighbor with probability 1/degree, stay at
    x with the remaining mass. Uniform pi is stationary and the chain is
    reversible because in-subset adjacency is symmetric.
    """
    subset = spec.subset
    index = {v: i for i, v in enumerate(subset)}
    n = len(subset)
    deg = spec.degree
    a = np.zeros((n, n))
    for i, v in enumerate(subset):
        inside = 0
        for w in spec.host.neighbors(v):
            j = index.get(w)
            if j is not None:
                a[i, j] += 1.0 / deg
                inside += 1
        a[i, i] += 1.0 - inside / deg
    pi = np.full(n, 1.0 / n)
    return FiniteChain(subset, pi, a)


@dataclass(frozen=True)
class FatteningReport:
    """A core set, its ball-union fattening, and the overhead ratio."""

    core: tuple
    fattened: tuple
    radius: int

    @property
    def added(self) -> int:
        return len(self.fattened) - len(self.core)

    @property
    def ratio(self) -> float:
        return self.added / len(self.core)


def folner_fatten(host, core: Sequence, radius: int, cap: int = 10_000_000) -> FatteningReport:
    """Union of radius balls around the core set; always contains the core."""
    from .hosts import union_of_balls

    if radius < 0:
        raise ValidationError("radius must be nonnegative")
    core_tuple = tuple(sorted(set(core), key=host.sort_key))
    if not core_tuple:
        raise ValidationError("core set must be nonempty")
    fattened = tuple(union_of_balls(host, core_tuple, radius, cap))
    return FatteningReport(core_tuple, fattened, radius)


def _empirical_modulus(distances: Sequence[float], norms: Sequence[float]) -> Callable[[float], float]:
    """Largest nondecreasing minorant: s -> min of norms over distance >= s."""
    order = np.argsort(np.asarray(distances))
    d_sorted = np.asarray(distances, dtype=float)[order]
    n_sorted = np.asarray(norms, dtype=float)[order]
    suffix = np.minimum.accumulate(n_sorted[::-1])[::-1]
    d_list = d_sorted.tolist()

    def rho(s: float) -> float:
        i = bisect_left(d_list, s)
        if i >= len(d_list):
            raise ValidationError(f"empirical modulus queried beyond observed distance {d_list[-1]}")
        return float(suffix[i])

    return rho


@dataclass(frozen=True)
class ReplayReport:
    """Every intermediate quantity of the sandwich, already asserted.

    The chain that is checked (tolerances aside):
        chain_lower == restricted_avg <= full_avg <= markov_lhs <= upper
    with markov_lhs <= markov_rhs additionally asserted when p = 2.
    """

    core_size: int
    fattened_size: int
    ratio: float
    t: int
    p: float
    lipschitz_max: float
    free_term: float
    chain_lower: float
    restricted_avg: float
    full_avg: float
    markov_lhs: float
    markov_rhs: float
    upper: float


def delayed_walk_replay(
    host,
    core: Sequence,
    t: int,
    emb: Callable[[object], Sequence[float]],
    rho: Optional[Callable[[float], float]],
    p: float = 2.0,
    tol: float = 1e-9,
    cap: int = 10_000_000,
) -> ReplayReport:
    """Replay the compression-vs-Markov-type sandwich on one finite instance.

    emb must be 1-Lipschitz from the host metric (checked on in-subset edges)
    and rho must be nondecreasing with rho(d(x, y)) <= ||emb(x) - emb(y)|| on
    every pair the chain can couple (checked; rho=None derives the empirical
    modulus of emb, which satisfies both by construction). The upper term is
    t itself: Markov type 2 with constant 1 for Euclidean targets.
    """
    if t < 0:
        raise ValidationError("t must be nonnegative")
    if p < 1:
        raise ValidationError("p must be >= 1")
    fattening = folner_fatten(host, core, t, cap)
    spec = SubsetWalkSpec(host, fattening.fattened)
    chain = delayed_walk(spec)
    chain.validate()
    n = chain.n
    vertices = chain.states
    index = {v: i for i, v in enumerate(vertices)}
    core_indices = [index[v] for v in fattening.core]

    points = np.asarray([emb(v) for v in vertices], dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if not np.isfinite(points).all():
        raise ValidationError("embedding produced nonfinite coordinates")

    at = np.linalg.matrix_power(chain.a, t) if t else np.eye(n)
    coupled = (chain.a > 0) | (at > 0)

    # host distances and embedding distances only where the chain can couple
    emb_dist = np.zeros((n, n))
    host_dist = np.zeros((n, n), dtype=int)
    lipschitz_max = 0.0
    for i in range(n):
        js = np.nonzero(coupled[i])[0]
        for j in js:
            if j < i and coupled[j, i]:
                continue  # symmetric pair already done
            d = host.distance(vertices[i], vertices[j])
            e = float(np.linalg.norm(points[i] - points[j]))
            host_dist[i, j] = host_dist[j, i] = d
            emb_dist[i, j] = emb_dist[j, i] = e
            if d == 1:
                lipschitz_max = max(lipschitz_max, e)
                if e > 1.0 + tol:
                    raise ValidationError(
                        f"embedding is not 1-Lipschitz: pair ({vertices[i]}, {vertices[j]}) "
                        f"stretches to {e}"
                    )

    pairs_i, pairs_j = np.nonzero(coupled)
    attained = sorted(set(host_dist[pairs_i, pairs_j].tolist()))
    if rho is None:
        rho = _empirical_modulus(
            host_dist[pairs_i, pairs_j].astype(float), emb_dist[pairs_i, pairs_j]
        )
    rho_at = {}
    previous = None
    for d in attained:
        value = float(rho(float(d)))
        if value < -tol:
            raise ValidationError(f"rho({d}) = {value} is negative")
        if previous is not None and value < previous - tol:
            raise ValidationError(f"rho is not nondecreasing at argument {d}")
        previous = value
        rho_at[d] = value
    for i, j in zip(pairs_i.tolist(), pairs_j.tolist()):
        if rho_at[host_dist[i, j]] > emb_dist[i, j] + tol:
            raise ValidationError(
                f"rho exceeds the embedding gap on pair ({vertices[i]}, {vertices[j]}): "
                f"rho({host_dist[i, j]}) = {rho_at[host_dist[i, j]]} > {emb_dist[i, j]}"
            )

    rho_p = np.zeros((n, n))
    for i, j in zip(pairs_i.tolist(), pairs_j.tolist()):
        rho_p[i, j] = rho_at[host_dist[i, j]] ** p

    pi = chain.pi
    full_avg = math.fsum((pi[:, None] * at * rho_p).ravel().tolist())
    restricted_avg = math.fsum(
        (at[core_indices] * rho_p[core_indices]).ravel().tolist()
    ) / n

    # free walk for t steps from one core vertex; the host is vertex-transitive
    # so the start does not matter
    start = fattening.core[0]
    deg = host.degree
    dist_now = {start: 1.0}
    for _ in range(t):
        nxt: dict = {}
        for v, mass in dist_now.items():
            share = mass / deg
            for w in host.neighbors(v):
                nxt[w] = nxt.get(w, 0.0) + share
        dist_now = nxt
    free_term = math.fsum(
        mass * float(rho(float(host.distance(start, v)))) ** p for v, mass in dist_now.items()
    )
    chain_lower = len(core_indices) / n * free_term

    if t:
        emb_p = emb_dist**p
        markov_lhs = math.fsum((pi[:, None] * at * emb_p).ravel().tolist())
        markov_rhs = t * math.fsum((pi[:, None] * chain.a * emb_p).ravel().tolist())
    else:
        markov_lhs = markov_rhs = 0.0
    upper = float(t)  # K^p t with K = 1

    if abs(restricted_avg - chain_lower) > tol * max(1.0, abs(chain_lower)):
        raise InvariantViolation(
            "restricted average disagrees with the free-walk identity: "
            f"{restricted_avg} vs {chain_lower}"
        )
    links = [
        ("chain_lower <= restricted_avg", chain_lower, restricted_avg),
        ("restricted_avg <= full_avg", restricted_avg, full_avg),
        ("full_avg <= markov_lhs", full_avg, markov_lhs),
        ("markov_lhs <= upper", markov_lhs, upper),
    ]
    if p == 2.0:
        links.insert(3, ("markov_lhs <= markov_rhs", markov_lhs, markov_rhs))
        links.append(("markov_rhs <= upper", markov_rhs, upper))
    for name, lo, hi in links:
        if lo > hi + tol * max(1.0, abs(hi)):
            raise InvariantViolation(f"sandwich link failed: {name} ({lo} > {hi})")

    return ReplayReport(
        core_size=len(core_indices),
        fattened_size=n,
        ratio=fattening.ratio,
        t=t,
        p=p,
        lipschitz_max=lipschitz_max,
        free_term=free_term,
        chain_lower=chain_lower,
        restricted_avg=restricted_avg,
        full_avg=full_avg,
        markov_lhs=markov_lhs,
        markov_rhs=markov_rhs,
        upper=upper,
    )


def alpha_upper(beta) -> Fraction:
    """Upper bound on the compression exponent from a displacement exponent.

    Exact: min(1 / (2 beta), 1). Accepts int, float, or Fraction.
    """
    b = Fraction(beta)
    if not 0 < b <= 1:
        raise ValidationError("beta must lie in (0, 1]")
    return min(Fraction(1, 2) / b, Fraction(1))


def iterated_wreath_beta(k: int) -> Fraction:
    """Displacement exponent 1 - 2^{-k} of the k-fold iterated construction."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    return Fraction(2**k - 1, 2**k)


def iterated_wreath_table(k_max: int) -> list[tuple[int, Fraction, Fraction]]:
    """Rows (k, beta_k, alpha_upper(beta_k)) for k = 1..k_max."""
    return [(k, iterated_wreath_beta(k), alpha_upper(iterated_wreath_beta(k))) for k in range(1, k_max + 1)]


def compression_bound_sides(
    rho_value: float, m: float, delta: float, p: float, t: int
) -> tuple[float, float]:
    """(rho_value, m delta^{-1/p} t^{1/p}); the caller asserts lhs <= rhs."""
    if m <= 0:
        raise ValidationError("m must be positive")
    if not 0 < delta <= 1:
        raise ValidationError("delta must lie in (0, 1]")
    if p < 1:
        raise ValidationError("p must be >= 1")
    if t < 1:
        raise ValidationError("t must be >= 1")
    return (rho_value, m * delta ** (-1.0 / p) * t ** (1.0 / p))
