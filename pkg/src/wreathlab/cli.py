"""Reproducible experiment front end.

Exit codes: 0 success, 1 validation or usage error, 2 a mathematical invariant
was observed to fail (the test-facing signal), 3 resource limit. Every file
output lands under --out together with a manifest carrying the exact config,
the seed, and a checksum per artifact; identical config and seed reproduce
byte-identical CSV bodies.

Parameter precedence: explicit flags, then a plain key=value --config file,
then the WREATH_SEED environment variable (seed only), then defaults.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import __version__, embedding, hosts, markov, metric, walk
from .errors import (
    InvariantViolation,
    ResourceLimitError,
    ValidationError,
    WreathError,
)
from .group import GroupElement, element_from_text

DEFAULTS = {
    "seed": 7,
    "trials": 2000,
    "tmax": 16384,
    "alpha": 0.45,
    "eps": 1e-6,
    "count": 200,
    "chains": 500,
    "max_states": 10,
    "p": 2.0,
    "t": 2,
    "out": "./out",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _load_config(path: Optional[str]) -> dict[str, str]:
    if not path:
        return {}
    if not os.path.exists(path):
        raise ValidationError(f"config file not found: {path}")
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _resolve(ns, config: dict[str, str], name: str, cast: Callable):
    flag = getattr(ns, name, None)
    if flag is not None:
        return flag
    if name in config:
        try:
            return cast(config[name])
        except ValueError:
            raise ValidationError(f"config value for {name!r} is not valid") from None
    if name == "seed":
        env = os.environ.get("WREATH_SEED")
        if env is not None:
            try:
                return int(env)
            except ValueError:
                raise ValidationError("WREATH_SEED must be an integer") from None
    return DEFAULTS.get(name)


def _float_cell(x: float) -> str:
    return repr(float(x))


class _OutputSink:
    """Collects named text artifacts, then writes them plus the manifest."""

    def __init__(self, out_dir: str, command: str, config: dict, seed):
        self.out_dir = out_dir
        self.command = command
        self.config = config
        self.seed = seed
        self.started = time.monotonic()
        self.files: dict[str, str] = {}

    def add(self, name: str, body: str) -> None:
        self.files[name] = body

    def flush(self) -> None:
        os.makedirs(self.out_dir, exist_ok=True)
        checksums = {}
        for name, body in sorted(self.files.items()):
            data = body.encode("utf-8")
            path = os.path.join(self.out_dir, name)
            with open(path, "wb") as fh:
                fh.write(data)
            checksums[name] = hashlib.sha256(data).hexdigest()
        manifest = {
            "toolVersion": __version__,
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "wallClockSeconds": time.monotonic() - self.started,
            "outputs": checksums,
        }
        payload = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        tmp = os.path.join(self.out_dir, ".run_manifest.json.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, os.path.join(self.out_dir, "run_manifest.json"))


def _walk_csv(sample: walk.WalkSample) -> str:
    lines = ["group,t,trial,displacement"]
    for trial in range(sample.trials):
        row = sample.displacements[trial]
        for column, t in enumerate(sample.times):
            lines.append(f"{sample.group},{t},{trial},{int(row[column])}")
    return "\n".join(lines) + "\n"


def _tail_csv(estimate: walk.TailEstimate) -> str:
    lines = ["t,c,beta,deltaHat,stderr"]
    for t in sorted(estimate.delta_hat):
        lines.append(
            f"{t},{_float_cell(estimate.c)},{_float_cell(estimate.beta)},"
            f"{_float_cell(estimate.delta_hat[t])},{_float_cell(estimate.standard_errors[t])}"
        )
    return "\n".join(lines) + "\n"


def _compression_csv(report: embedding.CompressionReport) -> str:
    lines = ["alpha,distance,norm,errorBound"]
    for d, value, bound in report.observations:
        lines.append(f"{_float_cell(report.alpha)},{d},{_float_cell(value)},{_float_cell(bound)}")
    return "\n".join(lines) + "\n"


def _observation_csv(alpha: float, observations) -> str:
    lines = ["alpha,distance,norm,errorBound"]
    for d, value, bound in observations:
        lines.append(f"{_float_cell(alpha)},{d},{_float_cell(value)},{_float_cell(bound)}")
    return "\n".join(lines) + "\n"


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


# ---------------------------------------------------------------- subcommands


def _cmd_metric(ns, config) -> int:
    a = element_from_text(ns.a)
    b = element_from_text(ns.b)
    witness = metric.distance(a, b)
    payload = {
        "total": witness.total,
        "lampCost": witness.lamp_cost,
        "travelCost": witness.travel_cost,
        "direction": witness.direction,
    }
    if ns.oracle:
        max_radius = ns.max_radius if ns.max_radius is not None else witness.total
        oracle = metric.distance_bfs(a, b, max_radius)
        payload["oracle"] = oracle
        if oracle != witness.total:
            _print_json(payload)
            raise InvariantViolation(
                f"closed form {witness.total} disagrees with search oracle {oracle}"
            )
    _print_json(payload)
    return 0


def _default_times(tmax: int) -> tuple[int, ...]:
    times = tuple(t for t in walk.dyadic_times() if t <= tmax)
    return times if times else (tmax,)


def _cmd_walk(ns, config) -> int:
    group = ns.group
    seed = _resolve(ns, config, "seed", int)
    trials = _resolve(ns, config, "trials", int)
    tmax = _resolve(ns, config, "tmax", int)
    out_dir = _resolve(ns, config, "out", str)
    if ns.times:
        times = tuple(int(tok) for tok in ns.times.split(","))
    else:
        times = _default_times(tmax)
    sample = walk.simulate(group, times, trials, seed)
    fit = walk.estimate_beta(sample)
    fit_median = walk.estimate_beta(sample, statistic="median")
    calibration_beta = 0.75 if group == "zwrz" else 0.5
    reference = 1024 if 1024 in sample.times else sample.times[len(sample.times) // 2]
    c = walk.median_rule_constant(sample, calibration_beta, reference_time=reference)
    tail = walk.estimate_tail(sample, c, calibration_beta)
    summary = {
        "group": group,
        "seed": seed,
        "trials": trials,
        "times": list(sample.times),
        "betaHat": fit.beta_hat,
        "interceptHat": fit.intercept_hat,
        "r2": fit.r2,
        "betaCI": [fit.beta_hat - 2 * fit.stderr, fit.beta_hat + 2 * fit.stderr],
        "medianBetaHat": fit_median.beta_hat,
        "tailConstant": c,
        "tailBeta": calibration_beta,
        "referenceTime": reference,
        "deltaHat": {str(t): tail.delta_hat[t] for t in sample.times},
        "deltaStderr": {str(t): tail.standard_errors[t] for t in sample.times},
    }
    snapshot = {"group": group, "trials": trials, "tmax": tmax, "times": list(times)}
    sink = _OutputSink(out_dir, "walk", snapshot, seed)
    sink.add("walk_samples.csv", _walk_csv(sample))
    sink.add("walk_tail.csv", _tail_csv(tail))
    sink.add("walk_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    sink.flush()
    _print_json(summary)
    return 0


def _cmd_markov_verify(ns, config) -> int:
    seed = _resolve(ns, config, "seed", int)
    chains = _resolve(ns, config, "chains", int)
    max_states = _resolve(ns, config, "max_states", int)
    tmax = ns.tmax if ns.tmax is not None else 64
    report = markov.markov_type_campaign(chains, max_states, tmax, seed)
    _print_json(report)
    if report["maxViolation"] > report["tolerance"]:
        raise InvariantViolation(
            f"Markov-type inequality violated by {report['maxViolation']:.3e}"
        )
    return 0


def _subset_for(host_name: str, spec: str):
    try:
        parts = [int(tok) for tok in spec.split(":")]
    except ValueError:
        raise ValidationError(f"subset spec {spec!r} must be colon-separated integers") from None
    if host_name == "z":
        if len(parts) != 2:
            raise ValidationError("z subset spec is lo:hi")
        return hosts.host_by_name("z"), hosts.interval(*parts)
    if host_name == "z2":
        if len(parts) != 4:
            raise ValidationError("z2 subset spec is x_lo:x_hi:y_lo:y_hi")
        return hosts.host_by_name("z2"), hosts.box(*parts)
    if host_name == "zwrz-trunc":
        if len(parts) != 3:
            raise ValidationError("zwrz-trunc subset spec is cursor:support:value")
        return hosts.host_by_name("zwrz"), hosts.wreath_truncation(*parts)
    raise ValidationError(f"unknown host {host_name!r}")


def _cmd_markov_delayed(ns, config) -> int:
    host, subset = _subset_for(ns.host, ns.subset)
    chain = markov.delayed_walk(markov.SubsetWalkSpec(host, tuple(subset)))
    chain.validate()
    residuals = markov.chain_residuals(chain)
    _print_json(
        {
            "host": ns.host,
            "states": chain.n,
            "residuals": residuals,
            "tolerance": markov.CHAIN_TOL,
            "pass": True,
        }
    )
    return 0


def _wreath_demo_embedding(radius: int):
    span = range(-radius, radius + 1)

    def emb(g: GroupElement):
        return (float(g.cursor),) + tuple(float(g.lamps.value_at(p)) for p in span)

    return emb


def _cmd_markov_replay(ns, config) -> int:
    t = _resolve(ns, config, "t", int)
    p = _resolve(ns, config, "p", float)
    host, core = _subset_for(ns.host, ns.F)
    if ns.host == "z":
        emb = lambda v: (float(v),)
        rho = lambda s: s
    elif ns.host == "z2":
        emb = lambda v: (float(v[0]), float(v[1]))
        rho = lambda s: s / math.sqrt(2.0)  # L1 arguments, L2 gaps
    else:
        span = max(abs(v) for g in core for v in (g.cursor, *g.lamps.support())) if core else 0
        emb = _wreath_demo_embedding(span + t)
        rho = None  # empirical modulus of the demo embedding
    report = markov.delayed_walk_replay(host, core, t, emb, rho, p=p)
    payload = {
        "host": ns.host,
        "coreSize": report.core_size,
        "fattenedSize": report.fattened_size,
        "ratio": report.ratio,
        "t": report.t,
        "p": report.p,
        "lipschitzMax": report.lipschitz_max,
        "chainLower": report.chain_lower,
        "restrictedAvg": report.restricted_avg,
        "fullAvg": report.full_avg,
        "markovLhs": report.markov_lhs,
        "markovRhs": report.markov_rhs,
        "upper": report.upper,
        "pass": True,
    }
    _print_json(payload)
    return 0


def _cmd_embed_norms(ns, config) -> int:
    alpha = _resolve(ns, config, "alpha", float)
    eps = _resolve(ns, config, "eps", float)
    from .group import canonical_generators, generator_names

    per = {}
    for name, g in zip(generator_names(), canonical_generators()):
        value, bound = embedding.embedding_norm(g, alpha, eps)
        per[name] = {"norm": value, "errorBound": bound}
    lipschitz = embedding.lipschitz_audit(alpha, max(eps, embedding.EPS_FLOOR))
    _print_json(
        {
            "alpha": alpha,
            "generators": per,
            "lipschitz": lipschitz,
            "auditConstant": lipschitz * lipschitz * (1 - 2 * alpha),
        }
    )
    return 0


def _cmd_embed_pair(ns, config) -> int:
    alpha = _resolve(ns, config, "alpha", float)
    eps = _resolve(ns, config, "eps", float)
    a = element_from_text(ns.a)
    b = element_from_text(ns.b)
    value, bound = embedding.embedding_distance(a, b, alpha, eps)
    witness = metric.distance(a, b)
    _print_json(
        {
            "alpha": alpha,
            "distance": witness.total,
            "norm": value,
            "errorBound": bound,
        }
    )
    return 0


def _sampler_from_spec(spec: str, alpha: float):
    head, _, arg = spec.partition(":")
    if head == "ball":
        radius = int(arg or "4")
        family = embedding.ball_elements(radius)
        return lambda rng, count: family[:count]
    if head == "cursor":
        family = embedding.pure_cursor_family(int(arg or "100"))
        return lambda rng, count: family[:count]
    if head == "lamp":
        first, _, second = arg.partition(":")
        family = embedding.pure_lamp_family(int(first or "3"), int(second or "50"))
        return lambda rng, count: family[:count]
    if head == "balanced":
        family = embedding.balanced_family(alpha, float(arg or "1"), 200)
        return lambda rng, count: family[:count]
    if head == "random":
        return embedding.random_element_sampler()
    raise ValidationError(f"unknown sampler {spec!r}")


def _cmd_embed_scan(ns, config) -> int:
    alpha = _resolve(ns, config, "alpha", float)
    eps = _resolve(ns, config, "eps", float)
    seed = _resolve(ns, config, "seed", int)
    count = _resolve(ns, config, "count", int)
    out_dir = _resolve(ns, config, "out", str)
    sampler = _sampler_from_spec(ns.sampler, alpha)
    report = embedding.compression_scan(alpha, sampler, count, eps, seed)
    summary = {
        "alpha": alpha,
        "count": len(report.observations),
        "fittedExponent": report.fitted_exponent,
        "fittedLowerConstant": report.fitted_lower_constant,
        "lipschitzMax": report.lipschitz_max,
        "lowerShapeExponent": embedding.lower_shape_exponent(alpha),
    }
    snapshot = {"alpha": alpha, "eps": eps, "count": count, "sampler": ns.sampler}
    sink = _OutputSink(out_dir, "embed scan", snapshot, seed)
    sink.add("compression_observations.csv", _compression_csv(report))
    sink.add("compression_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    sink.flush()
    _print_json(summary)
    return 0


def _cmd_bound(ns, config) -> int:
    if ns.beta is None and ns.iterated_k is None:
        raise ValidationError("bound requires --beta or --iterated-k")
    if ns.beta is not None:
        value = markov.alpha_upper(ns.beta)
        print(f"alpha upper bound for displacement exponent {ns.beta}: {float(value)} (= {value})")
        beta_fraction = Fraction(ns.beta)
        for k, beta_k, bound_k in markov.iterated_wreath_table(12):
            if beta_k == beta_fraction:
                print(
                    f"iterated level k={k}: displacement exponent {beta_k} "
                    f"-> compression bound {bound_k} (= {float(bound_k)})"
                )
    if ns.iterated_k is not None:
        for k, beta_k, bound_k in markov.iterated_wreath_table(ns.iterated_k):
            print(
                f"iterated level k={k}: displacement exponent {beta_k} "
                f"-> compression bound {bound_k} (= {float(bound_k)})"
            )
    return 0


def _cmd_pipeline(ns, config) -> int:
    alpha = _resolve(ns, config, "alpha", float)
    eps = _resolve(ns, config, "eps", float)
    seed = _resolve(ns, config, "seed", int)
    trials = _resolve(ns, config, "trials", int)
    tmax = _resolve(ns, config, "tmax", int)
    out_dir = _resolve(ns, config, "out", str)

    times = _default_times(tmax)
    sample = walk.simulate("zwrz", times, trials, seed)
    fit = walk.estimate_beta(sample)
    reference = 1024 if 1024 in sample.times else sample.times[len(sample.times) // 2]
    c = walk.median_rule_constant(sample, 0.75, reference_time=reference)
    tail = walk.estimate_tail(sample, c, 0.75)
    tested = [t for t in sample.times if 64 <= t <= 4096]
    delta_min = min(tail.delta_hat[t] for t in tested)
    if delta_min <= 0:
        raise InvariantViolation("empirical tail probability vanished on the tested grid")

    scan_elements = embedding.ball_elements(6)
    for prefactor in (1, 2, 4, 8, 16):
        scan_elements.extend(embedding.balanced_family(alpha, prefactor, 200))
    observations = embedding.norm_observations(scan_elements, alpha, eps)
    distances = np.array([d for d, _, _ in observations], dtype=float)
    norms = np.array([v for _, v, _ in observations], dtype=float)
    order = np.argsort(distances)
    suffix_min = np.minimum.accumulate(norms[order][::-1])[::-1]
    sorted_d = distances[order]

    def rho_hat(s: float) -> float:
        index = np.searchsorted(sorted_d, s, side="left")
        if index >= len(sorted_d):
            raise ValidationError(
                f"compression envelope queried at {s}, beyond the deepest observation "
                f"{sorted_d[-1]}"
            )
        return float(suffix_min[index])

    checks = []
    for t in tested:
        threshold = c * t**fit.beta_hat
        lhs = rho_hat(threshold)
        _, rhs = markov.compression_bound_sides(lhs, 1.0, delta_min, 2.0, t)
        checks.append(
            {"t": t, "threshold": threshold, "rhoHat": lhs, "bound": rhs, "pass": lhs <= rhs}
        )
        if lhs > rhs:
            raise InvariantViolation(
                f"compression bound failed at t={t}: rhoHat {lhs} > bound {rhs}"
            )

    summary = {
        "alpha": alpha,
        "seed": seed,
        "trials": trials,
        "betaHat": fit.beta_hat,
        "tailConstant": c,
        "deltaMin": delta_min,
        "alphaUpperAtCalibration": float(markov.alpha_upper(Fraction(3, 4))),
        "alphaUpperAtFittedBeta": float(markov.alpha_upper(min(1.0, fit.beta_hat))),
        "checks": checks,
        "pass": True,
    }
    scan_report = embedding.CompressionReport(
        alpha,
        tuple(observations),
        embedding.fit_exponent(observations)[0],
        min(v / d ** embedding.lower_shape_exponent(alpha) for d, v, _ in observations),
        max(v / d for d, v, _ in observations),
    )
    snapshot = {"alpha": alpha, "eps": eps, "trials": trials, "tmax": tmax}
    sink = _OutputSink(out_dir, "pipeline", snapshot, seed)
    sink.add("walk_samples.csv", _walk_csv(sample))
    sink.add("walk_tail.csv", _tail_csv(tail))
    sink.add("compression_observations.csv", _compression_csv(scan_report))
    sink.add("pipeline_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    sink.flush()
    _print_json(summary)
    return 0


# ------------------------------------------------------------------- parsing


def build_parser() -> _Parser:
    parser = _Parser(prog="wreathlab", description=__doc__)
    parser.add_argument("--config", help="plain key = value parameter file")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_metric = sub.add_parser("metric", help="exact word-metric witness")
    p_metric.add_argument("--a", required=True, help="element encoding, e.g. '2; -1:3, 4:-2'")
    p_metric.add_argument("--b", required=True)
    p_metric.add_argument("--oracle", action="store_true", help="cross-check against search")
    p_metric.add_argument("--max-radius", type=int, dest="max_radius")
    p_metric.set_defaults(func=_cmd_metric)

    p_walk = sub.add_parser("walk", help="displacement samples and exponent fit")
    p_walk.add_argument("--group", choices=walk.GROUPS, required=True)
    p_walk.add_argument("--tmax", type=int)
    p_walk.add_argument("--trials", type=int)
    p_walk.add_argument("--seed", type=int)
    p_walk.add_argument("--times", help="comma-separated override of the time grid")
    p_walk.add_argument("--out")
    p_walk.set_defaults(func=_cmd_walk)

    p_markov = sub.add_parser("markov", help="chain construction and verification")
    markov_sub = p_markov.add_subparsers(dest="markov_command", parser_class=_Parser)

    p_verify = markov_sub.add_parser("verify", help="random reversible-chain campaign")
    p_verify.add_argument("--chains", type=int)
    p_verify.add_argument("--max-states", type=int, dest="max_states")
    p_verify.add_argument("--tmax", type=int)
    p_verify.add_argument("--seed", type=int)
    p_verify.set_defaults(func=_cmd_markov_verify)

    p_delayed = markov_sub.add_parser("delayed", help="build and validate a subset walk")
    p_delayed.add_argument("--host", choices=("z", "z2", "zwrz-trunc"), required=True)
    p_delayed.add_argument("--subset", required=True)
    p_delayed.set_defaults(func=_cmd_markov_delayed)

    p_replay = markov_sub.add_parser("replay", help="replay the sandwich on one instance")
    p_replay.add_argument("--host", choices=("z", "z2", "zwrz-trunc"), required=True)
    p_replay.add_argument("--F", required=True, help="core-set spec, same format as --subset")
    p_replay.add_argument("--t", type=int)
    p_replay.add_argument("--p", type=float)
    p_replay.set_defaults(func=_cmd_markov_replay)

    p_embed = sub.add_parser("embed", help="embedding norms, pairs, and scans")
    embed_sub = p_embed.add_subparsers(dest="embed_command", parser_class=_Parser)

    p_norms = embed_sub.add_parser("norms", help="generator norm audit")
    p_norms.add_argument("--alpha", type=float)
    p_norms.add_argument("--eps", type=float)
    p_norms.set_defaults(func=_cmd_embed_norms)

    p_pair = embed_sub.add_parser("pair", help="certified distance between two elements")
    p_pair.add_argument("--a", required=True)
    p_pair.add_argument("--b", required=True)
    p_pair.add_argument("--alpha", type=float)
    p_pair.add_argument("--eps", type=float)
    p_pair.set_defaults(func=_cmd_embed_pair)

    p_scan = embed_sub.add_parser("scan", help="distance-vs-norm scan")
    p_scan.add_argument("--alpha", type=float)
    p_scan.add_argument("--count", type=int)
    p_scan.add_argument("--eps", type=float)
    p_scan.add_argument("--seed", type=int)
    p_scan.add_argument(
        "--sampler",
        default="random",
        help="ball:R | cursor:K | lamp:SPREAD:MASS | balanced:PREFACTOR | random",
    )
    p_scan.add_argument("--out")
    p_scan.set_defaults(func=_cmd_embed_scan)

    p_bound = sub.add_parser("bound", help="compression bound from a displacement exponent")
    p_bound.add_argument("--beta", type=float)
    p_bound.add_argument("--iterated-k", type=int, dest="iterated_k")
    p_bound.set_defaults(func=_cmd_bound)

    p_pipe = sub.add_parser("pipeline", help="walk + embed + bound, end to end")
    p_pipe.add_argument("--alpha", type=float)
    p_pipe.add_argument("--eps", type=float)
    p_pipe.add_argument("--seed", type=int)
    p_pipe.add_argument("--trials", type=int)
    p_pipe.add_argument("--tmax", type=int)
    p_pipe.add_argument("--out")
    p_pipe.set_defaults(func=_cmd_pipeline)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    if not getattr(ns, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        config = _load_config(ns.config)
        result = ns.func(ns, config)
        return 0 if result is None else result
    except InvariantViolation as exc:
        sys.stderr.write(f"invariant violated: {exc}\n")
        return 2
    except ResourceLimitError as exc:
        sys.stderr.write(f"resource limit: {exc}\n")
        return 3
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except WreathError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())
