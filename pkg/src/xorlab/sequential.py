"""Two sequential projective measurements on one pure state.

Checks the two-sided cosine bound on the probability that both measurements
succeed or both fail, and the complementarity deviation it controls.  Both
quantities are stated for success probabilities at least 1/2; samples outside
that regime are rejected by the sweep driver, never clamped.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import serialize
from .quantum import sample_haar_projector, sample_haar_state

BOUND_TOL = 1e-9


class BelowHalfSuccessError(ValueError):
    """A measurement succeeds with probability below 1/2, outside the regime
    where the sandwich bound is claimed."""


@dataclass(frozen=True)
class SandwichReport:
    alpha: float
    beta: float
    observed: float
    lower: float
    upper: float
    margin_low: float   # observed - lower
    margin_high: float  # upper - observed

    @property
    def ok(self) -> bool:
        return self.margin_low >= -BOUND_TOL and self.margin_high >= -BOUND_TOL


@dataclass(frozen=True)
class GammaReport:
    gamma: float
    bound: float
    saturated_positive: bool
    saturated_negative: bool

    @property
    def ok(self) -> bool:
        return abs(self.gamma) <= self.bound + BOUND_TOL


def _angle_from_prob(p: float) -> float:
    # arccos of a clamped square root; p can overshoot 1 by float noise.
    return math.acos(math.sqrt(min(max(p, 0.0), 1.0)))


def _success_probs(psi, c, d) -> tuple[float, float]:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    pc = float(np.linalg.norm(c @ psi) ** 2)
    pd = float(np.linalg.norm(d @ psi) ** 2)
    return pc, pd


def sandwich_check(psi, c, d) -> SandwichReport:
    """Compare ||CD psi||^2 + ||(1-C)(1-D) psi||^2 against its cosine bounds."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    c = np.asarray(c, dtype=complex)
    d = np.asarray(d, dtype=complex)
    pc, pd = _success_probs(psi, c, d)
    if pc < 0.5 - 1e-12 or pd < 0.5 - 1e-12:
        raise BelowHalfSuccessError(
            f"success probabilities ({pc:.6f}, {pd:.6f}) must both be >= 1/2"
        )
    alpha = _angle_from_prob(pc)
    beta = _angle_from_prob(pd)
    eye = np.eye(psi.shape[0])
    both_right = float(np.linalg.norm(c @ (d @ psi)) ** 2)
    both_wrong = float(np.linalg.norm((eye - c) @ ((eye - d) @ psi)) ** 2)
    observed = both_right + both_wrong
    lower = math.cos(alpha + beta) ** 2
    upper = math.cos(alpha - beta) ** 2
    return SandwichReport(
        alpha=alpha,
        beta=beta,
        observed=observed,
        lower=lower,
        upper=upper,
        margin_low=observed - lower,
        margin_high=upper - observed,
    )


def gamma(psi, c, d) -> GammaReport:
    """Deviation of the both-right/both-wrong probability from the value it
    would take under statistically independent measurements."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    c = np.asarray(c, dtype=complex)
    d = np.asarray(d, dtype=complex)
    rep = sandwich_check(psi, c, d)
    pc, pd = _success_probs(psi, c, d)
    independent = pc * pd + (1.0 - pc) * (1.0 - pd)
    g = rep.observed - independent
    bound = 0.5 * math.sin(2.0 * rep.beta) * math.sin(2.0 * rep.alpha)
    return GammaReport(
        gamma=g,
        bound=bound,
        saturated_positive=abs(g - bound) <= BOUND_TOL,
        saturated_negative=abs(g + bound) <= BOUND_TOL,
    )


def _sweep_shard(dim: int, count: int, seed: int, shard: int, keep_failures: bool):
    rng = np.random.default_rng([seed, dim, shard])
    records = []
    attempts = 0
    accepted = 0
    while accepted < count:
        attempts += 1
        psi = sample_haar_state(dim, rng)
        c = sample_haar_projector(dim, int(rng.integers(1, dim)), rng) if dim > 1 else np.eye(1)
        d = sample_haar_projector(dim, int(rng.integers(1, dim)), rng) if dim > 1 else np.eye(1)
        pc, pd = _success_probs(psi, c, d)
        if pc < 0.5 or pd < 0.5:
            continue
        accepted += 1
        rep = sandwich_check(psi, c, d)
        gam = gamma(psi, c, d)
        rec = {
            "seed": seed,
            "shard": shard,
            "index": accepted - 1,
            "dim": dim,
            "alpha": rep.alpha,
            "beta": rep.beta,
            "observed": rep.observed,
            "lower": rep.lower,
            "upper": rep.upper,
            "gamma": gam.gamma,
            "gamma_bound": gam.bound,
            "pass": bool(rep.ok and gam.ok),
        }
        if not rec["pass"] and keep_failures:
            # Serialize the full triple so a violation can be replayed.
            rec["psi"] = serialize.state_to_json(psi)
            rec["c"] = serialize.matrix_to_json(c)
            rec["d"] = serialize.matrix_to_json(d)
        records.append(rec)
    return records, attempts


def sweep_sandwich(
    dims,
    samples: int,
    seed: int,
    shards: int = 8,
    workers: int | None = None,
    keep_failures: bool = True,
):
    """Haar-random sweep with rejection on the >= 1/2 preconditions.

    Returns ``(records, summary)``; sampling is sharded so the record stream
    is identical for any worker count.
    """
    dims = [int(d) for d in dims]
    if any(d < 2 for d in dims):
        raise ValueError("sweep requires dims >= 2")
    if samples < 0:
        raise ValueError("samples must be >= 0")
    shards = max(1, min(int(shards), samples)) if samples else 1
    per_shard = [samples // shards + (1 if i < samples % shards else 0) for i in range(shards)]

    tasks = [
        (dim, count, seed, shard)
        for dim in dims
        for shard, count in enumerate(per_shard)
        if count > 0
    ]
    if workers is not None and workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            shard_results = list(
                pool.map(lambda t: _sweep_shard(t[0], t[1], t[2], t[3], keep_failures), tasks)
            )
    else:
        shard_results = [_sweep_shard(d, c, s, sh, keep_failures) for d, c, s, sh in tasks]

    records = []
    attempts = 0
    for recs, att in shard_results:
        records.extend(recs)
        attempts += att
    violations = sum(1 for r in records if not r["pass"])
    summary = {
        "seed": seed,
        "dims": dims,
        "samples_per_dim": samples,
        "accepted": len(records),
        "attempts": attempts,
        "acceptance_rate": len(records) / attempts if attempts else 0.0,
        "violations": violations,
    }
    return records, summary
