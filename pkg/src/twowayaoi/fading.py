"""Rayleigh block-fading sampler and Monte Carlo success-probability estimator.

Channel power gains |h|^2 are Exp(1) variates produced by inverse CDF,
``-log(1 - U)`` with ``U`` uniform on [0, 1) from numpy's PCG64.  Draws are
generated in fixed-size blocks; block ``i`` of a stream seeded with ``seed``
uses ``SeedSequence([seed, i])``.  Because block boundaries never depend on
the number of workers, every estimate is bit-identical whatever the degree
of parallelism.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .model import Node, PowerProfile, SuccessPair, SystemParams, instantaneous_snr, normalized_snrs

BLOCK_SIZE = 1 << 18
Z95 = 1.96


@dataclass(frozen=True)
class ChannelDraw:
    """|h_A|^2 and |h_B|^2 for one round (or arrays of rounds)."""

    g_a: float | np.ndarray
    g_b: float | np.ndarray


@dataclass(frozen=True)
class EmpiricalSuccess:
    estimate: float
    n_samples: int
    ci_halfwidth: float
    seed: int


def make_rng(seed: int, block: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, block])))


def _exp1(rng: np.random.Generator, size=None):
    return -np.log1p(-rng.random(size))


def sample_channel_pair(rng: np.random.Generator) -> ChannelDraw:
    g_a = _exp1(rng)
    g_b = _exp1(rng)
    return ChannelDraw(float(g_a), float(g_b))


def sample_channels(rng: np.random.Generator, n: int) -> ChannelDraw:
    # A and B drawn interleaved so that a draw of n pairs is a prefix-stable
    # sequence of sample_channel_pair calls.
    u = _exp1(rng, 2 * n)
    return ChannelDraw(u[0::2], u[1::2])


def _block_sizes(n: int) -> list[int]:
    full, rest = divmod(n, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def channel_block(seed: int, block: int, size: int) -> ChannelDraw:
    return sample_channels(make_rng(seed, block), size)


def channel_blocks(seed: int, n: int) -> Iterator[ChannelDraw]:
    """Yield the canonical draw stream for ``(seed, n)`` block by block."""
    for i, size in enumerate(_block_sizes(n)):
        yield channel_block(seed, i, size)


def success_indicators(params: SystemParams, powers: PowerProfile, draw: ChannelDraw):
    """Boolean arrays (success at A, success at B) for each draw."""
    snrs = normalized_snrs(params, powers)
    snr_a = instantaneous_snr(snrs, draw.g_a, draw.g_b, "A")
    snr_b = instantaneous_snr(snrs, draw.g_b, draw.g_a, "B")
    return snr_a >= params.gamma_th, snr_b >= params.gamma_th


def _map_blocks(fn, seed: int, n: int, workers: int):
    jobs = list(enumerate(_block_sizes(n)))

    def run(job):
        i, size = job
        return fn(channel_block(seed, i, size))

    if workers <= 1 or len(jobs) <= 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))


def success_counts(params: SystemParams, powers: PowerProfile, n_samples: int,
                   seed: int, workers: int = 1) -> tuple[int, int]:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")

    def count(draw):
        ok_a, ok_b = success_indicators(params, powers, draw)
        return int(np.count_nonzero(ok_a)), int(np.count_nonzero(ok_b))

    parts = _map_blocks(count, seed, n_samples, workers)
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def ci_halfwidth(estimate: float, n: int) -> float:
    return Z95 * math.sqrt(estimate * (1.0 - estimate) / n)


def empirical_success_probability(params: SystemParams, powers: PowerProfile, dest: Node,
                                  n_samples: int, seed: int, workers: int = 1) -> EmpiricalSuccess:
    if dest not in ("A", "B"):
        raise ValueError(f"dest must be 'A' or 'B', got {dest!r}")
    count_a, count_b = success_counts(params, powers, n_samples, seed, workers)
    count = count_a if dest == "A" else count_b
    estimate = count / n_samples
    return EmpiricalSuccess(estimate, n_samples, ci_halfwidth(estimate, n_samples), seed)


def empirical_success_pair(params: SystemParams, powers: PowerProfile, n_samples: int,
                           seed: int, workers: int = 1) -> SuccessPair:
    """Both directions estimated on the same channel draws."""
    count_a, count_b = success_counts(params, powers, n_samples, seed, workers)
    f_a = count_a / n_samples
    f_b = count_b / n_samples
    return SuccessPair(
        f_a, f_b, kind="empirical",
        ci_halfwidth_a=ci_halfwidth(f_a, n_samples),
        ci_halfwidth_b=ci_halfwidth(f_b, n_samples),
    )
