"""Domain types and closed-form expressions for the two-way AF relay AoI model.

Nodes are labelled ``"A"`` and ``"B"``; the relay is ``r``.  A success
probability ``f_a`` always refers to updates *received at* A (the B-R-A
link), and likewise for ``f_b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal, Optional

import numpy as np

Node = Literal["A", "B"]

REL_TOL = 1e-12
INFEASIBLE = math.inf


class DomainError(ValueError):
    """An input lies outside the domain of an operation."""


def _other(node: Node) -> Node:
    if node == "A":
        return "B"
    if node == "B":
        return "A"
    raise DomainError(f"node must be 'A' or 'B', got {node!r}")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class SystemParams:
    sigma2_a: float
    sigma2_b: float
    sigma2_r: float
    gamma_th: float
    weight_a: float = 0.5
    weight_b: float = 0.5
    peak_a: float = 1.0
    peak_b: float = 2.0
    peak_r: float = 0.75

    def __post_init__(self):
        for name in ("sigma2_a", "sigma2_b", "sigma2_r", "peak_a", "peak_b", "peak_r"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        # gamma_th = 0 is accepted as the "always succeed" anchor.
        if not (self.gamma_th >= 0 and math.isfinite(self.gamma_th)):
            raise DomainError(f"gamma_th must be non-negative, got {self.gamma_th!r}")
        for name in ("weight_a", "weight_b"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise DomainError(f"{name} must lie in (0, 1), got {value!r}")
        if abs(self.weight_a + self.weight_b - 1.0) > 1e-12:
            raise DomainError("weight_a + weight_b must equal 1")

    @classmethod
    def reference(cls, **overrides) -> "SystemParams":
        """Operating point of the reference study: sigma^2 = 1e-3, 20 dB, P_r = 0.75 P_A^pk."""
        base = dict(
            sigma2_a=1e-3, sigma2_b=1e-3, sigma2_r=1e-3, gamma_th=100.0,
            weight_a=0.5, weight_b=0.5, peak_a=1.0, peak_b=2.0, peak_r=0.75,
        )
        base.update(overrides)
        return cls(**base)

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def swapped(self) -> "SystemParams":
        """Exchange the roles of A and B."""
        return replace(
            self,
            sigma2_a=self.sigma2_b, sigma2_b=self.sigma2_a,
            weight_a=self.weight_b, weight_b=self.weight_a,
            peak_a=self.peak_b, peak_b=self.peak_a,
        )

    def sigma2(self, node: Node) -> float:
        return self.sigma2_a if node == "A" else self.sigma2_b

    def weight(self, node: Node) -> float:
        return self.weight_a if node == "A" else self.weight_b

    def peak(self, node: Node) -> float:
        return self.peak_a if node == "A" else self.peak_b


@dataclass(frozen=True)
class PowerProfile:
    p_a: float
    p_b: float
    p_r: float

    def __post_init__(self):
        for name in ("p_a", "p_b", "p_r"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")

    def swapped(self) -> "PowerProfile":
        return PowerProfile(self.p_b, self.p_a, self.p_r)

    def power(self, node: Node) -> float:
        return self.p_a if node == "A" else self.p_b

    def check_within(self, params: SystemParams) -> None:
        for mine, peak, label in (
            (self.p_a, params.peak_a, "p_a"),
            (self.p_b, params.peak_b, "p_b"),
            (self.p_r, params.peak_r, "p_r"),
        ):
            if mine > peak:
                raise DomainError(f"{label}={mine} exceeds its peak {peak}")


@dataclass(frozen=True)
class NormalizedSnrs:
    gamma_a: float
    gamma_b: float
    gamma_ra: float
    gamma_rb: float

    def source(self, node: Node) -> float:
        return self.gamma_a if node == "A" else self.gamma_b

    def relay_to(self, node: Node) -> float:
        return self.gamma_ra if node == "A" else self.gamma_rb


@dataclass(frozen=True)
class SuccessPair:
    f_a: float
    f_b: float
    kind: Literal["asymptotic", "empirical"] = "asymptotic"
    ci_halfwidth_a: Optional[float] = None
    ci_halfwidth_b: Optional[float] = None

    @staticmethod
    def _ok(f: float, kind: str) -> bool:
        if kind == "asymptotic":
            return 0.0 < f < 1.0
        return 0.0 <= f <= 1.0

    @property
    def valid_a(self) -> bool:
        return self._ok(self.f_a, self.kind)

    @property
    def valid_b(self) -> bool:
        return self._ok(self.f_b, self.kind)

    @property
    def valid(self) -> bool:
        return self.valid_a and self.valid_b

    def get(self, node: Node) -> float:
        return self.f_a if node == "A" else self.f_b


@dataclass(frozen=True)
class AoiSummary:
    aoi_a: float
    aoi_b: float
    weighted: float


def normalized_snrs(params: SystemParams, powers: PowerProfile) -> NormalizedSnrs:
    if not isinstance(powers, PowerProfile):
        raise DomainError("powers must be a PowerProfile")
    return NormalizedSnrs(
        gamma_a=powers.p_a / params.sigma2_r,
        gamma_b=powers.p_b / params.sigma2_r,
        gamma_ra=powers.p_r / params.sigma2_a,
        gamma_rb=powers.p_r / params.sigma2_b,
    )


def instantaneous_snr(snrs: NormalizedSnrs, gain_h_dest, gain_h_src, dest: Node):
    """End-to-end SNR at ``dest`` after one two-slot round.

    ``gain_h_dest`` is |h|^2 of the destination's own link to the relay and
    ``gain_h_src`` that of the transmitting source.  Works elementwise on
    numpy arrays.
    """
    src = _other(dest)
    g_rd = snrs.relay_to(dest)
    g_d = snrs.source(dest)
    g_s = snrs.source(src)
    num = g_rd * g_s * gain_h_dest * gain_h_src
    den = (g_rd + g_d) * gain_h_dest + g_s * gain_h_src + 1.0
    return num / den


def asymptotic_f(params: SystemParams, p_a, p_b, p_r):
    """High-SNR success probabilities ``(f_a, f_b)``; accepts arrays."""
    g = params.gamma_th
    f_a = 1.0 - g * (params.sigma2_r / p_b + params.sigma2_a / p_r * (1.0 + p_a / p_b))
    f_b = 1.0 - g * (params.sigma2_r / p_a + params.sigma2_b / p_r * (1.0 + p_b / p_a))
    return f_a, f_b


def asymptotic_success(params: SystemParams, powers: PowerProfile) -> SuccessPair:
    """Asymptotic success pair.  Values may leave (0, 1); check ``.valid``."""
    f_a, f_b = asymptotic_f(params, powers.p_a, powers.p_b, powers.p_r)
    return SuccessPair(float(f_a), float(f_b), kind="asymptotic")


def aoi_per_source(f: float) -> float:
    if not 0.0 < f <= 1.0:
        raise DomainError(f"success probability must lie in (0, 1], got {f!r}")
    return 0.5 + 2.0 / f


def weighted_sum_aoi(params: SystemParams, pair: SuccessPair) -> AoiSummary:
    aoi_a = aoi_per_source(pair.f_a)
    aoi_b = aoi_per_source(pair.f_b)
    wa, wb = params.weight_a, params.weight_b
    weighted = 0.5 * (wa + wb) + 2.0 * (wa / pair.f_a + wb / pair.f_b)
    return AoiSummary(aoi_a, aoi_b, weighted)


def objective_f(params: SystemParams, p_a, p_b, p_r=None, min_success: float = 0.0):
    """``w_A/F'_A + w_B/F'_B`` with the relay at ``p_r`` (default: its peak).

    Returns ``INFEASIBLE`` (``inf``) wherever either probability falls
    outside ``(min_success, 1)``.  Array inputs broadcast and give arrays.
    """
    if p_r is None:
        p_r = params.peak_r
    scalar = np.isscalar(p_a) and np.isscalar(p_b)
    p_a = np.asarray(p_a, dtype=float)
    p_b = np.asarray(p_b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        f_a, f_b = asymptotic_f(params, p_a, p_b, p_r)
        ok = (f_a > min_success) & (f_a < 1.0) & (f_b > min_success) & (f_b < 1.0)
        ok &= (p_a > 0) & (p_b > 0)
        value = np.where(ok, params.weight_a / f_a + params.weight_b / f_b, INFEASIBLE)
    if scalar:
        return float(value)
    return value
