"""Realized and expected costs for the protection game.

The central quantity is the expected cost of staying unprotected against a
population playing OFF with probability p:

    U_off(p) = K * (1 - exp(-lam*p) * P(lam*p)),

where P(y) = sum_n coeffs[n] y**n groups the safe set by total count. The
equilibrium condition U_off(p) = C rearranges into the two sides solved
against each other by the equilibrium module:

    poly_side(p) = P(lam*p)          (polynomial in lam*p)
    exp_side(p)  = (1 - C/K) e^{lam*p}
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ParameterError
from .model import PopulationModel, SafeSet, enumerate_safe_set, propagates


class PayoffEngine:
    """Immutable pairing of a model with its precomputed safe set.

    Operations are pure; instances are safe to share across threads. The
    safe set must have been generated from a model with the same
    propagation-relevant parameters (checked via fingerprint), which lets
    price sweeps reuse one enumeration.
    """

    def __init__(self, model: PopulationModel,
                 safe_set: SafeSet | None = None,
                 cap: int | None = None):
        if safe_set is None:
            safe_set = enumerate_safe_set(model, cap=cap)
        elif safe_set.fingerprint != model.safe_set_fingerprint():
            raise ParameterError(
                "safe set was generated from a different model")
        self.model = model
        self.safe_set = safe_set
        self._coeffs = np.ascontiguousarray(safe_set.coeffs, dtype=np.float64)

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    def with_cost(self, price: float) -> "PayoffEngine":
        """Engine for the same population at a different protection price."""
        return PayoffEngine(self.model.with_cost(price), self.safe_set)

    def realized_cost_off(self, x: Sequence[int]) -> float:
        """K if outcome x propagates the infection, else 0 (type-symmetric)."""
        return self.model.infection_cost if propagates(self.model, x) else 0.0

    def poly_side(self, p: float) -> float:
        """Safe-set polynomial sum_n coeffs[n] (lam*p)**n."""
        return _kernels.poly(self._coeffs, self.model.lam * p)

    def exp_side(self, p: float) -> float:
        """(1 - C/K) * exp(lam*p), the exponential side of the equilibrium
        equation."""
        m = self.model
        return (1.0 - m.protection_cost / m.infection_cost) * math.exp(
            m.lam * p)

    def safe_probability(self, p: float) -> float:
        """Probability that a random outcome at profile p does not propagate."""
        return _kernels.safe_prob(self._coeffs, self.model.lam * p)

    def expected_cost_off(self, p: float) -> float:
        """Expected cost of playing OFF against profile p, clamped to [0, K]."""
        return _kernels.cost_off(self._coeffs, self.model.lam * p,
                                 self.model.infection_cost)

    def expected_cost_mixed(self, q: float, p: float) -> float:
        """Cost of playing OFF with probability q against profile p."""
        return (q * self.expected_cost_off(p)
                + (1.0 - q) * self.model.protection_cost)

    def outcome_probability(self, x: Sequence[int], p: float) -> float:
        """Product of independent Poisson masses with means lam*r(t)*p.

        Computed in log space; x entries up to a few dozen with lam*p up
        to ~30 would lose digits in a naive factorial product.
        """
        m = self.model
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"p must lie in [0, 1], got {p}")
        counts = tuple(int(c) for c in x)
        if len(counts) != m.num_types or any(c < 0 for c in counts):
            raise ParameterError(f"bad outcome vector {x!r}")
        log_mass = 0.0
        for rt, k in zip(m.type_dist, counts):
            mean = m.lam * rt * p
            if mean == 0.0:
                if k > 0:
                    return 0.0
                continue
            log_mass += k * math.log(mean) - math.lgamma(k + 1) - mean
        return math.exp(log_mass)
