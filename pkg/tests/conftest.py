import itertools
from fractions import Fraction

import pytest

from evopoisson import (PayoffEngine, PopulationModel, SafeSetConvention,
                        propagates)
from evopoisson.model import _weights_and_threshold


def low_spread_model(lam=10.0, price=4.0, r1=0.1, convention=None):
    """Two types with spreading rates (0.05, 0.2), K=5."""
    return PopulationModel(lam=lam, type_dist=(r1, 1.0 - r1),
                           contamination_rate=5, recovery_rates=(100, 25),
                           infection_cost=5.0, protection_cost=price,
                           convention=convention)


def pricing_model(lam=10.0, price=4.0):
    """Two types with spreading rates (0.5, 0.98), K=10."""
    return PopulationModel(lam=lam, type_dist=(0.3, 0.7),
                           contamination_rate=1,
                           recovery_rates=(2, Fraction(50, 49)),
                           infection_cost=10.0, protection_cost=price)


def learning_model(lam=10.0, price=4.0):
    """Two types with spreading rates (0.5, 50/51), K=10."""
    return PopulationModel(lam=lam, type_dist=(0.3, 0.7),
                           contamination_rate=5,
                           recovery_rates=(10, Fraction(51, 10)),
                           infection_cost=10.0, protection_cost=price)


def single_type_model(tau: Fraction, lam=10.0, price=4.0, big_k=5.0,
                      convention=SafeSetConvention.SELF_EXCLUSIVE):
    tau = Fraction(tau)
    return PopulationModel(lam=lam, type_dist=(1.0,),
                           contamination_rate=tau.numerator,
                           recovery_rates=(tau.denominator,),
                           infection_cost=big_k, protection_cost=price,
                           convention=convention)


def brute_force_safe_points(model):
    """Independent oracle: scan the bounding box point by point."""
    weights, threshold, strict = _weights_and_threshold(model)
    bounds = []
    for w in weights:
        k = 0
        while (k * w <= threshold if strict else k * w < threshold):
            k += 1
        bounds.append(k)
    return sorted(
        combo for combo in itertools.product(*(range(b) for b in bounds))
        if not propagates(model, combo))


@pytest.fixture(scope="session")
def low_spread_engine():
    return PayoffEngine(low_spread_model())


@pytest.fixture(scope="session")
def low_spread_engine_lam20():
    return PayoffEngine(low_spread_model(lam=20.0))


@pytest.fixture(scope="session")
def pricing_engine():
    return PayoffEngine(pricing_model())


@pytest.fixture(scope="session")
def learning_engine():
    return PayoffEngine(learning_model())
