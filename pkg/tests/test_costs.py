import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from everlasting_sim.costs import CostConfig, funding_fee, funding_record, transaction_cost


def test_funding_fee_examples():
    assert funding_fee(150.0, 3000.0, 3200.0) == 150.0
    assert funding_fee(250.0, 3400.0, 3200.0) == 50.0
    # marked below intrinsic: shorts pay longs
    assert funding_fee(180.0, 3400.0, 3200.0) == -20.0


def test_funding_record_fields():
    rec = funding_record(3, 250.0, 3400.0, 3200.0)
    assert (rec.day, rec.payoff, rec.fee) == (3, 200.0, 50.0)


def test_funding_fee_rejects_negative_mark():
    with pytest.raises(ValueError):
        funding_fee(-1.0, 3000.0, 3000.0)


def test_transaction_cost_by_hand():
    cfg = CostConfig()
    # 2 + 5 * 10000 / (10000 + 200 * 0.4 * 1.5) * (1 + 0.5 * 0.2)
    expected = 2.0 + 5.0 * 10000.0 / (10000.0 + 200.0 * 0.4 * 1.5) * 1.1
    assert transaction_cost(cfg, 10000.0, 200.0, 0.6, 1.5, 0.2) == pytest.approx(expected, rel=1e-15)


def test_transaction_cost_empty_pool():
    assert transaction_cost(CostConfig(), 10000.0, 0.0, 0.6, 3.0, 0.0) == 7.0


def test_denominator_floor():
    cfg = CostConfig()
    # Q0 + V (1 - sigma) N = 1000 - 5000 * 0.4 * 1 < 0, so the floor 0.05 Q0 applies
    assert transaction_cost(cfg, 1000.0, 5000.0, 0.6, -1.0, 0.0) == 2.0 + 5.0 / 0.05


@given(v=st.floats(-1e6, 1e6), n=st.floats(-10, 10), u=st.floats(0, 1), q0=st.floats(1, 1e6))
def test_cost_positive_and_bounded(v, n, u, q0):
    cfg = CostConfig()
    c = transaction_cost(cfg, q0, v, 0.6, n, u)
    assert math.isfinite(c)
    assert cfg.gas_base < c <= cfg.gas_base + cfg.impact_cost / cfg.denom_floor * (1 + cfg.congestion)


@pytest.mark.parametrize("kw", [dict(gas_base=-1.0), dict(impact_cost=-1.0), dict(congestion=-1.0), dict(denom_floor=0.0)])
def test_cost_config_validation(kw):
    with pytest.raises(ValueError):
        CostConfig(**kw)
