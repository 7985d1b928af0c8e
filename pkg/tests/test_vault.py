import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fisc.defi.vault import (
    BAT_LIQUIDATION_RATIO,
    ETH_LIQUIDATION_RATIO,
    FeeMode,
    LiquidationResult,
    SECONDS_PER_YEAR,
    Vault,
    VaultError,
    liquidate_vault,
    vault_accrue_and_check,
    vault_max_debt,
)


class TestMaxDebt:
    def test_eth_worked_example(self):
        # 15 ETH at $100 against the 150% ratio issues up to 1000 DAI.
        assert vault_max_debt(15, Fraction(100), ETH_LIQUIDATION_RATIO) == 1000

    def test_bat_ratio(self):
        assert BAT_LIQUIDATION_RATIO == Fraction(7, 4)
        assert vault_max_debt(700, Fraction(1, 4), BAT_LIQUIDATION_RATIO) == 100

    def test_rounds_down(self):
        assert vault_max_debt(1, Fraction(100), Fraction(3, 2)) == 66

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            vault_max_debt(0, Fraction(100), ETH_LIQUIDATION_RATIO)
        with pytest.raises(ValueError):
            vault_max_debt(1, Fraction(0), ETH_LIQUIDATION_RATIO)


class TestLiquidationTrigger:
    def test_exactly_at_ratio_is_safe(self):
        vault = Vault("ETH", 15, Fraction(1000))
        # 15 * 100 / 1000 = 1.5 exactly: still safe.
        assert not vault.is_liquidatable(Fraction(100))

    def test_one_tick_below_triggers(self):
        vault = Vault("ETH", 15, Fraction(1000))
        assert vault.is_liquidatable(Fraction(100) - Fraction(1, 10**9))

    def test_debtless_vault_never_liquidatable(self):
        vault = Vault("ETH", 15, Fraction(0))
        assert not vault.is_liquidatable(Fraction(1, 10**6))

    def test_healthy_at_175(self):
        vault = Vault("ETH", 15, Fraction(1000))
        # Ratio 1.75 sits above the 1.5 threshold.
        assert not vault.is_liquidatable(Fraction(1750, 15))


class TestAccrual:
    def test_zero_elapsed_leaves_debt(self):
        vault = Vault("ETH", 15, Fraction(1000), stability_fee_rate=Fraction(1, 10))
        vault_accrue_and_check(vault, 0, Fraction(100))
        assert vault.debt == 1000

    def test_simple_mode_linear(self):
        vault = Vault(
            "ETH", 15, Fraction(1000),
            stability_fee_rate=Fraction(1, 10), fee_mode=FeeMode.SIMPLE,
        )
        vault_accrue_and_check(vault, SECONDS_PER_YEAR, Fraction(1000))
        assert vault.debt == Fraction(1100)

    def test_continuous_mode_exponential(self):
        vault = Vault(
            "ETH", 15, Fraction(1000),
            stability_fee_rate=Fraction(1, 10), fee_mode=FeeMode.CONTINUOUS,
        )
        vault_accrue_and_check(vault, SECONDS_PER_YEAR, Fraction(1000))
        assert abs(float(vault.debt) - 1000 * math.exp(0.1)) < 1e-6

    def test_continuous_beats_simple(self):
        for rate in (Fraction(1, 20), Fraction(1, 10), Fraction(1, 4)):
            simple = Vault("ETH", 15, Fraction(1000), stability_fee_rate=rate,
                           fee_mode=FeeMode.SIMPLE)
            cont = Vault("ETH", 15, Fraction(1000), stability_fee_rate=rate,
                         fee_mode=FeeMode.CONTINUOUS)
            vault_accrue_and_check(simple, SECONDS_PER_YEAR, Fraction(10**6))
            vault_accrue_and_check(cont, SECONDS_PER_YEAR, Fraction(10**6))
            assert cont.debt > simple.debt

    def test_accrual_can_trip_liquidation(self):
        vault = Vault(
            "ETH", 15, Fraction(999),
            stability_fee_rate=Fraction(1, 10), fee_mode=FeeMode.SIMPLE,
        )
        assert not vault_accrue_and_check(vault, 0, Fraction(100))
        assert vault_accrue_and_check(vault, SECONDS_PER_YEAR, Fraction(100))

    def test_time_reversal_rejected(self):
        vault = Vault("ETH", 15, Fraction(1000), last_accrual=100)
        with pytest.raises(VaultError):
            vault_accrue_and_check(vault, 50, Fraction(100))


class TestLiquidation:
    def test_healthy_vault_cannot_be_liquidated(self):
        vault = Vault("ETH", 15, Fraction(1000))
        with pytest.raises(VaultError):
            liquidate_vault(vault, Fraction(100), Fraction(13, 100))

    def test_standard_path_conserves_value(self):
        vault = Vault("ETH", 15, Fraction(1000))
        price = Fraction(80)
        result = liquidate_vault(vault, price, Fraction(13, 100))
        assert result.debt_repaid == 1000
        assert result.penalty == Fraction(130)
        assert result.shortfall == 0
        assert result.debt_repaid + result.penalty + result.collateral_returned_value == 15 * price
        assert vault.closed and vault.debt == 0 and vault.collateral_amount == 0

    def test_underwater_vault_records_shortfall(self):
        vault = Vault("ETH", 15, Fraction(1000))
        price = Fraction(50)
        result = liquidate_vault(vault, price, Fraction(13, 100))
        assert result.debt_repaid == 750
        assert result.shortfall == 250
        assert result.penalty == 0
        assert result.collateral_returned_value == 0

    def test_double_liquidation_rejected(self):
        vault = Vault("ETH", 15, Fraction(1000))
        liquidate_vault(vault, Fraction(80), Fraction(13, 100))
        with pytest.raises(VaultError):
            liquidate_vault(vault, Fraction(80), Fraction(13, 100))

    @given(
        st.integers(min_value=1, max_value=10**6),
        st.integers(min_value=1, max_value=10**6),
        st.fractions(min_value=0, max_value=1),
        st.integers(min_value=1, max_value=10**4),
    )
    @settings(max_examples=80)
    def test_conservation_property(self, collateral, debt, penalty_rate, price_num):
        vault = Vault("ETH", collateral, Fraction(debt))
        price = Fraction(price_num, 100)
        if not vault.is_liquidatable(price):
            return
        result = liquidate_vault(vault, price, penalty_rate)
        value = collateral * price
        assert result.debt_repaid + result.penalty + result.collateral_returned_value == value
        assert result.shortfall == debt - result.debt_repaid
        assert result.penalty >= 0 and result.collateral_returned_value >= 0
