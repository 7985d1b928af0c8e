"""Collateralized debt positions: fee accrual and liquidation lifecycle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

SECONDS_PER_YEAR = 365 * 86_400

ETH_LIQUIDATION_RATIO = Fraction(3, 2)
BAT_LIQUIDATION_RATIO = Fraction(7, 4)


class VaultError(Exception):
    pass


class FeeMode(Enum):
    SIMPLE = "simple"
    CONTINUOUS = "continuous"


@dataclass
class Vault:
    """Collateral (base units of one asset) against stablecoin-denominated debt."""

    collateral_asset: str
    collateral_amount: int
    debt: Fraction
    liquidation_ratio: Fraction = ETH_LIQUIDATION_RATIO
    stability_fee_rate: Fraction = Fraction(0)
    last_accrual: int = 0
    fee_mode: FeeMode = FeeMode.CONTINUOUS
    closed: bool = False

    def __post_init__(self):
        if self.debt < 0:
            raise ValueError("debt must be non-negative")
        if self.liquidation_ratio <= 1:
            raise ValueError("liquidation ratio must exceed 1")

    def collateral_value(self, price: Fraction) -> Fraction:
        return self.collateral_amount * Fraction(price)

    def is_liquidatable(self, price: Fraction) -> bool:
        """Strict: a vault exactly at the ratio is still safe."""
        if self.debt == 0:
            return False
        return self.collateral_value(price) / self.debt < self.liquidation_ratio


def vault_max_debt(collateral_amount: int, price: Fraction, liquidation_ratio: Fraction) -> int:
    """Largest debt issuable against the collateral, rounded down."""
    if collateral_amount <= 0 or Fraction(price) <= 0 or liquidation_ratio <= 0:
        raise ValueError("inputs must be positive")
    return math.floor(collateral_amount * Fraction(price) / liquidation_ratio)


def vault_accrue_and_check(vault: Vault, now: int, price: Fraction) -> bool:
    """Accrue the stability fee up to `now`, then report the liquidation flag.

    Continuous compounding uses exp(rate*dt); the simple mode multiplies
    by (1 + rate*dt). Zero elapsed time leaves the debt untouched.
    """
    if now < vault.last_accrual:
        raise VaultError("time went backwards: %d < %d" % (now, vault.last_accrual))
    elapsed = now - vault.last_accrual
    if elapsed and vault.debt > 0 and vault.stability_fee_rate != 0:
        years = Fraction(elapsed, SECONDS_PER_YEAR)
        if vault.fee_mode is FeeMode.CONTINUOUS:
            growth = Fraction(math.exp(float(vault.stability_fee_rate * years)))
        else:
            growth = 1 + vault.stability_fee_rate * years
        vault.debt = vault.debt * growth
    vault.last_accrual = now
    return vault.is_liquidatable(price)


@dataclass(frozen=True)
class LiquidationResult:
    debt_repaid: Fraction
    penalty: Fraction
    collateral_returned_value: Fraction
    shortfall: Fraction  # protocol debt when the sale cannot cover the loan


def liquidate_vault(vault: Vault, price: Fraction, penalty_rate: Fraction) -> LiquidationResult:
    """Sell the collateral at `price`, repay debt, deduct a penalty.

    Value is conserved: repaid + penalty + returned = collateral value,
    exactly. A shortfall (collateral worth less than the debt) is
    recorded as protocol debt for the downstream auction hook.
    """
    if vault.closed:
        raise VaultError("vault already closed")
    if not vault.is_liquidatable(price):
        raise VaultError("vault is healthy; cannot liquidate")
    value = vault.collateral_value(price)
    repaid = min(vault.debt, value)
    penalty = min(Fraction(penalty_rate) * vault.debt, value - repaid)
    returned = value - repaid - penalty
    shortfall = vault.debt - repaid
    vault.debt = Fraction(0)
    vault.collateral_amount = 0
    vault.closed = True
    return LiquidationResult(repaid, penalty, returned, shortfall)
