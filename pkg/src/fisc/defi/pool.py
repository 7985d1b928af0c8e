"""Constant-product pool mechanics and LP position accounting.

Reserves are integer base units; swap and withdrawal rounding always
favors the pool so the product invariant never decreases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

STANDARD_FEE_TIERS = (Fraction(5, 10_000), Fraction(3, 1_000), Fraction(1, 100))

EQUAL_VALUE_TOLERANCE = Fraction(1, 1000)


class PoolError(Exception):
    pass


class DustOutput(PoolError):
    pass


@dataclass
class LpPosition:
    owner: str
    lp_units: int
    x_in: int
    y_in: int
    timestamp: int = 0


@dataclass
class LiquidityPool:
    """x*y=K pair. reserve_x / reserve_y are base units of the two assets."""

    reserve_x: int = 0
    reserve_y: int = 0
    fee_rate: Fraction = Fraction(3, 1_000)
    total_lp_units: int = 0

    def __post_init__(self):
        if self.reserve_x < 0 or self.reserve_y < 0:
            raise ValueError("reserves must be non-negative")
        if not 0 <= self.fee_rate < 1:
            raise ValueError("fee rate must be in [0, 1)")

    @property
    def k(self) -> int:
        return self.reserve_x * self.reserve_y

    @property
    def live(self) -> bool:
        return self.reserve_x > 0 and self.reserve_y > 0

    # --- swaps ---

    def swap_exact_in(self, amount_in: int, x_to_y: bool = True) -> int:
        """Swap a fixed input for the other asset; returns the output.

        out = reserve_out - K / (reserve_in + in*(1-fee)), rounded down.
        The full input (fee included) lands in the reserves, so K never
        decreases and strictly grows whenever the fee is nonzero.
        """
        if amount_in <= 0:
            raise PoolError("swap input must be positive")
        if not self.live:
            raise PoolError("pool is not live")
        reserve_in = self.reserve_x if x_to_y else self.reserve_y
        reserve_out = self.reserve_y if x_to_y else self.reserve_x
        effective_in = Fraction(amount_in) * (1 - self.fee_rate)
        out_exact = Fraction(reserve_out) - Fraction(self.k) / (reserve_in + effective_in)
        out = math.floor(out_exact)
        if out <= 0:
            raise DustOutput("output rounds to zero")
        if x_to_y:
            self.reserve_x += amount_in
            self.reserve_y -= out
        else:
            self.reserve_y += amount_in
            self.reserve_x -= out
        return out

    def quote_swap(self, amount_in: int, x_to_y: bool = True) -> int:
        """Swap output without mutating the pool."""
        snapshot = LiquidityPool(self.reserve_x, self.reserve_y, self.fee_rate, self.total_lp_units)
        return snapshot.swap_exact_in(amount_in, x_to_y)

    def quote_slippage(self, amount_in: int, x_to_y: bool = True) -> Fraction:
        """Effective-vs-marginal price deviation, always <= 0."""
        if amount_in <= 0:
            raise PoolError("quote input must be positive")
        out = self.quote_swap(amount_in, x_to_y)
        reserve_in = self.reserve_x if x_to_y else self.reserve_y
        reserve_out = self.reserve_y if x_to_y else self.reserve_x
        effective = Fraction(out, amount_in)
        marginal = Fraction(reserve_out, reserve_in)
        return effective / marginal - 1

    # --- liquidity ---

    def add_liquidity(
        self,
        owner: str,
        x_in: int,
        y_in: int,
        price_x: Fraction,
        price_y: Fraction,
        timestamp: int = 0,
        tolerance: Fraction = EQUAL_VALUE_TOLERANCE,
    ) -> LpPosition:
        """Mint LP units for an equal-value two-sided deposit (V2 rule)."""
        if x_in <= 0 or y_in <= 0:
            raise PoolError("deposits must be positive on both sides")
        value_x = x_in * price_x
        value_y = y_in * price_y
        if abs(value_x - value_y) > tolerance * max(value_x, value_y):
            raise PoolError(
                "deposit values differ beyond tolerance: %s vs %s" % (value_x, value_y)
            )
        if self.total_lp_units == 0:
            minted = math.isqrt(x_in * y_in)
            if minted <= 0:
                raise PoolError("initial deposit too small")
        else:
            minted = min(
                x_in * self.total_lp_units // self.reserve_x,
                y_in * self.total_lp_units // self.reserve_y,
            )
            if minted <= 0:
                raise DustOutput("deposit mints zero units")
        self.reserve_x += x_in
        self.reserve_y += y_in
        self.total_lp_units += minted
        return LpPosition(owner, minted, x_in, y_in, timestamp)

    def remove_liquidity(self, position: LpPosition) -> tuple[int, int]:
        """Burn a position for its pro-rata share of current reserves.

        Shares are taken sequentially (floor against the current totals),
        so redeeming every unit drains the reserves exactly.
        """
        if position.lp_units <= 0:
            raise PoolError("position has no units")
        if position.lp_units > self.total_lp_units:
            raise PoolError("redeeming more units than outstanding")
        x_out = self.reserve_x * position.lp_units // self.total_lp_units
        y_out = self.reserve_y * position.lp_units // self.total_lp_units
        self.reserve_x -= x_out
        self.reserve_y -= y_out
        self.total_lp_units -= position.lp_units
        position.lp_units = 0
        return x_out, y_out


def divergence_loss(p: float | Fraction) -> float:
    """LP value shortfall versus holding, for price ratio p = now/at-deposit.

    2*sqrt(p)/(1+p) - 1: zero at p=1, negative elsewhere, symmetric in
    p <-> 1/p.
    """
    p = float(p)
    if p <= 0:
        raise ValueError("price ratio must be positive")
    return 2 * math.sqrt(p) / (1 + p) - 1
