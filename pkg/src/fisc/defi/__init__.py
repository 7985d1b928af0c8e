from .pool import LiquidityPool, LpPosition, divergence_loss  # noqa: F401
from .vault import Vault, liquidate_vault  # noqa: F401
