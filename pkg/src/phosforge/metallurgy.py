"""Dephosphorization quantities: partition coefficient and phosphate capacity.

Pressures are in atm throughout; concentrations in wt%.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

# Slag/metal partition coefficients outside this band are unusual for EAF
# practice and get flagged (not rejected; plant slags legitimately vary).
TYPICAL_LP_BAND = (5.0, 15.0)


@dataclass(frozen=True)
class SlagMetalState:
    """Snapshot of the slag-metal-gas system entering the calculators."""

    pct_p_slag: float = 0.0
    pct_p_metal: float = 0.0
    pct_po4_slag: Optional[float] = None
    p_o2: float = 1.0
    p_p2: float = 1.0
    k_p: float = 1.0
    f_p: float = 1.0
    k2: Optional[float] = None
    a_o2minus: Optional[float] = None
    gamma0_po4: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ("pct_p_slag", "pct_p_metal"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.pct_po4_slag is not None and self.pct_po4_slag < 0:
            raise ValueError("pct_po4_slag must be >= 0")


@dataclass(frozen=True)
class PartitionResult:
    value: float
    in_typical_band: bool


def partition_coefficient(state: SlagMetalState) -> PartitionResult:
    """L_p = (%P in slag) / (%P in metal), flagged when outside [5, 15]."""
    if state.pct_p_metal <= 0:
        raise ValueError("metal-phase P must be > 0 to form the ratio")
    lp = state.pct_p_slag / state.pct_p_metal
    lo, hi = TYPICAL_LP_BAND
    return PartitionResult(value=lp, in_typical_band=lo <= lp <= hi)


def phosphate_capacity_gas(state: SlagMetalState) -> float:
    """C = (%PO4) / (P_P2^(1/2) * P_O2^(5/4)), the slag-gas definition."""
    if state.pct_po4_slag is None:
        raise ValueError("pct_po4_slag is required for the gas-equilibrium form")
    if state.p_p2 <= 0 or state.p_o2 <= 0:
        raise ValueError("partial pressures must be > 0")
    return state.pct_po4_slag / (state.p_p2**0.5 * state.p_o2**1.25)


def phosphate_capacity_ionic(state: SlagMetalState) -> float:
    """Optional cross-check form C = K2 * a_{O2-}^(3/2) / gamma0_PO4."""
    if state.k2 is None or state.a_o2minus is None or state.gamma0_po4 is None:
        raise ValueError("k2, a_o2minus and gamma0_po4 are all required")
    if state.gamma0_po4 <= 0:
        raise ValueError("gamma0_po4 must be > 0")
    return state.k2 * state.a_o2minus**1.5 / state.gamma0_po4


def phosphate_capacity_from_partition(state: SlagMetalState, l_p: float) -> float:
    """C = L_p * k_p / (f_p * P_O2^(5/4)), linking capacity to the partition ratio."""
    if state.f_p <= 0:
        raise ValueError("f_p must be > 0")
    if state.p_o2 <= 0:
        raise ValueError("p_o2 must be > 0")
    return l_p * state.k_p / (state.f_p * state.p_o2**1.25)


def partition_from_capacity(state: SlagMetalState, capacity: float) -> float:
    """Algebraic inverse of phosphate_capacity_from_partition."""
    if state.k_p <= 0:
        raise ValueError("k_p must be > 0")
    return capacity * state.f_p * state.p_o2**1.25 / state.k_p
