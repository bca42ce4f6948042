"""Automated-market-maker pool rules, optimal arbitrage and impermanent loss.

Works in pool-normalized coordinates x = X/N, y = Y/N starting at (1, 1), and
prices the loss hedges (log, entropy and exact power-contract decompositions)
under square-root stochastic variance with zero rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gaussian import B_kappa, Bbar_kappa
from .pricing import HestonParams, power_contract_price

__all__ = [
    "PoolRule",
    "ArbResult",
    "HedgeQuote",
    "pool_curve",
    "optimal_arbitrage",
    "impermanent_loss",
    "log_contract_value",
    "entropy_contract_value",
    "exact_loss_value",
    "hedge_contracts",
    "hedge_gap_report",
]

LOG_PREFACTOR = 0.5
ENTROPY_PREFACTOR = 0.5


@dataclass(frozen=True)
class PoolRule:
    """Constant-sum, constant-product or mixed reserve rule of a two-token pool."""

    kind: str
    alpha: float | None = None
    N: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant_sum", "constant_product", "mixed"):
            raise ValueError(f"unknown pool rule {self.kind!r}")
        if self.kind == "mixed" and (self.alpha is None or self.alpha <= 0.0):
            raise ValueError("mixed rule requires alpha > 0")


def pool_curve(rule: PoolRule, x: float) -> tuple[float, float, float]:
    """Reserve curve y(x) with first and second derivatives in normalized units."""
    if x <= 0.0:
        raise ValueError("x must be positive")
    if rule.kind == "constant_sum":
        if x >= 2.0:
            raise ValueError("constant-sum pool is exhausted at x = 2")
        return 2.0 - x, -1.0, 0.0
    if rule.kind == "constant_product":
        return 1.0 / x, -1.0 / x ** 2, 2.0 / x ** 3
    a = rule.alpha
    u = 2.0 * (1.0 - a) + a * x
    root = math.sqrt(u ** 2 + 8.0 * a / x)
    y = (-u + root) / (2.0 * a)
    dy = 0.5 * (-1.0 + (u - 4.0 / x ** 2) / root)
    d2y = 0.5 * ((a + 8.0 / x ** 3) / root - a * (u - 4.0 / x ** 2) ** 2 / root ** 3)
    return y, dy, d2y


@dataclass
class ArbResult:
    x_star: float
    y_star: float
    omega_star: float
    portfolio_value: float
    iterations: int = 0


def optimal_arbitrage(rule: PoolRule, S: float, max_newton: int = 30) -> ArbResult:
    """Arbitrageur's optimal pool state against an external price S.

    Stationarity means the pool's marginal price matches the market:
    y'(x*) = -1/S. Constant-sum pools are emptied on the profitable side;
    constant-product pools have the square-root solution; the mixed rule runs
    Newton from the constant-product guess with a bisection fallback.
    """
    if S <= 0.0:
        raise ValueError("external price must be positive")
    if rule.kind == "constant_sum":
        if S > 1.0:
            x, y = 2.0, 0.0
        elif S < 1.0:
            x, y = 0.0, 2.0
        else:
            x, y = 1.0, 1.0
        omega = abs(S - 1.0)
        return ArbResult(x, y, omega, x + S * y)
    if rule.kind == "constant_product":
        x = math.sqrt(S)
        y = 1.0 / x
        omega = (math.sqrt(S) - 1.0) ** 2
        return ArbResult(x, y, omega, x + S * y)
    x = math.sqrt(S)
    target = -1.0 / S
    iterations = 0
    for _ in range(max_newton):
        iterations += 1
        _, dy, d2y = pool_curve(rule, x)
        step = (dy - target) / d2y
        x_new = x - step
        if x_new <= 0.0:
            x_new = 0.5 * x
        x = x_new
        if abs(step) < 1e-15 * max(1.0, x):
            break
    _, dy, _ = pool_curve(rule, x)
    if abs(dy - target) > 1e-10:
        x = _bisect_mixed(rule, target)
        _, dy, _ = pool_curve(rule, x)
        if abs(dy - target) > 1e-10:
            raise RuntimeError("mixed-rule arbitrage failed to converge")
    y, _, _ = pool_curve(rule, x)
    omega = S * (1.0 - y) - (x - 1.0)
    return ArbResult(x, y, omega, x + S * y, iterations)


def _bisect_mixed(rule: PoolRule, target: float) -> float:
    lo, hi = 1e-9, 1e6
    f = lambda x: pool_curve(rule, x)[1] - target
    # y' is increasing in x (convex curve), so the bracket is monotone
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def impermanent_loss(rule: PoolRule, S: float) -> tuple[float, float]:
    """Shortfall of the arbitraged pool vs buy-and-hold and its percentage.

    omega = (S + 1) - pi*(S) >= 0, lambda = omega / (S + 1).
    """
    arb = optimal_arbitrage(rule, S)
    omega = (S + 1.0) - arb.portfolio_value
    return omega, omega / (S + 1.0)


# ---------------------------------------------------------------------------
# hedge contracts (zero rates throughout)


def log_contract_value(model: HestonParams, S: float, v: float, T: float) -> float:
    """Value of (S - 1 - ln S)/2 under square-root variance.

    The variance leg is affine in v; the reversion speed is unshifted.
    """
    k = model.kappa
    alpha = model.chi * (T - Bbar_kappa(k, T)) / (2.0 * k)
    beta = Bbar_kappa(k, T) / 2.0
    return LOG_PREFACTOR * (S - 1.0 - math.log(S)) + alpha + beta * v


def entropy_contract_value(model: HestonParams, S: float, v: float, T: float) -> float:
    """Value of (S ln S - (S - 1))/2; the share measure shifts kappa by rho eps."""
    k1 = model.kappa - model.epsilon * model.rho
    alpha = model.chi * (T - Bbar_kappa(k1, T)) / (2.0 * k1)
    beta = Bbar_kappa(k1, T) / 2.0
    return (ENTROPY_PREFACTOR * (S * math.log(S) - (S - 1.0))
            + (alpha + beta * v) * S)


def exact_loss_value(model: HestonParams, S: float, v: float, T: float) -> float:
    """Exact value of the constant-product loss (sqrt(S) - 1)^2.

    The payoff is S + 1 - 2 sqrt(S): two trivial power contracts plus the
    half-power one, so no payoff approximation is involved.
    """
    m = HestonParams(v, model.chi, model.kappa, model.epsilon, model.rho)
    return S + 1.0 - 2.0 * power_contract_price(m, 0.5, S, 0.0, T)


@dataclass
class HedgeQuote:
    c_lc: float
    c_ec: float
    value_log: float
    value_entropy: float
    value_exact: float

    @property
    def gap(self) -> float:
        return max(self.value_log, self.value_entropy) - self.value_exact


def hedge_contracts(model: HestonParams, t: float, S: float, tbar: float) -> HedgeQuote:
    """Log, entropy and exact power-decomposition values of the loss hedge."""
    T = tbar - t
    return HedgeQuote(
        c_lc=LOG_PREFACTOR,
        c_ec=ENTROPY_PREFACTOR,
        value_log=log_contract_value(model, S, model.v0, T),
        value_entropy=entropy_contract_value(model, S, model.v0, T),
        value_exact=exact_loss_value(model, S, model.v0, T),
    )


def hedge_gap_report(model: HestonParams, maturities, S: float = 1.0) -> list[dict]:
    """Per-maturity exact value, both approximations, and the dominance gap."""
    rows = []
    for T in maturities:
        q = hedge_contracts(model, 0.0, S, T)
        rows.append({
            "T": float(T),
            "exact": q.value_exact,
            "log_contract": q.value_log,
            "entropy_contract": q.value_entropy,
            "gap": q.gap,
        })
    return rows
