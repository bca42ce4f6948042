"""Derivative pricing on top of the density and characteristic-function modules.

European options under five models, Asian options, volatility and variance
swaps and swaptions, bonds and bond options, Europeans under stochastic rates,
and implied-volatility inversion. All Fourier pricers work in the symmetric
exponential-payoff representation, whose k^2 + 1/4 denominator builds the
damping in once and for all.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from . import nongaussian, odes
from .gaussian import A_kappa, B_kappa, Bbar_kappa, OUParams, augmented_ou_tpdf
from .nongaussian import FellerParams, aug_feller_cf
from .numerics import (ComplexLogTracker, QuadratureSpec, invert_fourier_1d,
                       normal_cdf, normal_pdf)

__all__ = [
    "VanillaSpec",
    "HestonParams",
    "SteinSteinParams",
    "PathDependentParams",
    "VasicekParams",
    "CIRParams",
    "PriceQuote",
    "forward_price",
    "black_scholes_price",
    "peakon_closed_form",
    "peakon_price_bs",
    "heston_covered_call",
    "heston_price",
    "stein_stein_price",
    "path_dependent_price",
    "bachelier_price",
    "asian_price",
    "vol_var_swap",
    "bond_price",
    "bond_option_price",
    "stochastic_rate_european",
    "implied_vol",
    "power_contract_price",
]


@dataclass(frozen=True)
class VanillaSpec:
    """European payoff description: strike, maturity and style."""

    strike: float
    maturity: float
    style: str = "call"

    def __post_init__(self):
        if self.style not in ("forward", "call", "put", "covered_call", "peakon"):
            raise ValueError(f"unknown style {self.style!r}")
        if self.strike <= 0.0:
            raise ValueError("strike must be positive for scale-invariant models")

    @property
    def phi(self) -> int:
        return -1 if self.style == "put" else 1


@dataclass(frozen=True)
class HestonParams:
    v0: float
    chi: float
    kappa: float
    epsilon: float
    rho: float
    r: float = 0.0

    def __post_init__(self):
        if self.epsilon <= 0.0 or self.v0 < 0.0 or not -1.0 < self.rho < 1.0:
            raise ValueError("require epsilon > 0, v0 >= 0, rho in (-1, 1)")


@dataclass(frozen=True)
class SteinSteinParams:
    sigma0: float
    chi: float
    kappa: float
    epsilon: float
    rho: float
    r: float = 0.0

    def __post_init__(self):
        if self.epsilon <= 0.0 or not -1.0 <= self.rho <= 1.0:
            raise ValueError("require epsilon > 0 and rho in [-1, 1]")


@dataclass(frozen=True)
class PathDependentParams:
    """Moving-average volatility model: sigma^2 = a0 + a1 (ln S - ln A)."""

    a0: float
    a1: float
    kappa: float

    def __post_init__(self):
        if not (self.a0 > 0.0 and self.a1 < 0.0):
            raise ValueError("leverage requires a0 > 0 and a1 < 0")


@dataclass(frozen=True)
class VasicekParams:
    chi: float
    kappa: float
    epsilon: float

    @property
    def theta(self) -> float:
        return self.chi / self.kappa


@dataclass(frozen=True)
class CIRParams:
    chi: float
    kappa: float
    epsilon: float


@dataclass
class PriceQuote:
    value: float
    stderr_or_quaderr: float = 0.0
    warnings: list = field(default_factory=list)


def forward_price(S: float, Z: float) -> float:
    """Forward = spot / zero-coupon bond price."""
    if not 0.0 < Z <= 1.0:
        raise ValueError("bond price must lie in (0, 1]")
    return S / Z


# ---------------------------------------------------------------------------
# Black-Scholes and the symmetric exponential payoff


def black_scholes_price(spec: VanillaSpec, S: float, sigma: float, r: float,
                        t: float = 0.0) -> PriceQuote:
    """Classical lognormal European price; covered call = S - call."""
    T = spec.maturity - t
    if sigma <= 0.0 or T <= 0.0:
        raise ValueError("require sigma > 0 and T > 0")
    K = spec.strike
    srt = sigma * math.sqrt(T)
    d_plus = math.log(math.exp(r * T) * S / K) / srt + 0.5 * srt
    d_minus = d_plus - srt
    call = S * normal_cdf(d_plus) - math.exp(-r * T) * K * normal_cdf(d_minus)
    return _assemble_vanilla(spec, call, S, math.exp(-r * T) * K)


def _assemble_vanilla(spec: VanillaSpec, call: float, spot_leg: float,
                      bond_leg: float, warnings=None) -> PriceQuote:
    style = spec.style
    if style == "forward":
        value = spot_leg - bond_leg
    elif style == "call":
        value = call
    elif style == "put":
        value = call - spot_leg + bond_leg
    else:  # covered call: the optionality leg shared by calls and puts
        value = spot_leg - call
    return PriceQuote(value, warnings=warnings or [])


def peakon_closed_form(x: float, sigma: float, T: float) -> float:
    """Drift-free value of the symmetric exponential payoff e^{-|x|/2}."""
    srt = sigma * math.sqrt(T)
    return (math.exp(x / 2.0) * normal_cdf(-x / srt - srt / 2.0)
            + math.exp(-x / 2.0) * normal_cdf(x / srt - srt / 2.0))


def peakon_price_bs(x, sigma: float, T: float,
                    spec: QuadratureSpec | None = None) -> np.ndarray:
    """Fourier price of the symmetric exponential payoff under lognormal dynamics.

    V = (1/2pi) int exp(-(k^2 + 1/4) sigma^2 T / 2 + ikx) / (k^2 + 1/4) dk;
    one wave-number grid prices every requested log-moneyness at once.
    """
    if sigma * math.sqrt(T) <= 0.0:
        raise ValueError("require sigma sqrt(T) > 0")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    spec = spec or QuadratureSpec(node_count=4097, abs_tol=1e-10)

    def cf(k):
        k = np.asarray(k)
        return np.exp(-(k ** 2 + 0.25) * sigma ** 2 * T / 2.0) / (k ** 2 + 0.25)

    res = invert_fourier_1d(cf, xs, spec)
    return res.values if np.ndim(x) else float(res.values[0])


# ---------------------------------------------------------------------------
# stochastic volatility pricers built on the peakon representation


def _peakon_to_vanilla(spec: VanillaSpec, S: float, r: float, T: float,
                       v_cc: float, warnings) -> PriceQuote:
    """Assemble forward/call/put/covered-call prices from the peakon value at x."""
    K = spec.strike
    df = math.exp(-r * T)
    x = math.log(S / (K * df))
    u_cc = df * K * math.exp(x / 2.0) * v_cc
    call = S - u_cc
    if spec.style == "peakon":
        return PriceQuote(v_cc, warnings=warnings)
    return _assemble_vanilla(spec, call, S, df * K, warnings)


def heston_covered_call(model: HestonParams, x, T: float,
                        spec: QuadratureSpec | None = None):
    """Peakon value under square-root stochastic variance via one k-integral.

    The effective reversion speed carries the rho eps / 2 shift from the
    symmetric-payoff transform; the complex logarithm in the exponent is kept
    branch-continuous along the wave-number grid.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    spec = spec or QuadratureSpec(node_count=4097, abs_tol=1e-9)
    kap_hat = model.kappa - model.rho * model.epsilon / 2.0
    eps, rho, chi, v0 = model.epsilon, model.rho, model.chi, model.v0

    def cf(k):
        k = np.asarray(k, dtype=complex)
        mu = -0.5 * (kap_hat - 1j * rho * eps * k)
        quarter = k ** 2 + 0.25
        zeta = np.sqrt(mu * mu + 0.25 * eps ** 2 * quarter)
        zeta = np.where(zeta.real < 0, -zeta, zeta)
        # lambda_plus = mu + zeta computed without cancellation (product is exact)
        lam_p = 0.25 * eps ** 2 * quarter / (zeta - mu)
        R = np.exp(-2.0 * zeta * T)
        w = lam_p * (R - 1.0) / (2.0 * zeta)
        # log Omega = lam_p T + log(1 + w); small |w| needs the series for the
        # huge 2 chi / eps^2 prefactor not to amplify rounding
        log1p_w = np.empty_like(w)
        small = np.abs(w) < 1e-4
        ws = w[small]
        log1p_w[small] = ws * (1.0 - ws * (0.5 - ws / 3.0))
        tracker = ComplexLogTracker()
        big = ~small
        if np.any(big):
            log1p_w[big] = tracker.log_array(np.atleast_1d(1.0 + w[big]))
        log_omega = lam_p * T + log1p_w
        varsigma = 0.5 * (1.0 - R) / ((zeta - mu) + lam_p * R)
        alpha = -(2.0 * chi / eps ** 2) * log_omega
        return np.exp(alpha - quarter * varsigma * v0) / quarter

    res = invert_fourier_1d(cf, xs, spec)
    vals = res.values if np.ndim(x) else float(res.values[0])
    return vals, res


def heston_price(spec: VanillaSpec, S: float, model: HestonParams,
                 t: float = 0.0, quad: QuadratureSpec | None = None) -> PriceQuote:
    T = spec.maturity - t
    x = math.log(S / (spec.strike * math.exp(-model.r * T)))
    v_cc, res = heston_covered_call(model, x, T, quad)
    quote = _peakon_to_vanilla(spec, S, model.r, T, v_cc, res.warnings)
    quote.stderr_or_quaderr = res.error_estimate
    report = nongaussian.moment_explosion(
        FellerParams(model.chi, model.kappa, model.epsilon), model.rho, 2.0)
    if report.t_star is not None and report.t_star < T:
        quote.warnings.append(
            f"second exponential moment explodes at T={report.t_star:.4f}")
    return quote


def stein_stein_covered_call(model: SteinSteinParams, x, T: float,
                             spec: QuadratureSpec | None = None):
    """Peakon value under OU-driven volatility from the matrix Riccati ansatz."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    spec = spec or QuadratureSpec(node_count=2049, abs_tol=1e-8,
                                  truncation_halfwidth=None)
    kap_hat = model.kappa - model.rho * model.epsilon / 2.0
    sig0 = model.sigma0

    def cf(k):
        k = np.atleast_1d(np.asarray(k, dtype=complex))
        out = np.empty_like(k)
        for i, m1 in enumerate(k):
            coeff = odes.stein_matrix_riccati(model.chi, kap_hat, model.epsilon,
                                              model.rho, (m1, 0.0, 0.0), T,
                                              kill_shift=0.25)
            out[i] = cmath.exp(coeff.alpha + 1j * coeff.delta2 * sig0 ** 2
                               + 1j * coeff.delta3 * sig0)
        return out / (k ** 2 + 0.25)

    res = invert_fourier_1d(cf, xs, spec)
    vals = res.values if np.ndim(x) else float(res.values[0])
    return vals, res


def stein_stein_price(spec: VanillaSpec, S: float, model: SteinSteinParams,
                      t: float = 0.0, quad: QuadratureSpec | None = None) -> PriceQuote:
    T = spec.maturity - t
    x = math.log(S / (spec.strike * math.exp(-model.r * T)))
    v_cc, res = stein_stein_covered_call(model, x, T, quad)
    quote = _peakon_to_vanilla(spec, S, model.r, T, v_cc, res.warnings)
    quote.stderr_or_quaderr = res.error_estimate
    return quote


def path_dependent_covered_call(model: PathDependentParams, x_avg: float, y_spot: float,
                                T: float, spec: QuadratureSpec | None = None):
    """Peakon value for the moving-average volatility model (zero rates).

    x_avg and y_spot are log average and log spot, both strike-normalized.
    """
    spec = spec or QuadratureSpec(node_count=2049, abs_tol=1e-8)
    warnings: list[str] = []

    def cf(l):
        l = np.atleast_1d(np.asarray(l, dtype=complex))
        out = np.empty_like(l)
        for i, lv in enumerate(l):
            pd = odes.path_dependent_characteristics(model.a0, model.a1, model.kappa,
                                                     0.0, lv, T, kill=True)
            out[i] = cmath.exp(pd.alpha + 1j * pd.beta * x_avg + 1j * pd.gamma * y_spot)
        return out / (l ** 2 + 0.25)

    res = invert_fourier_1d(cf, [0.0], spec)
    return float(res.values[0]), res


def path_dependent_price(spec: VanillaSpec, S: float, A: float,
                         model: PathDependentParams, t: float = 0.0,
                         quad: QuadratureSpec | None = None) -> PriceQuote:
    """European price under the moving-average volatility model (r = 0).

    Requires the squared volatility a0 + a1 (ln S - ln A) to be positive at
    the initial state.
    """
    T = spec.maturity - t
    if model.a0 + model.a1 * math.log(S / A) <= 0.0:
        raise ValueError("initial state violates positive squared volatility")
    x_avg = math.log(A / spec.strike)
    y_spot = math.log(S / spec.strike)
    try:
        v_cc, res = path_dependent_covered_call(model, x_avg, y_spot, T, quad)
    except odes.BlowUpError as exc:
        return PriceQuote(math.nan, warnings=[f"mode blow-up: {exc}"])
    u_cc = spec.strike * math.exp(y_spot / 2.0) * v_cc
    call = S - u_cc
    quote = _assemble_vanilla(spec, call, S, spec.strike, res.warnings)
    quote.stderr_or_quaderr = res.error_estimate
    return quote


# ---------------------------------------------------------------------------
# additive model and Asians


def bachelier_price(spec: VanillaSpec, S: float, sigma_hat: float, r: float,
                    t: float = 0.0) -> PriceQuote:
    """Arithmetic (normal) model price in spot terms."""
    if sigma_hat <= 0.0:
        raise ValueError("sigma_hat must be positive")
    T = spec.maturity - t
    phi, K = spec.phi, spec.strike
    if r == 0.0:
        var = sigma_hat ** 2 * T
    else:
        var = sigma_hat ** 2 * (1.0 - math.exp(-2.0 * r * T)) / (2.0 * r)
    sd = math.sqrt(var)
    z = (S - math.exp(-r * T) * K) / sd
    value = phi * (S - math.exp(-r * T) * K) * normal_cdf(phi * z) + sd * normal_pdf(z)
    if spec.style in ("call", "put"):
        return PriceQuote(float(value))
    raise ValueError("bachelier_price supports call/put styles")


def asian_price(kind: str, spec: VanillaSpec, S: float, sigma: float, r: float,
                t: float = 0.0) -> PriceQuote:
    """Fixed-strike Asian options.

    ``arithmetic_bachelier`` averages the arithmetic-model price path;
    ``geometric_bs`` averages the log of the lognormal path. Both are closed
    form through the joint Gaussian law of the state and its running integral.
    """
    T = spec.maturity - t
    phi, K = spec.phi, spec.strike
    if kind == "arithmetic_bachelier":
        R = B_kappa(-r, T) * S
        if r == 0.0:
            var = sigma ** 2 * T ** 3 / 3.0
        else:
            var = sigma ** 2 / r ** 2 * (T - 2.0 * B_kappa(-r, T) + B_kappa(-2.0 * r, T))
        sd = math.sqrt(var)
        z = (R - T * K) / sd
        value = math.exp(-r * T) / T * (phi * (R - T * K) * normal_cdf(phi * z)
                                        + sd * normal_pdf(z))
        return PriceQuote(float(value))
    if kind == "geometric_bs":
        srt = math.sqrt(sigma ** 2 * T / 3.0)
        d_minus = (math.log(S / K) + 0.5 * (r - sigma ** 2 / 2.0) * T) / srt
        d_plus = d_minus + srt
        value = phi * (math.exp(-0.5 * (r + sigma ** 2 / 6.0) * T) * S * normal_cdf(phi * d_plus)
                       - math.exp(-r * T) * K * normal_cdf(phi * d_minus))
        return PriceQuote(float(value))
    raise ValueError(f"unknown Asian kind {kind!r}")


# ---------------------------------------------------------------------------
# volatility and variance swaps


def vol_var_swap(kind: str, chi: float, kappa: float, epsilon: float, y0: float,
                 t: float, tbar: float, strike: float | None = None,
                 phi: int = 1, r: float = 0.0,
                 quad: QuadratureSpec | None = None) -> PriceQuote:
    """Fair strikes and option values on realized volatility / variance.

    vol_swap, var_swap_feller and var_swap_ou2 return fair strikes (the first
    two share one formula with differently interpreted parameters; the third
    is the OU-squared alternative whose value differs at finite horizon).
    vol_swaption uses the Gaussian integrated-state law; var_swaption inverts
    the characteristic function against the kinked payoff, with the double
    pole handled by the exact absolute-moment representation.
    """
    T = tbar - t
    theta = chi / kappa
    if kind in ("vol_swap", "var_swap_feller"):
        return PriceQuote(theta + (y0 - theta) * Bbar_kappa(kappa, T) / T)
    if kind == "var_swap_ou2":
        return PriceQuote(theta ** 2 + (y0 ** 2 - theta ** 2) * Bbar_kappa(kappa, T) / T)
    if kind == "vol_swaption":
        if strike is None:
            raise ValueError("swaption requires a strike on the integrated state")
        law = augmented_ou_tpdf(OUParams(chi, kappa, epsilon), t, 0.0, y0, tbar)
        p = law.mean[0]
        h0 = law.cov[0, 0]
        sd = math.sqrt(h0)
        z = (p - strike) / sd
        value = math.exp(-r * T) * (phi * (p - strike) * normal_cdf(phi * z)
                                    + sd * normal_pdf(z))
        return PriceQuote(float(value))
    if kind == "var_swaption":
        if strike is None:
            raise ValueError("swaption requires a strike on the integrated state")
        params = FellerParams(chi, kappa, epsilon)
        slice_ = aug_feller_cf(params, None, t, 0.0, y0, tbar)
        mean_x = slice_.mean_x
        # E (x - K)_+ = (E(x - K) + E|x - K|) / 2 with
        # E|u| = (2/pi) int_0^inf (1 - Re e^{-ikK} cf(k)) / k^2 dk,
        # the analytic eps -> 0 limit of the double-pole representation.
        quad = quad or QuadratureSpec(node_count=8193, abs_tol=1e-8)
        L = quad.truncation_halfwidth or 2000.0 / max(T, 1e-2)
        k = np.linspace(1e-9, L, quad.node_count)
        vals = (1.0 - (np.exp(-1j * k * strike) * slice_.cf(k)).real) / k ** 2
        # tail beyond L: the cf has decayed, so the integrand is 1/k^2 -> add 1/L
        abs_moment = (2.0 / math.pi) * (np.trapezoid(vals, k) + 1.0 / L)
        intrinsic = mean_x - strike
        value = math.exp(-r * T) * 0.5 * (phi * intrinsic + abs_moment)
        return PriceQuote(float(value))
    raise ValueError(f"unknown swap kind {kind!r}")


# ---------------------------------------------------------------------------
# bonds and bond options


def _vasicek_C(params: VasicekParams, T: float) -> float:
    k, eps = params.kappa, params.epsilon
    Bk = B_kappa(k, T)
    return ((params.theta - eps ** 2 / (2.0 * k ** 2)) * (Bk - T)
            - eps ** 2 * Bk ** 2 / (4.0 * k))


def bond_price(model, y: float, t: float, tbar: float) -> PriceQuote:
    """Zero-coupon bond price under mean-reverting short-rate dynamics.

    The Gaussian (Vasicek) case is evaluated through both the affine ansatz
    and the integrated-rate Gaussian expectation and the two are asserted to
    agree; the square-root (CIR) case evaluates the augmented characteristic
    function at the discounting argument.
    """
    T = tbar - t
    if isinstance(model, VasicekParams):
        ansatz = math.exp(_vasicek_C(model, T) - B_kappa(model.kappa, T) * y)
        law = augmented_ou_tpdf(OUParams(model.chi, model.kappa, model.epsilon),
                                t, 0.0, y, tbar)
        expectation = math.exp(-law.mean[0] + 0.5 * law.cov[0, 0])
        if abs(ansatz - expectation) > 1e-11 * ansatz:
            raise AssertionError(
                f"affine ansatz {ansatz!r} and Gaussian expectation {expectation!r} disagree")
        return PriceQuote(ansatz, stderr_or_quaderr=abs(ansatz - expectation))
    if isinstance(model, CIRParams):
        if y < 0.0:
            raise ValueError("square-root short rate requires y >= 0")
        params = FellerParams(model.chi, model.kappa, model.epsilon)
        slice_ = aug_feller_cf(params, None, t, 0.0, y, tbar)
        value = complex(slice_.cf(1j))
        return PriceQuote(float(value.real), stderr_or_quaderr=abs(value.imag))
    raise TypeError("model must be VasicekParams or CIRParams")


def bond_option_price(model: VasicekParams, y: float, t: float, tbar: float,
                      tbreve: float, K: float, phi: int = 1) -> PriceQuote:
    """European option maturing at tbar on a zero-coupon bond maturing at tbreve.

    Lognormal-bond formula with volatility sqrt(h2(t, tbar)) * B_kappa(tbreve - tbar),
    combining the rate variance at option expiry with the bond's remaining duration.
    """
    if not t < tbar < tbreve:
        raise ValueError("require t < option expiry < bond maturity")
    z_far = bond_price(model, y, t, tbreve).value
    z_near = bond_price(model, y, t, tbar).value
    h2 = model.epsilon ** 2 * B_kappa(2.0 * model.kappa, tbar - t)
    sigma_p = math.sqrt(h2) * B_kappa(model.kappa, tbreve - tbar)
    if sigma_p == 0.0:
        intrinsic = max(phi * (z_far - K * z_near), 0.0)
        return PriceQuote(intrinsic)
    d_plus = math.log(z_far / (z_near * K)) / sigma_p + 0.5 * sigma_p
    d_minus = d_plus - sigma_p
    value = phi * (z_far * normal_cdf(phi * d_plus)
                   - z_near * K * normal_cdf(phi * d_minus))
    return PriceQuote(float(value))


def stochastic_rate_european(spec: VanillaSpec, S: float, sigma: float, rho: float,
                             rate: VasicekParams, y: float, t: float = 0.0) -> PriceQuote:
    """European FX-style option with a mean-reverting domestic rate.

    Working in forward-bond units reduces the problem to a deterministic
    total variance int (eps^2 B^2 + 2 rho eps sigma B + sigma^2) ds.
    """
    T = spec.maturity - t
    k, eps = rate.kappa, rate.epsilon
    int_B2 = (T - 2.0 * B_kappa(k, T) + B_kappa(2.0 * k, T)) / k ** 2
    int_B = (T - B_kappa(k, T)) / k
    total_var = eps ** 2 * int_B2 + 2.0 * rho * eps * sigma * int_B + sigma ** 2 * T
    Z = bond_price(rate, y, t, spec.maturity).value
    K = spec.strike
    sd = math.sqrt(total_var)
    d_plus = math.log(S / (K * Z)) / sd + 0.5 * sd
    d_minus = d_plus - sd
    phi = spec.phi
    call = S * normal_cdf(d_plus) - K * Z * normal_cdf(d_minus)
    return _assemble_vanilla(spec, call, S, K * Z)


# ---------------------------------------------------------------------------
# implied volatility and power contracts


def implied_vol(price: float, spec: VanillaSpec, S: float, r: float,
                t: float = 0.0) -> float:
    """Invert the lognormal formula; safeguarded Newton with bisection fallback."""
    T = spec.maturity - t
    K, phi = spec.strike, spec.phi
    df = math.exp(-r * T)
    intrinsic = max(phi * (S - df * K), 0.0)
    upper = S if phi == 1 else df * K
    if not intrinsic < price < upper:
        raise ValueError("price outside the arbitrage band")
    lo, hi = 1e-8, 10.0
    sigma = 0.2

    def f(sig):
        return black_scholes_price(spec, S, sig, r, t).value - price

    f_lo, f_hi = f(lo), f(hi)
    for _ in range(100):
        val = f(sigma)
        if abs(val) < 1e-10 * S:
            return sigma
        srt = sigma * math.sqrt(T)
        d_plus = math.log(S / (df * K)) / srt + 0.5 * srt
        vega = S * normal_pdf(d_plus) * math.sqrt(T)
        if val > 0:
            hi = sigma
        else:
            lo = sigma
        step = val / vega if vega > 1e-14 else math.nan
        candidate = sigma - step
        sigma = candidate if lo < candidate < hi else 0.5 * (lo + hi)
    return sigma


def power_contract_price(model: HestonParams, nu: float, S: float, t: float,
                         tbar: float) -> float:
    """Price of the payoff S^nu under square-root stochastic variance, r = 0.

    A single real exponential mode: V = exp(alpha + beta v) S^nu with both
    exponents real for 0 <= nu <= 1.
    """
    if not 0.0 <= nu <= 1.0:
        raise ValueError("power exponent must lie in [0, 1]")
    if nu in (0.0, 1.0):
        return 1.0 if nu == 0.0 else S
    T = tbar - t
    eps = model.epsilon
    mu = -(model.kappa - nu * model.rho * eps) / 2.0
    zeta = math.sqrt(mu ** 2 - eps ** 2 * nu * (nu - 1.0) / 4.0)
    denom = zeta * math.cosh(zeta * T) - mu * math.sinh(zeta * T)
    alpha = -(2.0 * model.chi / eps ** 2) * (mu * T + math.log(denom / zeta))
    beta = nu * (nu - 1.0) * math.sinh(zeta * T) / (2.0 * denom)
    return math.exp(alpha + beta * model.v0) * S ** nu
