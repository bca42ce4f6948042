"""Special functions and Fourier-inversion quadrature shared by all density and pricing modules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, interpolate, special

__all__ = [
    "QuadratureSpec",
    "ComplexLogTracker",
    "QuadratureError",
    "InversionResult",
    "normal_cdf",
    "normal_pdf",
    "bessel_i",
    "exp_integral_e1",
    "find_truncation",
    "invert_fourier_1d",
    "invert_fourier_2d",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class QuadratureError(RuntimeError):
    """Raised when a Fourier inversion cannot meet its tolerance or hits bad data."""


def normal_cdf(x):
    """Cumulative standard normal, saturating cleanly at 0/1 for extreme arguments."""
    return special.ndtr(x)


def normal_pdf(x):
    return _INV_SQRT_2PI * np.exp(-0.5 * np.asarray(x) ** 2)


def bessel_i(order: float, z, scaled: bool = False):
    """Modified Bessel function I_order(z).

    With ``scaled=True`` returns exp(-Re z) * I_order(z), which is the form needed
    whenever I appears multiplied by a decaying exponential of comparable size.
    Supports complex ``z`` (needed for wave-number-dependent arguments).
    """
    if np.any(np.real(order) < -1.0):
        raise ValueError("order must satisfy order > -1")
    fn = special.ive if scaled else special.iv
    return fn(order, z)


def exp_integral_e1(eta):
    """Exponential integral E1(eta) = int_eta^inf exp(-u)/u du, eta > 0."""
    eta = np.asarray(eta, dtype=float)
    if np.any(eta <= 0.0):
        raise ValueError("exp_integral_e1 requires eta > 0")
    return special.exp1(eta)


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization policy for one-dimensional Fourier inversion.

    ``truncation_halfwidth`` of ``None`` requests automatic truncation: L is
    doubled from 16 until |cf(+-L)| < abs_tol/10.
    """

    truncation_halfwidth: float | None = None
    node_count: int = 2048
    abs_tol: float = 1e-9
    scheme: str = "trapezoid"

    def __post_init__(self):
        if self.truncation_halfwidth is not None and self.truncation_halfwidth <= 0:
            raise ValueError("truncation_halfwidth must be positive")
        if self.node_count < 16:
            raise ValueError("node_count must be >= 16")
        if self.abs_tol <= 0:
            raise ValueError("abs_tol must be positive")
        if self.scheme not in ("trapezoid", "adaptive", "fft_grid"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass
class ComplexLogTracker:
    """Branch-continuous complex logarithm along a sequentially evaluated grid.

    Successive arguments are assumed to move by less than pi; the accumulated
    winding number keeps log continuous where the principal branch would jump.
    Single-use: one tracker per grid sweep.
    """

    previous_argument: float | None = None
    accumulated_branch: int = 0

    def log(self, w: complex) -> complex:
        arg = math.atan2(w.imag, w.real)
        if self.previous_argument is not None:
            step = arg - self.previous_argument
            if step > math.pi:
                self.accumulated_branch -= 1
            elif step < -math.pi:
                self.accumulated_branch += 1
        self.previous_argument = arg
        return math.log(abs(w)) + 1j * (arg + 2.0 * math.pi * self.accumulated_branch)

    def log_array(self, values: np.ndarray) -> np.ndarray:
        """Branch-continuous log of a 1-D array, unwrapping the phase along it."""
        values = np.asarray(values, dtype=complex)
        phase = np.unwrap(np.angle(values))
        if self.previous_argument is not None:
            shift = phase[0] - (self.previous_argument + 2.0 * math.pi * self.accumulated_branch)
            phase -= 2.0 * math.pi * round(shift / (2.0 * math.pi))
        self.previous_argument = math.atan2(values[-1].imag, values[-1].real)
        self.accumulated_branch = round((phase[-1] - self.previous_argument) / (2.0 * math.pi))
        return np.log(np.abs(values)) + 1j * phase


@dataclass
class InversionResult:
    values: np.ndarray
    error_estimate: float
    warnings: list = field(default_factory=list)


def _evaluate_cf(cf: Callable, grid: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(cf(grid), dtype=complex)
        if out.shape != grid.shape:
            raise TypeError
        return out
    except (TypeError, ValueError):
        return np.array([complex(cf(float(k))) for k in grid])


def find_truncation(cf: Callable, abs_tol: float, start: float = 16.0,
                    max_halfwidth: float = 1e7) -> float:
    """Double L from ``start`` until |cf(+-L)| < abs_tol/10.

    All in-scope characteristic functions decay (Gaussian, rational or
    Bessel-type tails), so the doubling search terminates quickly.
    """
    level = abs_tol / 10.0
    L = start
    while L <= max_halfwidth:
        if max(abs(complex(cf(L))), abs(complex(cf(-L)))) < level:
            return L
        L *= 2.0
    raise QuadratureError(
        f"characteristic function does not decay below {level:g} for |k| <= {max_halfwidth:g}")


def _trapezoid_inversion(cf, points, L, n):
    grid = np.linspace(-L, L, n)
    vals = _evaluate_cf(cf, grid)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        k_bad = grid[bad][0]
        raise QuadratureError(f"characteristic function is not finite at k={k_bad:g}")
    weights = np.full(n, grid[1] - grid[0])
    weights[0] *= 0.5
    weights[-1] *= 0.5
    phases = np.exp(1j * np.outer(points, grid))
    out = phases @ (weights * vals) / (2.0 * math.pi)
    return out, vals


def invert_fourier_1d(cf: Callable, evaluation_points: Sequence[float],
                      spec: QuadratureSpec | None = None) -> InversionResult:
    """Inverse Fourier transform (1/2pi) int_{-L}^{L} cf(k) exp(ikx) dk per point.

    Returns real values; a residual imaginary part above tolerance is reported
    as a warning (the caller's cf should be Hermitian for real targets).
    """
    spec = spec or QuadratureSpec()
    points = np.atleast_1d(np.asarray(evaluation_points, dtype=float))
    L = spec.truncation_halfwidth or find_truncation(cf, spec.abs_tol)
    warnings: list[str] = []

    if spec.scheme == "adaptive":
        values = np.empty(len(points))
        err = 0.0
        for i, x in enumerate(points):
            re, re_err = integrate.quad(lambda k: (cf(k) * np.exp(1j * k * x)).real,
                                        -L, L, limit=400, epsabs=spec.abs_tol / 10)
            values[i] = re / (2.0 * math.pi)
            err = max(err, re_err / (2.0 * math.pi))
        if err > spec.abs_tol:
            warnings.append(f"adaptive quadrature error estimate {err:.2e} exceeds abs_tol")
        return InversionResult(values, err, warnings)

    if spec.scheme == "fft_grid":
        return _fft_grid_inversion(cf, points, L, spec, warnings)

    n = spec.node_count if spec.node_count % 2 == 1 else spec.node_count + 1
    out, vals = _trapezoid_inversion(cf, points, L, n)
    coarse = out  # refined below; difference against half-resolution grid
    half, _ = _trapezoid_inversion(cf, points, L, n // 2 + 1)
    err = float(np.max(np.abs(coarse - half)))
    tail = (abs(vals[0]) + abs(vals[-1])) * L / (2.0 * math.pi)
    err = max(err, tail * 1e-2)
    imag_mag = float(np.max(np.abs(out.imag)))
    if imag_mag > 10 * spec.abs_tol:
        warnings.append(f"imaginary residual {imag_mag:.2e}; cf not Hermitian?")
    if err > spec.abs_tol:
        warnings.append(f"trapezoid error estimate {err:.2e} exceeds abs_tol")
    return InversionResult(out.real, err, warnings)


def _fft_grid_inversion(cf, points, L, spec, warnings):
    n = 1 << max(6, int(math.ceil(math.log2(spec.node_count))))
    dk = 2.0 * L / n
    grid = -L + dk * np.arange(n)
    vals = _evaluate_cf(cf, grid)
    if np.any(~np.isfinite(vals)):
        k_bad = grid[~np.isfinite(vals)][0]
        raise QuadratureError(f"characteristic function is not finite at k={k_bad:g}")
    # x-grid reciprocal to the k-grid: x_m = 2 pi m / (n dk), m = -n/2..n/2-1.
    # With k_j = -L + j dk the phase splits as e^{ik_j x_m} = (-1)^m e^{2 pi i j m / n}.
    dx = 2.0 * math.pi / (n * dk)
    m = np.arange(-n // 2, n // 2)
    xs = m * dx
    spectrum = np.fft.fftshift(np.fft.ifft(vals) * n)  # sum_j vals_j e^{2 pi i j m / n}
    dense = (dk / (2.0 * math.pi)) * np.where(m % 2 == 0, 1.0, -1.0) * spectrum
    x_max = abs(points).max() if len(points) else 0.0
    if x_max > xs[-1]:
        warnings.append("requested points outside FFT grid; increase node_count")
    spline = interpolate.CubicSpline(xs, dense.real)
    values = spline(points)
    half_spec = replace(spec, node_count=max(64, n // 2), scheme="trapezoid",
                        truncation_halfwidth=L)
    check = invert_fourier_1d(cf, points, half_spec)
    err = float(np.max(np.abs(values - check.values)))
    if err > spec.abs_tol:
        warnings.append(f"fft_grid error estimate {err:.2e} exceeds abs_tol")
    return InversionResult(values, err, warnings)


def invert_fourier_2d(cf2: Callable, points: Sequence[tuple[float, float]],
                      spec: QuadratureSpec | None = None,
                      halfwidths: tuple[float, float] | None = None) -> np.ndarray:
    """Inverse Fourier transform (1/2pi)^2 iint cf(k, l) exp(i(kx + ly)) dk dl.

    ``cf2`` must accept meshgrid arrays (k, l). Used for two-dimensional
    characteristic functions of degenerate processes.
    """
    spec = spec or QuadratureSpec(node_count=256)
    if halfwidths is None:
        Lk = spec.truncation_halfwidth or find_truncation(lambda k: cf2(k, 0.0), spec.abs_tol)
        Ll = spec.truncation_halfwidth or find_truncation(lambda l: cf2(0.0, l), spec.abs_tol)
    else:
        Lk, Ll = halfwidths
    n = spec.node_count if spec.node_count % 2 == 1 else spec.node_count + 1
    k = np.linspace(-Lk, Lk, n)
    l = np.linspace(-Ll, Ll, n)
    kk, ll = np.meshgrid(k, l, indexing="ij")
    vals = np.asarray(cf2(kk, ll), dtype=complex)
    if np.any(~np.isfinite(vals)):
        raise QuadratureError("characteristic function not finite inside the 2-D range")
    wk = np.full(n, k[1] - k[0]); wk[0] *= 0.5; wk[-1] *= 0.5
    wl = np.full(n, l[1] - l[0]); wl[0] *= 0.5; wl[-1] *= 0.5
    out = np.empty(len(points))
    weighted = vals * wk[:, None] * wl[None, :]
    for i, (x, y) in enumerate(points):
        phase = np.exp(1j * (k[:, None] * x + l[None, :] * y))
        out[i] = (weighted * phase).sum().real / (4.0 * math.pi ** 2)
    return out
