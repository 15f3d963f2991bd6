"""Block multipliers on the l1-degree blocks ``|k|_1 = nu``.

Every operator here scales each coefficient with ``|k|_1 = nu`` by a scalar
``mu_nu``.  The Taylor-Abel-Poisson mean uses

    lambda_{nu,r}(rho) = sum_{j<r} C(nu, j) (1-rho)^j rho^(nu-j)   (nu >= r)

and ``lambda = 1`` for ``nu < r``.  Convention: ``0**0 = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import SampleField, SpectralFunction

_TINY = 1e-280


@dataclass(frozen=True, eq=False)
class BlockMultiplier:
    """Sequence ``mu_0, ..., mu_numax`` acting block-uniformly."""

    values: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values))
        if v.ndim != 1:
            raise ValueError("multiplier values must be one-dimensional")
        v = v.astype(np.complex128 if np.iscomplexobj(v) else np.float64, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def nu_max(self) -> int:
        return len(self.values) - 1

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values) or bool(np.all(self.values.imag == 0))

    def __mul__(self, other: "BlockMultiplier") -> "BlockMultiplier":
        n = min(len(self.values), len(other.values))
        return BlockMultiplier(self.values[:n] * other.values[:n], f"({self.label})*({other.label})")

    def __call__(self, f: SpectralFunction) -> SpectralFunction:
        return apply_block_multiplier(f, self)


@dataclass(frozen=True)
class TapParameters:
    rho: float
    r: int

    def __post_init__(self):
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if int(self.r) != self.r or self.r < 1:
            raise ValueError(f"r must be a positive integer, got {self.r}")


def falling_factorial(nu: np.ndarray, n: int) -> np.ndarray:
    """``nu!/(nu-n)!`` for ``nu >= n`` and 0 otherwise, by product recurrence."""
    nu = np.asarray(nu, dtype=np.float64)
    out = np.ones_like(nu)
    for i in range(n):
        out = out * np.maximum(nu - i, 0.0)
    return out


def lambda_sequence(nu_max: int, r: int, rho: float) -> np.ndarray:
    """``lambda_{nu,r}(rho)`` for ``nu = 0..nu_max`` (vectorized over nu)."""
    if r < 1:
        raise ValueError(f"r must be a positive integer, got {r}")
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    nu = np.arange(nu_max + 1, dtype=np.float64)
    out = np.ones(nu_max + 1)
    hi = nu >= r
    if not hi.any():
        return out
    if rho == 0.0:
        out[hi] = 0.0
        return out
    if rho == 1.0:
        return out
    v = nu[hi]
    seed = rho ** v
    ratio = (1.0 - rho) / rho
    total = np.zeros_like(v)
    lin = seed > _TINY
    # all terms are positive: plain recurrence, no cancellation
    if lin.any():
        term = seed[lin].copy()
        acc = term.copy()
        vl = v[lin]
        for j in range(r - 1):
            term = term * ((vl - j) / (j + 1.0)) * ratio
            acc += term
        total[lin] = acc
    if (~lin).any():
        vu = v[~lin]
        logterm = vu * math.log(rho)
        acc = np.exp(logterm)
        logratio = math.log1p(-rho) - math.log(rho)
        for j in range(r - 1):
            logterm = logterm + np.log((vu - j) / (j + 1.0)) + logratio
            acc += np.exp(logterm)
        total[~lin] = acc
    out[hi] = np.clip(total, 0.0, 1.0)
    return out


def lambda_coeff(nu: int, r: int, rho: float) -> float:
    """Scalar ``lambda_{nu,r}(rho)``."""
    if nu < 0:
        raise ValueError(f"nu must be nonnegative, got {nu}")
    return float(lambda_sequence(int(nu), int(r), rho)[int(nu)])


def apply_block_multiplier(f: SpectralFunction, mult: BlockMultiplier) -> SpectralFunction:
    """Scale every coefficient with ``|k|_1 = nu`` by ``mu_nu``."""
    top = f.max_degree()
    if mult.nu_max < top:
        raise ValueError(
            f"multiplier '{mult.label}' is defined up to nu={mult.nu_max} "
            f"but the function has degree {top}")
    vals = mult.values
    if len(vals) < f.nu_max + 1:
        # blocks beyond the multiplier's range carry only zero coefficients
        vals = np.concatenate([vals, np.zeros(f.nu_max + 1 - len(vals), dtype=vals.dtype)])
    scaled = f.coeffs * vals[f.degrees]
    return f.with_coeffs(scaled, f.real and mult.is_real)


# multiplier sequences -------------------------------------------------------

def poisson_multiplier(nu_max: int, rho: float) -> BlockMultiplier:
    nu = np.arange(nu_max + 1, dtype=np.float64)
    return BlockMultiplier(float(rho) ** nu, f"poisson(rho={rho})")


def tap_multiplier(nu_max: int, rho: float, r: int) -> BlockMultiplier:
    return BlockMultiplier(lambda_sequence(nu_max, r, rho), f"tap(rho={rho}, r={r})")


def radial_multiplier(nu_max: int, n: int) -> BlockMultiplier:
    return BlockMultiplier(falling_factorial(np.arange(nu_max + 1), n), f"radial(n={n})")


def rho_derivative_multiplier(nu_max: int, rho: float, j: int) -> BlockMultiplier:
    nu = np.arange(nu_max + 1, dtype=np.float64)
    powers = float(rho) ** np.maximum(nu - j, 0.0)
    vals = np.where(nu >= j, falling_factorial(nu, j) * powers, 0.0)
    return BlockMultiplier(vals, f"d^{j}/drho^{j} poisson(rho={rho})")


def leis_multiplier(nu_max: int, rho: float, r: int) -> BlockMultiplier:
    """Truncated exponential ``sum_{k<r} (nu*(rho-1))^k / k!``."""
    x = np.arange(nu_max + 1, dtype=np.float64) * (float(rho) - 1.0)
    term = np.ones_like(x)
    acc = np.ones_like(x)
    for k in range(1, r):
        term = term * x / k
        acc = acc + term
    return BlockMultiplier(acc, f"leis(rho={rho}, r={r})")


# operators -------------------------------------------------------------------

def poisson_mean(f: SpectralFunction, rho: float) -> SpectralFunction:
    """Poisson integral ``f(rho, .)``: block multiplier ``rho^nu``."""
    return apply_block_multiplier(f, poisson_multiplier(f.nu_max, rho))


def tap_mean(f: SpectralFunction, params: TapParameters | float, r: int | None = None) -> SpectralFunction:
    """Taylor-Abel-Poisson mean ``A_{rho,r}(f)``.

    Accepts either ``tap_mean(f, TapParameters(rho, r))`` or ``tap_mean(f, rho, r)``.
    """
    if not isinstance(params, TapParameters):
        params = TapParameters(float(params), int(r))
    return apply_block_multiplier(f, tap_multiplier(f.nu_max, params.rho, params.r))


def radial_derivative(f: SpectralFunction, n: int) -> SpectralFunction:
    """Radial derivative ``f^[n]``: multiplier ``nu!/(nu-n)!``, zero below ``n``."""
    if n < 0:
        raise ValueError(f"derivative order must be nonnegative, got {n}")
    return apply_block_multiplier(f, radial_multiplier(f.nu_max, n))


def poisson_rho_derivative(f: SpectralFunction, rho: float, j: int) -> SpectralFunction:
    """``d^j f(rho, .)/d rho^j`` of the Poisson integral."""
    if j < 0:
        raise ValueError(f"derivative order must be nonnegative, got {j}")
    return apply_block_multiplier(f, rho_derivative_multiplier(f.nu_max, rho, j))


def taylor_form(f: SpectralFunction, params: TapParameters | float, r: int | None = None) -> SpectralFunction:
    """Degree ``r-1`` Taylor polynomial in rho of the Poisson integral, at ``1 - rho``.

    Sums ``d^j f(rho,.)/d rho^j * (1-rho)^j / j!`` over ``j < r``; this never
    touches :func:`lambda_sequence`.
    """
    if not isinstance(params, TapParameters):
        params = TapParameters(float(params), int(r))
    rho, r = params.rho, params.r
    acc = np.zeros_like(f.coeffs)
    for j in range(r):
        term = poisson_rho_derivative(f, rho, j)
        acc = acc + term.coeffs * ((1.0 - rho) ** j / math.factorial(j))
    return f.with_coeffs(acc)


def leis_mean(f: SpectralFunction, rho: float, r: int) -> SpectralFunction:
    """Leis-type Taylor sum in the normal derivative (extended to every d)."""
    return apply_block_multiplier(f, leis_multiplier(f.nu_max, rho, r))


def y_poisson_kernel(rho: float, d: int, m: int) -> SampleField:
    """Samples of ``prod_j 1/(1 - rho e^{i x_j}) + prod_j 1/(1 - rho e^{-i x_j}) - 1``.

    Its Fourier support is ``Z^d_+ union (-Z^d_+)``, which contains Y.
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    if d < 1:
        raise ValueError(f"dimension must be a positive integer, got d={d}")
    z = np.exp(2j * np.pi * np.arange(m) / m)
    plus = 1.0 / (1.0 - rho * z)
    minus = 1.0 / (1.0 - rho * np.conj(z))
    prod_p = np.ones((1,) * d, dtype=np.complex128)
    prod_m = np.ones((1,) * d, dtype=np.complex128)
    for j in range(d):
        shape = [1] * d
        shape[j] = m
        prod_p = prod_p * plus.reshape(shape)
        prod_m = prod_m * minus.reshape(shape)
    return SampleField(d, m, prod_p + prod_m - 1.0)


def kernel_convolution(f: SpectralFunction, kernel: SampleField) -> SampleField:
    """Grid version of ``x -> int f(x + s) P(s) dsigma(s)``."""
    from .spectral import synthesize

    fs = synthesize(f, kernel.m)
    fv = np.asarray(fs.values, dtype=np.complex128)
    kv = np.asarray(kernel.values, dtype=np.complex128)
    # sum_s f(x+s) P(s) = ifft(fft(f) * conj(fft(conj(P)))) up to the m^d weight
    out = np.fft.ifftn(np.fft.fftn(fv) * np.conj(np.fft.fftn(np.conj(kv)))) / float(kernel.m) ** f.d
    return SampleField(f.d, kernel.m, out)
