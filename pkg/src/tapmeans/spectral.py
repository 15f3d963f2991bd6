"""Truncated Fourier representation of periodic functions on the torus T^d.

A :class:`SpectralFunction` stores the coefficients of a trigonometric
polynomial densely over the box ``|k_j| <= K``.  Index ``k`` lives at array
position ``k + K`` along every axis.  Grid samples live in a
:class:`SampleField` over ``x_j = 2*pi*t_j/m``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

Exponent = Union[float, int, str]


def as_exponent(p: Exponent) -> float:
    """Normalize an L_p exponent; accepts numbers, ``"inf"`` and ``math.inf``."""
    if isinstance(p, str):
        p = math.inf if p.strip().lower() in ("inf", "infinity", "oo") else float(p)
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"L_p exponent must satisfy p >= 1, got {p}")
    return p


def l1_degree(k: Sequence[int]) -> int:
    return int(sum(abs(int(kj)) for kj in k))


def in_Y(k: Sequence[int]) -> bool:
    """True when ``k`` is all-nonnegative or all-negative."""
    k = [int(kj) for kj in k]
    return all(kj >= 0 for kj in k) or all(kj < 0 for kj in k)


@lru_cache(maxsize=32)
def degree_tensor(d: int, K: int) -> np.ndarray:
    """``|k|_1`` over the box ``[-K, K]^d`` (read-only, cached per (d, K))."""
    axis = np.abs(np.arange(-K, K + 1))
    dtype = np.min_scalar_type(d * K)
    deg = np.zeros((2 * K + 1,) * d, dtype=dtype)
    for j in range(d):
        shape = [1] * d
        shape[j] = 2 * K + 1
        deg = deg + axis.reshape(shape).astype(dtype)
    deg = np.ascontiguousarray(deg.astype(dtype))
    deg.setflags(write=False)
    return deg


@lru_cache(maxsize=32)
def y_mask(d: int, K: int) -> np.ndarray:
    """Boolean mask of Y = Z^d_+ union Z^d_- over the box."""
    axis = np.arange(-K, K + 1)
    nonneg = np.ones((2 * K + 1,) * d, dtype=bool)
    neg = np.ones((2 * K + 1,) * d, dtype=bool)
    for j in range(d):
        shape = [1] * d
        shape[j] = 2 * K + 1
        nonneg = nonneg & (axis >= 0).reshape(shape)
        neg = neg & (axis < 0).reshape(shape)
    mask = nonneg | neg
    mask.setflags(write=False)
    return mask


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    """Trigonometric polynomial with coefficients on the box ``|k_j| <= K``.

    Parameters
    ----------
    d : int
        Dimension of the torus, ``d >= 1``.
    K : int
        Per-axis degree bound.
    coeffs : ndarray
        Complex array of shape ``(2K+1,)*d``; entry ``k + K`` holds the
        coefficient of ``exp(i<k, x>)``.
    real : bool
        Declares Hermitian symmetry ``c(-k) = conj(c(k))``.
    """

    d: int
    K: int
    coeffs: np.ndarray = field(repr=False)
    real: bool = False

    def __post_init__(self):
        if int(self.d) < 1:
            raise ValueError(f"dimension must be a positive integer, got d={self.d}")
        if int(self.K) < 0:
            raise ValueError(f"degree bound must be nonnegative, got K={self.K}")
        c = np.array(self.coeffs, dtype=np.complex128, copy=True)
        expected = (2 * self.K + 1,) * self.d
        if c.shape != expected:
            raise ValueError(f"coefficient tensor has shape {c.shape}, expected {expected}")
        c.setflags(write=False)
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "real", bool(self.real))

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, d: int, K: int, real: bool = True) -> "SpectralFunction":
        if int(d) < 1:
            raise ValueError(f"dimension must be a positive integer, got d={d}")
        return cls(d, K, np.zeros((2 * K + 1,) * d, dtype=np.complex128), real)

    @classmethod
    def from_modes(cls, d: int, K: int, modes: dict, real: bool = False) -> "SpectralFunction":
        """Build from a mapping ``{k-tuple: coefficient}``."""
        if int(d) < 1:
            raise ValueError(f"dimension must be a positive integer, got d={d}")
        c = np.zeros((2 * K + 1,) * d, dtype=np.complex128)
        for k, val in modes.items():
            k = tuple(int(kj) for kj in np.atleast_1d(k))
            if len(k) != d or any(abs(kj) > K for kj in k):
                raise ValueError(f"index {k} outside the box |k_j| <= {K} in dimension {d}")
            c[tuple(kj + K for kj in k)] += val
        return cls(d, K, c, real)

    @classmethod
    def mode(cls, k: Sequence[int], K: int | None = None, amplitude: complex = 1.0) -> "SpectralFunction":
        """The single exponential ``amplitude * e_k``."""
        k = tuple(int(kj) for kj in np.atleast_1d(k))
        if K is None:
            K = max(1, max(abs(kj) for kj in k))
        return cls.from_modes(len(k), K, {k: amplitude}, real=False)

    def with_coeffs(self, coeffs: np.ndarray, real: bool | None = None) -> "SpectralFunction":
        return SpectralFunction(self.d, self.K, coeffs, self.real if real is None else real)

    # queries --------------------------------------------------------------
    @property
    def degrees(self) -> np.ndarray:
        return degree_tensor(self.d, self.K)

    @property
    def nu_max(self) -> int:
        """Largest block index representable in the box, ``d*K``."""
        return self.d * self.K

    def coeff(self, k: Sequence[int]) -> complex:
        k = tuple(int(kj) for kj in np.atleast_1d(k))
        if any(abs(kj) > self.K for kj in k):
            return 0j
        return complex(self.coeffs[tuple(kj + self.K for kj in k)])

    def max_degree(self) -> int:
        """Largest ``|k|_1`` carrying a nonzero coefficient (-1 for f = 0)."""
        nz = self.coeffs != 0
        if not nz.any():
            return -1
        return int(self.degrees[nz].max())

    def block_energies(self) -> np.ndarray:
        """``a_nu = sum_{|k|_1 = nu} |c_k|^2`` for ``nu = 0..d*K``."""
        w = np.abs(self.coeffs) ** 2
        return np.bincount(self.degrees.ravel(), weights=w.ravel(), minlength=self.nu_max + 1)

    def l2_norm(self) -> float:
        """L_2(T^d) norm via Parseval."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def is_hermitian(self, atol: float = 0.0) -> bool:
        flipped = np.conj(self.coeffs[(slice(None, None, -1),) * self.d])
        return bool(np.all(np.abs(self.coeffs - flipped) <= atol))

    # linear structure -----------------------------------------------------
    def _check_compatible(self, other: "SpectralFunction"):
        if (self.d, self.K) != (other.d, other.K):
            raise ValueError(f"incompatible shapes (d={self.d}, K={self.K}) vs (d={other.d}, K={other.K})")

    def __add__(self, other: "SpectralFunction") -> "SpectralFunction":
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs + other.coeffs, self.real and other.real)

    def __sub__(self, other: "SpectralFunction") -> "SpectralFunction":
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs - other.coeffs, self.real and other.real)

    def __mul__(self, scalar: complex) -> "SpectralFunction":
        scalar = complex(scalar)
        return self.with_coeffs(self.coeffs * scalar, self.real and scalar.imag == 0)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralFunction":
        return self * -1.0

    def max_abs_diff(self, other: "SpectralFunction") -> float:
        self._check_compatible(other)
        return float(np.max(np.abs(self.coeffs - other.coeffs)))

    def __repr__(self):
        return f"SpectralFunction(d={self.d}, K={self.K}, real={self.real}, max_degree={self.max_degree()})"

    # serialization --------------------------------------------------------
    def to_json(self) -> str:
        nz = np.argwhere(self.coeffs != 0)
        entries = []
        for idx in nz:
            val = self.coeffs[tuple(idx)]
            entries.append([[int(i) - self.K for i in idx], float(val.real), float(val.imag)])
        return json.dumps({"d": self.d, "K": self.K, "real": self.real, "coeffs": entries})

    @classmethod
    def from_json(cls, text: str) -> "SpectralFunction":
        data = json.loads(text)
        d, K = int(data["d"]), int(data["K"])
        modes = {tuple(k): complex(re, im) for k, re, im in data["coeffs"]}
        return cls.from_modes(d, K, modes, real=bool(data.get("real", False)))


@dataclass(frozen=True, eq=False)
class SampleField:
    """Values of a function on the uniform grid ``x_j = 2*pi*t_j/m``."""

    d: int
    m: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.m,) * self.d:
            raise ValueError(f"sample tensor has shape {v.shape}, expected {(self.m,) * self.d}")

    def grid(self) -> list[np.ndarray]:
        """Sparse broadcastable grid coordinates, one array per axis."""
        x = 2 * np.pi * np.arange(self.m) / self.m
        out = []
        for j in range(self.d):
            shape = [1] * self.d
            shape[j] = self.m
            out.append(x.reshape(shape))
        return out

    def max_abs_diff(self, other: "SampleField") -> float:
        return float(np.max(np.abs(np.asarray(self.values) - np.asarray(other.values))))


def _check_grid(m: int, K: int):
    if m < 2 * K + 1:
        raise ValueError(f"grid size m={m} < 2K+1={2 * K + 1} would alias degree-{K} modes")


def _box_to_grid_index(K: int, m: int) -> np.ndarray:
    return np.arange(-K, K + 1) % m


def synthesize(f: SpectralFunction, m: int) -> SampleField:
    """Evaluate ``f`` on the ``m^d`` grid (exact for ``m >= 2K+1``)."""
    _check_grid(m, f.K)
    full = np.zeros((m,) * f.d, dtype=np.complex128)
    idx = np.ix_(*[_box_to_grid_index(f.K, m)] * f.d)
    full[idx] = f.coeffs
    vals = np.fft.ifftn(full) * float(m) ** f.d
    if f.real:
        vals = vals.real
    return SampleField(f.d, m, vals)


def analyze(s: SampleField, K: int, real: bool | None = None) -> SpectralFunction:
    """Discrete Fourier coefficients ``m^-d sum_t v(t) exp(-i<k, x_t>)`` for ``|k_j| <= K``."""
    _check_grid(s.m, K)
    spec = np.fft.fftn(np.asarray(s.values, dtype=np.complex128)) / float(s.m) ** s.d
    idx = np.ix_(*[_box_to_grid_index(K, s.m)] * s.d)
    if real is None:
        real = not np.iscomplexobj(s.values)
    return SpectralFunction(s.d, K, spec[idx], real)


def lp_norm(s: SampleField, p: Exponent) -> float:
    """Grid L_p norm with respect to the normalized measure (weights ``m^-d``)."""
    p = as_exponent(p)
    a = np.abs(np.asarray(s.values))
    if math.isinf(p):
        return float(a.max())
    if p == 1.0:
        return float(a.mean())
    if p == 2.0:
        return float(np.sqrt(np.mean(a * a)))
    scale = a.max()
    if scale == 0:
        return 0.0
    return float(scale * np.mean((a / scale) ** p) ** (1.0 / p))


def grid_size(K: int, oversample: int = 4) -> int:
    """Default quadrature grid ``oversample*(2K+1)``."""
    return max(1, int(oversample)) * (2 * K + 1)


def norm(f: SpectralFunction, p: Exponent, oversample: int = 4) -> float:
    """``||f||_p``; exact via Parseval for p=2, grid quadrature otherwise."""
    p = as_exponent(p)
    if p == 2.0:
        return f.l2_norm()
    return lp_norm(synthesize(f, grid_size(f.K, oversample)), p)


def partial_sum(f: SpectralFunction, m: int) -> SpectralFunction:
    """Keep the blocks ``|k|_1 <= m``."""
    if m < 0:
        raise ValueError(f"partial sum degree must be nonnegative, got {m}")
    return f.with_coeffs(np.where(f.degrees <= m, f.coeffs, 0))


def project_Y(f: SpectralFunction) -> SpectralFunction:
    """Zero every coefficient with mixed-sign index (k outside Y).

    Hermitian symmetry is kept only for ``d = 1``, where Y is all of Z.
    """
    return f.with_coeffs(np.where(y_mask(f.d, f.K), f.coeffs, 0), f.real and f.d == 1)


def random_function(rng: np.random.Generator, d: int, K: int, real: bool = True,
                    decay: float = 1.0, support: str = "full") -> SpectralFunction:
    """Random trigonometric polynomial with unit L_2 norm.

    Coefficients are complex Gaussian scaled by ``(1 + |k|_1)^-decay``.
    """
    shape = (2 * K + 1,) * d
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    c *= (1.0 + degree_tensor(d, K)) ** (-float(decay))
    if support == "Y":
        c = np.where(y_mask(d, K), c, 0)
        real = real and d == 1
    if real:
        c = 0.5 * (c + np.conj(c[(slice(None, None, -1),) * d]))
    nrm = np.sqrt(np.sum(np.abs(c) ** 2))
    return SpectralFunction(d, K, c / nrm, real)


def multi_indices(d: int, K: int) -> Iterable[tuple]:
    """All box indices in array order (for brute-force checks)."""
    return (tuple(int(i) - K for i in idx) for idx in np.ndindex(*(2 * K + 1,) * d))
