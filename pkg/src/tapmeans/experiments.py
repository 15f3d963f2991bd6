"""Test-function generators, rho-sweeps and slope fits for the approximation rates."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.special import betainc

from .analysis import k_functional, m_p, power_modulus, zbs_check
from .operators import falling_factorial, tap_mean
from .spectral import SpectralFunction, as_exponent, degree_tensor, norm, y_mask


@dataclass(frozen=True)
class DecaySpec:
    """Block amplitudes ``c_nu = (nu+1)^-s`` with random phases.

    ``per_block=None`` splits the block energy equally over every admissible
    index; an integer picks that many random indices (pairs when ``real``).
    ``degrees`` restricts the populated blocks.
    """

    d: int
    K: int
    s: float
    seed: int = 0
    support: str = "full"
    per_block: int | None = None
    real: bool = True
    degrees: tuple[int, ...] | None = None


def block_amplitudes(nu_max: int, s: float) -> np.ndarray:
    nu = np.arange(nu_max + 1, dtype=np.float64)
    if math.isinf(s):
        return (nu == 0).astype(np.float64)
    return (nu + 1.0) ** (-float(s))


def generate_test_function(spec: DecaySpec) -> SpectralFunction:
    """Deterministic test function whose block energies equal ``c_nu^2`` exactly."""
    if not spec.s > 0:
        raise ValueError(f"decay exponent must be positive, got s={spec.s}")
    if spec.d < 1:
        raise ValueError(f"dimension must be a positive integer, got d={spec.d}")
    if spec.support not in ("full", "Y"):
        raise ValueError(f"support must be 'full' or 'Y', got {spec.support!r}")
    d, K = spec.d, spec.K
    real = spec.real
    if real and spec.support == "Y" and d > 1:
        raise ValueError("Y-supported functions cannot be real for d > 1 (Y is not symmetric)")
    rng = np.random.default_rng(spec.seed)
    deg = degree_tensor(d, K)
    nu_max = d * K
    amp = block_amplitudes(nu_max, spec.s)
    if spec.degrees is not None:
        keep = np.zeros(nu_max + 1, dtype=bool)
        keep[[v for v in spec.degrees if 0 <= v <= nu_max]] = True
        amp = np.where(keep, amp, 0.0)

    allowed = y_mask(d, K) if spec.support == "Y" else np.ones(deg.shape, dtype=bool)
    size = deg.size
    centre = size // 2
    flat_deg = deg.ravel()
    flat_allowed = allowed.ravel()

    if spec.per_block is None:
        count = np.bincount(flat_deg[flat_allowed], minlength=nu_max + 1).astype(np.float64)
        mag = np.where(count > 0, amp / np.sqrt(np.maximum(count, 1.0)), 0.0)
        coeffs = np.where(allowed, mag[deg], 0.0).astype(np.complex128)
        phase = rng.uniform(0.0, 2 * np.pi, size=deg.shape)
        if real:
            # antisymmetric phase keeps c(-k) = conj(c(k)) and phase(0) = 0
            phase = phase - np.flip(phase)
        coeffs *= np.exp(1j * phase)
        return SpectralFunction(d, K, coeffs, real)

    q = int(spec.per_block)
    if q < 1:
        raise ValueError(f"per_block must be positive, got {q}")
    coeffs = np.zeros(size, dtype=np.complex128)
    cand = flat_allowed.copy()
    if real:
        cand[centre + 1:] = False      # one representative per Hermitian pair
    idx = np.nonzero(cand)[0]
    order = np.argsort(flat_deg[idx], kind="stable")
    idx = idx[order]
    bounds = np.searchsorted(flat_deg[idx], np.arange(nu_max + 2))
    for nu in range(nu_max + 1):
        if amp[nu] == 0:
            continue
        pool = idx[bounds[nu]:bounds[nu + 1]]
        if len(pool) == 0:
            continue
        chosen = rng.choice(pool, size=min(q, len(pool)), replace=False)
        phases = rng.uniform(0.0, 2 * np.pi, size=len(chosen))
        if real and nu == 0:
            coeffs[centre] = amp[0]
            continue
        if real:
            a = amp[nu] / math.sqrt(2 * len(chosen))
            coeffs[chosen] = a * np.exp(1j * phases)
            coeffs[size - 1 - chosen] = a * np.exp(-1j * phases)
        else:
            coeffs[chosen] = amp[nu] / math.sqrt(len(chosen)) * np.exp(1j * phases)
    return SpectralFunction(d, K, coeffs.reshape(deg.shape), real)


def inverse_radial(g: SpectralFunction, s: int) -> SpectralFunction:
    """``f`` with ``f^[s] = g`` on the blocks ``nu >= s``; lower blocks are copied."""
    nu = np.arange(g.nu_max + 1, dtype=np.float64)
    fall = falling_factorial(nu, s)
    scale = np.where(nu >= s, 1.0 / np.where(fall > 0, fall, 1.0), 1.0)
    return g.with_coeffs(g.coeffs * scale[g.degrees])


def drop_low_blocks(g: SpectralFunction, s: int) -> SpectralFunction:
    return g.with_coeffs(np.where(g.degrees >= s, g.coeffs, 0))


# --------------------------------------------------------------------------
# fitting


def slope_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least squares line through ``(log x, log y)``.

    Returns
    -------
    slope, intercept, residual
        ``residual`` is the largest absolute log-deviation from the line.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be one-dimensional and of equal length")
    if len(x) < 3:
        raise ValueError(f"slope fit needs at least 3 points, got {len(x)}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("slope fit needs strictly positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = float(np.max(np.abs(ly - (slope * lx + intercept))))
    return float(slope), float(intercept), residual


def rho_grid(j0: int, j1: int) -> tuple[np.ndarray, np.ndarray]:
    js = np.arange(int(j0), int(j1) + 1)
    return js, 1.0 - 2.0 ** (-js.astype(np.float64))


# --------------------------------------------------------------------------
# rate sweeps


@dataclass
class RateReport:
    r: int
    p: float
    js: np.ndarray
    rhos: np.ndarray
    errors: np.ndarray
    used: np.ndarray
    truncation_flags: np.ndarray
    noise_flags: np.ndarray
    slope: float = math.nan
    intercept: float = math.nan
    residual: float = math.nan
    exact_reproduction: bool = False
    note: str = ""

    @property
    def fitted(self) -> np.ndarray:
        out = np.full(len(self.js), math.nan)
        if math.isfinite(self.slope):
            out[self.used] = np.exp(self.intercept) * (1.0 - self.rhos[self.used]) ** self.slope
        return out

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["j", "rho", "error", "fitted", "residual", "used", "truncation_limited", "noise_floor"])
        fit = self.fitted
        for i, j in enumerate(self.js):
            res = abs(math.log(self.errors[i]) - math.log(fit[i])) if (
                self.errors[i] > 0 and math.isfinite(fit[i])) else math.nan
            w.writerow([int(j), repr(float(self.rhos[i])), repr(float(self.errors[i])), repr(float(fit[i])),
                        repr(res), int(self.used[i]), int(self.truncation_flags[i]), int(self.noise_flags[i])])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"r": self.r, "p": _json_p(self.p), "slope": _json_float(self.slope),
                "intercept": _json_float(self.intercept), "residual": _json_float(self.residual),
                "points_used": int(self.used.sum()), "points_total": int(len(self.js)),
                "truncation_limited_js": [int(j) for j in self.js[self.truncation_flags]],
                "noise_floor_js": [int(j) for j in self.js[self.noise_flags]],
                "exact_reproduction": self.exact_reproduction, "note": self.note}


def _json_float(x: float):
    return None if x is None or not math.isfinite(x) else float(x)


def _json_p(p: float):
    return "inf" if math.isinf(p) else p


def rate_sweep(f: SpectralFunction, r: int, p=2, j0: int = 2, j1: int = 12,
               truncation_guard: bool = False, noise_floor: float = 1e-13,
               oversample: int = 4) -> RateReport:
    """``||f - A_{rho,r} f||_p`` on ``rho = 1 - 2^-j`` with a log-log fit.

    With ``truncation_guard`` the sweep stops at the first rho where the
    truncation bound exceeds 1% of the measured error; points at or below
    ``noise_floor`` are flagged and excluded from the fit.
    """
    if not j1 > j0 >= 1:
        raise ValueError(f"need j1 > j0 >= 1, got j0={j0}, j1={j1}")
    p = as_exponent(p)
    js, rhos = rho_grid(j0, j1)
    errors = np.array([norm(f - tap_mean(f, float(rho), r), p, oversample) for rho in rhos])
    trunc = np.zeros(len(js), dtype=bool)
    if truncation_guard:
        top = f.max_degree()
        c_top = math.sqrt(float(f.block_energies()[top])) if top > 0 else 0.0
        bounds = np.array([c_top * float(top) ** r * rho ** top if top > 0 else 0.0 for rho in rhos])
        hit = bounds > 0.01 * errors
        if hit.any():
            trunc[int(np.argmax(hit)):] = True
    noise = errors <= noise_floor
    report = RateReport(int(r), p, js, rhos, errors, ~(trunc | noise), trunc, noise)
    if np.all(errors <= noise_floor):
        report.exact_reproduction = True
        report.used[:] = False
        report.note = "exact reproduction: f is a polynomial of degree < r"
        return report
    if noise.any():
        report.note = f"noise floor reached at j={int(js[noise][0])}"
    if report.used.sum() < 3:
        report.note = (report.note + "; " if report.note else "") + "fewer than 3 usable points"
        return report
    report.slope, report.intercept, report.residual = slope_fit(
        1.0 - rhos[report.used], errors[report.used])
    return report


def spectral_sum_error(f: SpectralFunction, r: int, rho: float) -> float:
    """Independent oracle for ``||f - A_{rho,r} f||_2``.

    Sums ``(1 - lambda_{nu,r}(rho))^2 * a_nu`` block by block, with the
    binomial upper tail taken from the regularized incomplete beta function
    ``1 - lambda = I_{1-rho}(r, nu - r + 1)``.
    """
    energies = {}
    for k_idx, c in np.ndenumerate(f.coeffs):
        if c != 0:
            nu = sum(abs(i - f.K) for i in k_idx)
            energies[nu] = energies.get(nu, 0.0) + abs(c) ** 2
    total = 0.0
    for nu, a in energies.items():
        tail = float(betainc(r, nu - r + 1, 1.0 - rho)) if nu >= r else 0.0
        total += tail * tail * a
    return math.sqrt(total)


def spectral_sum_error_blocks(energies: np.ndarray, r: int, rho: float) -> float:
    """Same oracle from precomputed block energies (for large boxes)."""
    nu = np.arange(len(energies), dtype=np.float64)
    tail = np.zeros_like(nu)
    hi = nu >= r
    tail[hi] = betainc(r, nu[hi] - r + 1, 1.0 - rho)
    return float(np.sqrt(np.sum(tail * tail * energies)))


# --------------------------------------------------------------------------
# theorem experiments


@dataclass
class TheoremReport:
    kind: str
    r: int
    n: int
    alpha: float
    p: float
    target: float
    rate: RateReport | None = None
    hypothesis_slope: float = math.nan
    hypothesis_deltas: np.ndarray = field(default=None, repr=False)
    hypothesis_values: np.ndarray = field(default=None, repr=False)
    oracle_errors: np.ndarray = field(default=None, repr=False)
    oracle_max_rel_dev: float = math.nan
    m_ratios: np.ndarray = field(default=None, repr=False)
    k_ratios: np.ndarray = field(default=None, repr=False)
    m_band: float = math.nan
    k_band: float = math.nan
    zbs: dict = field(default_factory=dict)
    asserted: bool = True
    passed: bool = False
    note: str = ""
    f: SpectralFunction | None = field(default=None, repr=False)
    g: SpectralFunction | None = field(default=None, repr=False)

    def summary(self) -> dict:
        out = {"kind": self.kind, "r": self.r, "n": self.n, "alpha": self.alpha, "p": _json_p(self.p),
               "target_slope": self.target, "asserted": self.asserted, "passed": self.passed,
               "note": self.note, "zbs": self.zbs}
        if self.rate is not None:
            out["rate"] = self.rate.summary()
        if self.kind == "direct":
            out["hypothesis_slope"] = _json_float(self.hypothesis_slope)
            out["oracle_max_rel_dev"] = _json_float(self.oracle_max_rel_dev)
        else:
            out["m_ratio_band"] = _json_float(self.m_band)
            out["k_ratio_band"] = _json_float(self.k_band)
        return out


def build_smooth_pair(spec: DecaySpec, r: int, n: int, alpha: float) -> tuple[SpectralFunction, SpectralFunction]:
    """``(f, g)`` with ``g = f^[r-n]`` and ``g`` block amplitudes ``(nu+1)^-(alpha+1/2)``."""
    s = r - n
    g = drop_low_blocks(generate_test_function(replace(spec, s=alpha + 0.5)), s)
    f = inverse_radial(g, s)
    return f, g


def _band(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    x = x[np.isfinite(x) & (x > 0)]
    return float(x.max() / x.min()) if len(x) else math.nan


def direct_theorem_experiment(spec: DecaySpec, r: int, n: int, alpha: float, p=2,
                              j0: int = 4, j1: int = 12, tol: float = 0.15,
                              pair: tuple[SpectralFunction, SpectralFunction] | None = None,
                              truncation_guard: bool = True) -> TheoremReport:
    """Measure the rate of ``||f - A_{rho,r} f||_p`` for ``f`` with
    ``K_n(delta, f^[r-n])_p ~ delta^alpha``.

    ``pair`` supplies ``(f, f^[r-n])`` directly; exact polynomials such as a
    single mode should be run with ``truncation_guard=False`` since they have
    no truncated tail.
    """
    if not (0 < alpha < n <= r):
        raise ValueError(f"need 0 < alpha < n <= r, got alpha={alpha}, n={n}, r={r}")
    p = as_exponent(p)
    target = r - n + alpha
    rep = TheoremReport("direct", r, n, alpha, p, target)
    z = zbs_check(power_modulus(alpha), n)
    rep.zbs = z.summary()
    f, g = pair if pair is not None else build_smooth_pair(spec, r, n, alpha)
    rep.f, rep.g = f, g

    rate = rate_sweep(f, r, p, j0, j1, truncation_guard=truncation_guard)
    rep.rate = rate
    deltas = 1.0 - rate.rhos
    rep.hypothesis_deltas = deltas
    rep.hypothesis_values = np.array([k_functional(g, float(dl), n, p).upper for dl in deltas])
    if rate.used.sum() >= 3:
        rep.hypothesis_slope = slope_fit(deltas[rate.used], rep.hypothesis_values[rate.used])[0]
    if p == 2.0:
        energies = f.block_energies()
        rep.oracle_errors = np.array([spectral_sum_error_blocks(energies, r, float(rho)) for rho in rate.rhos])
        rep.oracle_max_rel_dev = float(np.max(np.abs(rate.errors - rep.oracle_errors) / rep.oracle_errors))
    rep.passed = bool(z.satisfies_Z and math.isfinite(rate.slope) and abs(rate.slope - target) <= tol)
    if not z.satisfies_Z:
        rep.asserted = False
        rep.note = "modulus fails (Z); rate not asserted"
    return rep


def inverse_theorem_experiment(spec: DecaySpec, r: int, n: int, alpha: float, p=2,
                               j0: int = 4, j1: int = 12, band_limit: float = 10.0,
                               direct: TheoremReport | None = None) -> TheoremReport:
    """Boundedness certificates ``(1-rho)^n M_p(rho,f,r)/omega(1-rho)`` and
    ``K_n(delta, f^[r-n])_2/omega(delta)`` over the sweep."""
    p = as_exponent(p)
    rep = TheoremReport("inverse", r, n, alpha, p, r - n + alpha)
    omega = power_modulus(alpha)
    z = zbs_check(omega, n)
    rep.zbs = z.summary()
    if not (z.satisfies_Z and z.satisfies_Zn):
        rep.asserted = False
        rep.note = "modulus fails (Z) or (Z_n); inverse certificates not asserted"
        return rep
    if direct is None:
        direct = direct_theorem_experiment(spec, r, n, alpha, p, j0, j1)
    f, g = direct.f, direct.g
    rep.f, rep.g, rep.rate = f, g, direct.rate
    used = direct.rate.used
    rhos = direct.rate.rhos[used]
    deltas = 1.0 - rhos
    w = omega(deltas)
    rep.m_ratios = np.array([dl ** n * m_p(f, float(rho), r, p).value for rho, dl in zip(rhos, deltas)]) / w
    rep.k_ratios = np.array([k_functional(g, float(dl), n, 2).upper for dl in deltas]) / w
    rep.m_band, rep.k_band = _band(rep.m_ratios), _band(rep.k_ratios)
    rep.passed = bool(len(rhos) >= 3 and rep.m_band < band_limit and rep.k_band < band_limit)
    return rep


def write_report(path: str | None, fmt: str, payload: dict, csv_text: str | None = None) -> str:
    """Serialize ``payload`` as JSON, or ``csv_text`` as CSV; returns the text."""
    if fmt == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
