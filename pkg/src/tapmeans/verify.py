"""Identity suites run by ``tapmeans --cmd verify``.

Each suite returns a list of :class:`Check` records; a suite passes when all
of its checks do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .analysis import remainder_integral
from .operators import (
    BlockMultiplier,
    apply_block_multiplier,
    kernel_convolution,
    lambda_sequence,
    poisson_mean,
    poisson_rho_derivative,
    radial_derivative,
    tap_mean,
    tap_multiplier,
    taylor_form,
    y_poisson_kernel,
)
from .spectral import (
    SpectralFunction,
    analyze,
    degree_tensor,
    lp_norm,
    project_Y,
    random_function,
    synthesize,
)

RHOS = (0.1, 0.5, 0.9, 0.99)
SUITES = ("lemma1", "eq10", "lemma4", "commutation", "lambda", "kernel", "parseval")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.error) and self.error <= self.tolerance)

    def as_dict(self) -> dict:
        return {"suite": self.suite, "check": self.name, "error": float(self.error),
                "tolerance": self.tolerance, "passed": self.passed}


@dataclass(frozen=True)
class VerifyConfig:
    d: int = 2
    K: int = 16
    r: int = 4
    seed: int = 42
    samples: int = 3
    fault: bool = False


def corpus(cfg: VerifyConfig) -> list[SpectralFunction]:
    rng = np.random.default_rng(cfg.seed)
    out = []
    for i in range(cfg.samples):
        out.append(random_function(rng, cfg.d, cfg.K, real=bool(i % 2 == 0), decay=float(i % 3)))
    return out


def _rel(a: SpectralFunction, b: SpectralFunction) -> float:
    scale = max(1.0, float(np.max(np.abs(a.coeffs))), float(np.max(np.abs(b.coeffs))))
    return a.max_abs_diff(b) / scale


def suite_lemma1(cfg: VerifyConfig, fs) -> list[Check]:
    """``tap_mean`` against the independently summed Taylor form."""
    worst = {}
    for r in range(1, cfg.r + 1):
        for rho in RHOS:
            mult = tap_multiplier(fs[0].nu_max, rho, r)
            if cfg.fault:
                vals = np.array(mult.values)
                vals[min(r, len(vals) - 1)] += 1e-6
                mult = BlockMultiplier(vals, mult.label + " (perturbed)")
            for f in fs:
                err = apply_block_multiplier(f, mult).max_abs_diff(taylor_form(f, rho, r))
                worst[r] = max(worst.get(r, 0.0), err)
    return [Check("lemma1", f"tap_mean == taylor_form, r={r}", e, 1e-12) for r, e in worst.items()]


def suite_eq10(cfg: VerifyConfig, fs) -> list[Check]:
    """``rho^r d^r f(rho)/d rho^r == (f(rho, .))^[r]``."""
    err = 0.0
    for r in range(1, cfg.r + 1):
        for rho in RHOS:
            for f in fs:
                lhs = poisson_rho_derivative(f, rho, r) * (rho ** r)
                rhs = radial_derivative(poisson_mean(f, rho), r)
                err = max(err, _rel(lhs, rhs))
    return [Check("eq10", "rho^r d^r/drho^r == radial derivative of poisson mean", err, 1e-14)]


def suite_lemma4(cfg: VerifyConfig, fs) -> list[Check]:
    """Integral remainder against ``f - A_{rho,r} f`` on the grid."""
    err = 0.0
    m = 2 * cfg.K + 1
    for r in range(1, cfg.r + 1):
        for rho in RHOS:
            for f in fs:
                lhs = remainder_integral(f, rho, r, m)
                rhs = synthesize(f - tap_mean(f, rho, r), m)
                err = max(err, lhs.max_abs_diff(rhs))
    return [Check("lemma4", "remainder integral == f - tap_mean (pointwise)", err, 1e-10)]


def suite_commutation(cfg: VerifyConfig, fs) -> list[Check]:
    e_tap = e_rad = e_sg = e_y = 0.0
    pairs = [(RHOS[i], RHOS[j]) for i in range(len(RHOS)) for j in range(i + 1, len(RHOS))]
    for f in fs:
        for r in range(1, cfg.r + 1):
            for r1, r2 in pairs:
                a = tap_mean(tap_mean(f, r2, r), r1, r)
                b = tap_mean(tap_mean(f, r1, r), r2, r)
                e_tap = max(e_tap, _rel(a, b))
            a = radial_derivative(radial_derivative(f, r), 1)
            b = radial_derivative(radial_derivative(f, 1), r)
            e_rad = max(e_rad, _rel(a, b))
            e_y = max(e_y, _rel(project_Y(tap_mean(f, 0.7, r)), tap_mean(project_Y(f), 0.7, r)))
        for r1, r2 in pairs:
            e_sg = max(e_sg, _rel(poisson_mean(poisson_mean(f, r1), r2), poisson_mean(f, r1 * r2)))
    return [Check("commutation", "A_{rho1,r} A_{rho2,r} == A_{rho2,r} A_{rho1,r}", e_tap, 1e-14),
            Check("commutation", "radial derivatives commute", e_rad, 1e-14),
            Check("commutation", "poisson semigroup", e_sg, 1e-14),
            Check("commutation", "tap_mean commutes with project_Y", e_y, 0.0)]


def lambda_table(nu_max: int = 200, r_max: int = 8, points: int = 100):
    """``lam[r-1, i, nu]`` on a uniform rho grid including both endpoints."""
    rhos = np.linspace(0.0, 1.0, points)
    lam = np.array([[lambda_sequence(nu_max, r, rho) for rho in rhos] for r in range(1, r_max + 1)])
    return rhos, lam


def suite_lambda(cfg: VerifyConfig, fs=None) -> list[Check]:
    nu_max, r_max = 200, 8
    rhos, lam = lambda_table(nu_max, r_max)
    nu = np.arange(nu_max + 1)
    out = []
    out.append(Check("lambda", "0 <= lambda <= 1",
                     float(max(0.0, -lam.min(), lam.max() - 1.0)), 0.0))
    out.append(Check("lambda", "nondecreasing in rho", float(max(0.0, -np.diff(lam, axis=1).min())), 1e-15))
    out.append(Check("lambda", "nondecreasing in r", float(max(0.0, -np.diff(lam, axis=0).min())), 1e-15))
    e0 = max(float(np.max(np.abs(lam[r - 1, 0, r:]))) for r in range(1, r_max + 1))
    out.append(Check("lambda", "lambda(0) = 0 for nu >= r", e0, 0.0))
    out.append(Check("lambda", "lambda(1) = 1", float(np.max(np.abs(lam[:, -1, :] - 1.0))), 0.0))
    excess = 0.0
    for r in range(1, r_max + 1):
        for i, rho in enumerate(rhos[1:-1], start=1):
            q = max(1.0 - rho, rho)
            v = nu[r:].astype(float)
            bound = r * q ** v * v ** (r - 1)
            excess = max(excess, float(np.max(lam[r - 1, i, r:] - bound)))
    out.append(Check("lambda", "growth bound r q^nu nu^(r-1)", max(0.0, excess), 0.0))
    spot = max(abs(lambda_sequence(2, 2, 0.5)[2] - 0.75), abs(lambda_sequence(3, 2, 0.5)[3] - 0.5))
    out.append(Check("lambda", "spot values 0.75, 0.5", float(spot), 1e-15))
    # complement against the regularized incomplete beta function
    dev = 0.0
    for r in range(1, r_max + 1):
        for i, rho in enumerate(rhos[1:-1], start=1):
            tail = betainc(r, nu[r:] - r + 1.0, 1.0 - rho)
            dev = max(dev, float(np.max(np.abs(lam[r - 1, i, r:] + tail - 1.0))))
    out.append(Check("lambda", "lambda + incomplete beta tail == 1", dev, 1e-13))
    return out


def suite_kernel(cfg: VerifyConfig, fs) -> list[Check]:
    out = []
    m = 64
    x = 2 * np.pi * np.arange(m) / m
    err = 0.0
    for rho in (0.3, 0.5, 0.9):
        classical = (1 - rho ** 2) / (1 - 2 * rho * np.cos(x) + rho ** 2)
        err = max(err, float(np.max(np.abs(y_poisson_kernel(rho, 1, m).values - classical))))
    out.append(Check("kernel", "d=1 reduces to the classical Poisson kernel", err, 1e-12))
    out.append(Check("kernel", "rho=0 gives the constant 1",
                     float(np.max(np.abs(y_poisson_kernel(0.0, cfg.d, 8).values - 1.0))), 0.0))

    # coefficients: rho^|k| on Z^d_+ and -Z^d_+, zero elsewhere
    rho, Kc = 0.5, 8
    mk = max(64, 4 * Kc)
    coef = analyze(y_poisson_kernel(rho, cfg.d, mk), Kc)
    deg = degree_tensor(cfg.d, Kc)
    grids = np.meshgrid(*[np.arange(-Kc, Kc + 1)] * cfg.d, indexing="ij")
    pos = np.all(np.stack(grids) >= 0, axis=0)
    neg = np.all(np.stack(grids) <= 0, axis=0)
    expect = np.where(pos | neg, rho ** deg.astype(float), 0.0)
    out.append(Check("kernel", "coefficients rho^|k| on Z^d_+ and -Z^d_+",
                     float(np.max(np.abs(coef.coeffs - expect))), 1e-12))

    # sampling the kernel aliases its tail onto |k| <= K with weight ~ rho^(m-K)
    err = 0.0
    m = max(2 * (2 * cfg.K + 1), cfg.K + 64)
    for f in fs:
        fy = project_Y(f)
        for rho in (0.3, 0.5):
            conv = kernel_convolution(fy, y_poisson_kernel(rho, cfg.d, m))
            err = max(err, conv.max_abs_diff(synthesize(poisson_mean(fy, rho), m)))
    out.append(Check("kernel", "convolution with the kernel is the Poisson mean on Y", err, 1e-12))
    return out


def suite_parseval(cfg: VerifyConfig, fs) -> list[Check]:
    err = rt = imag = 0.0
    m = 2 * cfg.K + 1
    for f in fs:
        s = synthesize(f, m)
        e = float(np.sum(np.abs(f.coeffs) ** 2))
        err = max(err, abs(lp_norm(s, 2) ** 2 - e) / e)
        rt = max(rt, analyze(s, cfg.K).max_abs_diff(f))
        if f.real:
            imag = max(imag, float(np.max(np.abs(np.imag(synthesize(f.with_coeffs(f.coeffs, False), m).values)))))
    return [Check("parseval", "||f||_2^2 == sum |c_k|^2 (relative)", err, 1e-12),
            Check("parseval", "analyze(synthesize(f)) == f", rt, 1e-12),
            Check("parseval", "real functions synthesize to real values", imag, 1e-12)]


_SUITE_FUNCS = {
    "lemma1": suite_lemma1, "eq10": suite_eq10, "lemma4": suite_lemma4,
    "commutation": suite_commutation, "lambda": suite_lambda, "kernel": suite_kernel,
    "parseval": suite_parseval,
}


def run_suites(cfg: VerifyConfig, names=SUITES) -> list[Check]:
    if cfg.d < 1:
        raise ValueError(f"dimension must be a positive integer, got d={cfg.d}")
    if cfg.K < 1:
        raise ValueError(f"K must be a positive integer, got K={cfg.K}")
    if cfg.r < 1:
        raise ValueError(f"r must be a positive integer, got r={cfg.r}")
    fs = corpus(cfg)
    checks = []
    for name in names:
        checks.extend(_SUITE_FUNCS[name](cfg, fs))
    return checks


def failed_suites(checks) -> list[str]:
    seen = []
    for c in checks:
        if not c.passed and c.suite not in seen:
            seen.append(c.suite)
    return seen
