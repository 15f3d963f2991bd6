"""K-functionals, realization quantities, remainder integrals, moduli and multiplier norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .operators import (
    BlockMultiplier,
    apply_block_multiplier,
    falling_factorial,
    poisson_mean,
    poisson_rho_derivative,
    radial_derivative,
    rho_derivative_multiplier,
    tap_mean,
    tap_multiplier,
)
from .quadrature import adaptive_quad, gauss_legendre
from .spectral import (
    SampleField,
    SpectralFunction,
    as_exponent,
    degree_tensor,
    grid_size,
    lp_norm,
    norm,
    random_function,
    synthesize,
    y_mask,
)

# --------------------------------------------------------------------------
# moduli


@dataclass(frozen=True)
class Modulus:
    """A majorant ``omega(t)`` on ``[0, 1]``; ``eval`` must accept arrays."""

    eval: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def __call__(self, t):
        return self.eval(np.asarray(t, dtype=np.float64))


def power_modulus(alpha: float) -> Modulus:
    alpha = float(alpha)
    return Modulus(lambda t: np.power(t, alpha), f"power:{alpha:g}")


def power_log_modulus(alpha: float, beta: float) -> Modulus:
    """``t^alpha * ln^beta(e/t)``, extended at ``t = 0`` by its limit."""
    alpha, beta = float(alpha), float(beta)
    if alpha > 0 or (alpha == 0 and beta < 0):
        at_zero = 0.0
    elif alpha == 0 and beta == 0:
        at_zero = 1.0
    else:
        at_zero = math.inf

    def ev(t):
        t = np.asarray(t, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = np.power(t, alpha) * np.power(1.0 - np.log(t), beta)
        return np.where(t > 0, val, at_zero)

    return Modulus(ev, f"power-log:{alpha:g},{beta:g}")


def tabulated_modulus(ts: Sequence[float], ws: Sequence[float]) -> Modulus:
    ts = np.asarray(ts, dtype=np.float64)
    ws = np.asarray(ws, dtype=np.float64)
    order = np.argsort(ts)
    ts, ws = ts[order], ws[order]
    if ts[0] > 0 or ts[-1] < 1:
        raise ValueError("tabulated modulus must cover [0, 1]")
    return Modulus(lambda t: np.interp(t, ts, ws), "custom")


def parse_modulus(text: str, table: Sequence[tuple[float, float]] | None = None) -> Modulus:
    """Parse ``power:alpha``, ``power-log:alpha,beta`` or ``custom[:t,w;t,w;...]``."""
    name, _, args = text.strip().partition(":")
    name = name.strip().lower()
    try:
        if name == "power":
            return power_modulus(float(args))
        if name == "power-log":
            a, b = (float(x) for x in args.split(","))
            return power_log_modulus(a, b)
        if name == "custom":
            if table is None:
                table = [tuple(float(x) for x in pair.split(",")) for pair in args.split(";") if pair.strip()]
            ts, ws = zip(*table)
            return tabulated_modulus(ts, ws)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"malformed modulus spec {text!r}: {exc}") from None
    raise ValueError(f"unknown modulus spec {text!r}; expected power:, power-log: or custom")


@dataclass
class ModulusConditions:
    continuous: bool
    increasing: bool
    positive: bool
    vanishes_at_zero: bool

    @property
    def ok(self) -> bool:
        return self.continuous and self.increasing and self.positive and self.vanishes_at_zero

    def failures(self) -> list[str]:
        names = {"continuous": "1) continuity", "increasing": "2) monotonicity",
                 "positive": "3) positivity on (0,1]", "vanishes_at_zero": "4) omega(t)->0 as t->0+"}
        return [label for key, label in names.items() if not getattr(self, key)]


def check_modulus_conditions(w: Modulus, samples: int = 1 << 14) -> ModulusConditions:
    """Sampled checks of conditions 1)-4).

    Continuity is judged by refinement on ``[1e-3, 1]``: the largest jump
    between neighbours must shrink when the grid is doubled.  Positivity is
    strict on ``[1e-30, 1]``; further down, underflow to 0 is tolerated.
    """
    lin = np.linspace(1e-3, 1.0, samples + 1)
    lin2 = np.linspace(1e-3, 1.0, 2 * samples + 1)
    j1 = np.max(np.abs(np.diff(w(lin))))
    j2 = np.max(np.abs(np.diff(w(lin2))))
    scale = max(abs(float(w(1.0))), 1e-300)
    continuous = bool(np.isfinite(j2) and (j2 <= 0.75 * j1 or j2 <= 1e-9 * scale))

    logs = np.logspace(-300, 0, 3001)
    grid = np.unique(np.concatenate([[0.0], logs, lin]))
    vals = w(grid)
    finite = np.all(np.isfinite(vals))
    increasing = bool(finite and np.all(np.diff(vals) >= -1e-14 * scale))
    # below 1e-30 a positive omega may underflow to 0 (e.g. t^2 at 1e-300)
    positive = bool(np.all(vals[grid >= 1e-30] > 0) and np.all(vals[1:] >= 0))
    tail = w(np.logspace(-300, -1, 300))
    vanishes = bool(finite and np.all(np.diff(tail) >= -1e-14 * scale) and tail[0] <= 1e-2 * scale)
    return ModulusConditions(continuous, increasing, positive, vanishes)


@dataclass
class ConditionVerdict:
    name: str
    bounded: bool
    deltas: np.ndarray = field(repr=False)
    ratios: np.ndarray = field(repr=False)
    supremum: float = math.nan
    limit: float = math.nan
    note: str = ""


@dataclass
class ZBSReport:
    modulus: str
    n: int
    conditions: ModulusConditions
    Z: ConditionVerdict | None = None
    Zn: ConditionVerdict | None = None

    @property
    def satisfies_Z(self) -> bool:
        return self.conditions.ok and self.Z is not None and self.Z.bounded

    @property
    def satisfies_Zn(self) -> bool:
        return self.conditions.ok and self.Zn is not None and self.Zn.bounded

    def summary(self) -> dict:
        out = {"modulus": self.modulus, "n": self.n,
               "conditions_1_4": self.conditions.ok,
               "condition_failures": self.conditions.failures()}
        for v in (self.Z, self.Zn):
            if v is not None:
                out[v.name] = {"bounded": v.bounded, "supremum": v.supremum,
                               "limit": v.limit, "note": v.note}
        return out


def _looks_bounded(ratios: np.ndarray, rel_flat: float = 1e-9, decay: float = 0.97) -> bool:
    """Decide whether a ratio sequence on a geometric delta grid stays bounded.

    Flat sequences pass.  Otherwise the increments must decay at least
    geometrically with factor ``decay`` per grid step (a log-growth sequence
    has constant increments).
    """
    r = np.asarray(ratios, dtype=np.float64)
    if not np.all(np.isfinite(r)):
        return False
    inc = np.diff(r)
    if np.all(np.abs(inc) <= rel_flat * np.max(np.abs(r))):
        return True
    pos = np.abs(inc)
    pos = np.maximum(pos, 1e-300)
    slope = np.polyfit(np.arange(len(pos)), np.log(pos), 1)[0]
    return bool(math.exp(slope) < decay)


def _z_integral(w: Modulus, delta: float, tol: float) -> tuple[float, bool]:
    """``int_0^delta w(t)/t dt`` via ``t = delta*exp(-u)``; returns (value, converged)."""
    u_cap = min(1024.0, 690.0 + math.log(delta))
    f = lambda u: w(delta * np.exp(-u))
    total, _ = adaptive_quad(f, 0.0, 1.0, tol=tol)
    lo = 1.0
    while lo < u_cap:
        hi = min(2 * lo, u_cap)
        piece, _ = adaptive_quad(f, lo, hi, tol=tol)
        total += piece
        if abs(piece) <= 1e-15 * abs(total):
            return total, True
        lo = hi
    return total, False


def _zn_integral_scaled(w: Modulus, delta: float, n: int, tol: float) -> float:
    """``delta^n * int_delta^1 w(t)/t^(n+1) dt`` via ``t = exp(-u)``."""
    L = -math.log(delta)
    f = lambda u: w(np.exp(-u)) * np.exp(-n * (L - u))
    edges = np.linspace(0.0, L, max(2, int(math.ceil(L)) + 1))
    return sum(adaptive_quad(f, a, b, tol=tol)[0] for a, b in zip(edges[:-1], edges[1:]))


def zbs_check(w: Modulus, n: int, deltas: Sequence[float] | None = None, tol: float = 1e-12) -> ZBSReport:
    """Numerical (Z) and (Z_n) ratio sequences with boundedness verdicts."""
    if deltas is None:
        deltas = np.logspace(-1, -6, 11)
    deltas = np.sort(np.asarray(deltas, dtype=np.float64))[::-1]
    cond = check_modulus_conditions(w)
    report = ZBSReport(w.label, int(n), cond)
    if not cond.ok:
        return report

    wd = w(deltas)
    z_vals, z_conv = [], []
    for dlt in deltas:
        val, ok = _z_integral(w, float(dlt), tol)
        z_vals.append(val)
        z_conv.append(ok)
    z_ratio = np.asarray(z_vals) / wd
    if not all(z_conv):
        report.Z = ConditionVerdict("Z", False, deltas, z_ratio, float(np.max(z_ratio)), math.inf,
                                    "integral of omega(t)/t near 0 does not converge")
    else:
        report.Z = ConditionVerdict("Z", _looks_bounded(z_ratio), deltas, z_ratio,
                                    float(np.max(z_ratio)), float(z_ratio[-1]))

    zn_ratio = np.array([_zn_integral_scaled(w, float(dlt), n, tol) for dlt in deltas]) / wd
    report.Zn = ConditionVerdict(f"Z_{n}", _looks_bounded(zn_ratio), deltas, zn_ratio,
                                 float(np.max(zn_ratio)), float(zn_ratio[-1]))
    return report


# --------------------------------------------------------------------------
# realization quantities


@dataclass(frozen=True)
class MpValue:
    rho: float
    r: int
    p: float
    value: float


def m_p(f: SpectralFunction, rho: float, r: int, p=2, form: str = "radial", oversample: int = 4) -> MpValue:
    """``rho^r ||d^r f(rho,.)/d rho^r||_p = ||(f(rho,.))^[r]||_p``.

    ``form="radial"`` evaluates the right-hand side, ``form="derivative"``
    the left-hand side.
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    p = as_exponent(p)
    if form == "radial":
        g = radial_derivative(poisson_mean(f, rho), r)
        val = norm(g, p, oversample)
    elif form == "derivative":
        val = rho ** r * norm(poisson_rho_derivative(f, rho, r), p, oversample)
    else:
        raise ValueError(f"unknown form {form!r}")
    return MpValue(float(rho), int(r), p, float(val))


def lemma3_ratios(f: SpectralFunction, r: int, rhos: Sequence[float], p=2, oversample: int = 4) -> dict:
    """Monitored ratios ``(1-rho)^r ||d^r f(rho)/d rho^r||_p / ||f||_p`` and
    ``(1-rho)^r ||A_{rho,r}^[r] f||_p / ||f||_p``."""
    p = as_exponent(p)
    base = norm(f, p, oversample)
    deriv, tapd = [], []
    for rho in rhos:
        s = (1.0 - rho) ** r
        deriv.append(s * norm(poisson_rho_derivative(f, rho, r), p, oversample) / base)
        tapd.append(s * norm(radial_derivative(tap_mean(f, rho, r), r), p, oversample) / base)
    deriv, tapd = np.asarray(deriv), np.asarray(tapd)
    return {"rhos": np.asarray(rhos, dtype=float), "derivative_ratio": deriv, "tap_ratio": tapd,
            "sup_derivative_ratio": float(deriv.max()), "sup_tap_ratio": float(tapd.max()),
            "grid": "parseval" if p == 2 else f"m={grid_size(f.K, oversample)}"}


# --------------------------------------------------------------------------
# K-functional


@dataclass
class KFunEstimate:
    """Bracket for ``K_n(delta, f)_p``; ``upper`` is attained by :attr:`minimizer`."""

    delta: float
    n: int
    p: float
    upper: float
    lower: float
    weights: BlockMultiplier = field(repr=False)
    source: SpectralFunction = field(repr=False)
    method: str = ""

    @property
    def minimizer(self) -> SpectralFunction:
        return apply_block_multiplier(self.source, self.weights)


def _kfun_objective(t, a, b):
    A = math.sqrt(float(np.sum((1.0 - t) ** 2 * a)))
    B = math.sqrt(float(np.sum((b * t) ** 2 * a)))
    return A + B, A, B


def projected_gradient(fun, grad, x0, lo=0.0, hi=1.0, tol=1e-10, max_iter=100_000):
    """Projected gradient descent on a box with Armijo backtracking."""
    x = np.clip(np.asarray(x0, dtype=np.float64), lo, hi)
    fx = fun(x)
    step = 1.0
    for _ in range(max_iter):
        g = grad(x)
        if not np.all(np.isfinite(g)):
            break
        while True:
            x_new = np.clip(x - step * g, lo, hi)
            f_new = fun(x_new)
            dec = np.dot(g, x - x_new)
            if f_new <= fx - 1e-4 * dec or step < 1e-20:
                break
            step *= 0.5
        if fx - f_new <= tol * max(1.0, abs(fx)):
            if f_new < fx:
                x, fx = x_new, f_new
            break
        x, fx = x_new, f_new
        step *= 2.0
    return x, fx


def _kfun_l2_blocks(a: np.ndarray, mu: np.ndarray, dn: float, init: np.ndarray | None = None,
                    polish_iter: int = 100) -> tuple[float, float, np.ndarray]:
    """Minimize ``sqrt(sum (1-t)^2 a) + dn*sqrt(sum mu^2 t^2 a)`` over ``t >= 0``.

    The stationarity condition forces ``t_nu = 1/(1 + c b_nu^2)`` with
    ``b = dn*mu`` and a single scalar ``c >= 0``, so the search is over ``c``
    (plus both endpoints), then polished by projected gradient descent.
    A feasible dual point gives the certified lower bound.

    Returns
    -------
    upper, lower, t
    """
    t_full = np.ones_like(a)
    act = (a > 0) & (mu > 0)
    if not act.any():
        return 0.0, 0.0, t_full
    aa = a[act]
    b = dn * mu[act]

    def obj_c(logc):
        t = 1.0 / (1.0 + math.exp(logc) * b * b)
        return _kfun_objective(t, aa, b)[0]

    cands = [(_kfun_objective(np.ones_like(aa), aa, b)[0], np.ones_like(aa)),
             (_kfun_objective(np.zeros_like(aa), aa, b)[0], np.zeros_like(aa))]
    bmin, bmax = float(b.min()), float(b.max())
    lo_c = math.log(1e-8 / bmax ** 2)
    hi_c = math.log(1e8 / bmin ** 2)
    grid = np.linspace(lo_c, hi_c, 400)
    vals = np.array([obj_c(g) for g in grid])
    i = int(np.argmin(vals))
    lo_i, hi_i = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(obj_c, bounds=(lo_i, hi_i), method="bounded", options={"xatol": 1e-12})
    best_logc = res.x if res.fun <= vals[i] else grid[i]
    t_c = 1.0 / (1.0 + math.exp(best_logc) * b * b)
    cands.append((_kfun_objective(t_c, aa, b)[0], t_c))

    if init is not None:
        t0 = np.clip(init[act], 0.0, 1.0)
        cands.append((_kfun_objective(t0, aa, b)[0], t0))

    if polish_iter > 0:
        def fun(t):
            return _kfun_objective(t, aa, b)[0]

        def grad(t):
            _, A, B = _kfun_objective(t, aa, b)
            g = np.zeros_like(t)
            if A > 0:
                g -= (1.0 - t) * aa / A
            if B > 0:
                g += b * b * t * aa / B
            return g

        x0 = min(cands, key=lambda c: c[0])[1]
        x, fx = projected_gradient(fun, grad, x0, max_iter=polish_iter)
        cands.append((fx, x))

    upper, t_best = min(cands, key=lambda c: c[0])
    t_full[act] = t_best

    # dual certificate: any y = B z with ||y|| <= 1, ||z|| <= 1 gives <f, y> <= K
    lower = 0.0
    _, A, B = _kfun_objective(t_best, aa, b)
    directions = []
    if A > 0:
        directions.append(1.0 - t_best)           # y ~ f - h
    directions.append(b * b)                      # y ~ B B f
    directions.append(np.minimum(b, 1.0))
    for y in directions:
        ny = math.sqrt(float(np.sum(y * y * aa)))
        nz = math.sqrt(float(np.sum((y / b) ** 2 * aa)))
        scale = max(ny, nz)
        if scale > 0:
            lower = max(lower, float(np.sum(y * aa)) / scale)
    lower = min(lower, upper)
    return float(upper), float(lower), t_full


def k_functional(f: SpectralFunction, delta: float, n: int, p=2, oversample: int = 4,
                 polish_iter: int = 100) -> KFunEstimate:
    """``K_n(delta, f)_p = inf ||f - h||_p + delta^n ||h^[n]||_p`` over the box.

    For ``p = 2`` the bracket is certified: the minimizer is a block scaling of
    ``f`` and a dual feasible point bounds the infimum from below.  For other
    ``p`` the upper value is the best of several explicit ``h`` (the mean
    ``A_{1-delta,n}(f)``, the p=2 minimizer, ``0`` and ``f``) and the lower
    value comes from single-coefficient and norm-comparison bounds.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    p = as_exponent(p)
    dn = float(delta) ** n
    nu_max = f.nu_max
    a = f.block_energies()
    mu = falling_factorial(np.arange(nu_max + 1), n)
    rho0 = max(0.0, 1.0 - float(delta))
    init = tap_multiplier(nu_max, rho0, n).values
    up2, lo2, t = _kfun_l2_blocks(a, mu, dn, init=init, polish_iter=polish_iter)
    weights = BlockMultiplier(t, f"kfun-minimizer(delta={delta}, n={n})")
    if p == 2.0:
        return KFunEstimate(float(delta), n, p, up2, lo2, weights, f, "l2-blocks")

    def objective(w):
        h = apply_block_multiplier(f, BlockMultiplier(w))
        return norm(f - h, p, oversample) + dn * norm(radial_derivative(h, n), p, oversample)

    candidates = {"l2-minimizer": t, "tap-mean": init, "zero": np.zeros_like(t), "identity": np.ones_like(t)}
    scored = {name: objective(w) for name, w in candidates.items()}
    best = min(scored, key=scored.get)
    # |g_k| <= ||g||_1 <= ||g||_p, coefficientwise: |f_k - h_k| + dn*mu|h_k| >= min(1, dn*mu)|f_k|
    single = float(np.max(np.minimum(1.0, dn * mu[f.degrees]) * np.abs(f.coeffs)))
    lower = max(single, lo2) if p >= 2.0 else single
    upper = scored[best]
    lower = min(lower, upper)
    return KFunEstimate(float(delta), n, p, upper, lower,
                        BlockMultiplier(candidates[best], f"kfun-{best}(delta={delta}, n={n})"), f, best)


@dataclass
class SandwichPoint:
    rho: float
    lower: float      # (1-rho)^n M_p(rho, f, n)
    kfun: float       # K_n(1-rho, f)_p upper value
    upper: float      # ||f - A_{rho,n} f||_p + (1-rho)^n M_p(rho, f, n)

    @property
    def lower_ratio(self) -> float:
        return self.lower / self.kfun if self.kfun > 0 else math.nan

    @property
    def upper_ratio(self) -> float:
        return self.kfun / self.upper if self.upper > 0 else math.nan


def lemma5_sandwich(f: SpectralFunction, rho: float, n: int, p=2, oversample: int = 4) -> SandwichPoint:
    """The three quantities bracketing the K-functional via realization."""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    p = as_exponent(p)
    dn = (1.0 - rho) ** n
    lo = dn * m_p(f, rho, n, p, oversample=oversample).value
    k = k_functional(f, 1.0 - rho, n, p, oversample).upper
    up = norm(f - tap_mean(f, rho, n), p, oversample) + lo
    return SandwichPoint(float(rho), float(lo), float(k), float(up))


def lemma5_sweep(f: SpectralFunction, rhos: Sequence[float], n: int, p=2, oversample: int = 4) -> dict:
    pts = [lemma5_sandwich(f, rho, n, p, oversample) for rho in rhos]
    lr = np.array([q.lower_ratio for q in pts])
    ur = np.array([q.upper_ratio for q in pts])
    ok = np.isfinite(lr) & np.isfinite(ur)
    return {"points": pts,
            "C3_empirical": float(np.min(1.0 / lr[ok])) if ok.any() else math.nan,
            "lower_ratio_band": (float(lr[ok].min()), float(lr[ok].max())) if ok.any() else (math.nan, math.nan),
            "upper_ratio_band": (float(ur[ok].min()), float(ur[ok].max())) if ok.any() else (math.nan, math.nan)}


# --------------------------------------------------------------------------
# remainder integral


def remainder_integral(f: SpectralFunction, rho: float, r: int, m: int | None = None) -> SampleField:
    """Grid values of ``1/(r-1)! int_rho^1 d^r f(z,x)/dz^r (1-z)^(r-1) dz``.

    The integrand is a polynomial in ``z`` of degree ``maxDegree - 1``, so the
    Gauss-Legendre rule below is exact.
    """
    if int(r) != r or r < 1:
        raise ValueError(f"r must be a positive integer, got {r}")
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    if m is None:
        m = 2 * f.K + 1
    top = max(f.max_degree(), 0)
    nodes = (top + r) // 2 + 1
    zs, ws = gauss_legendre(float(rho), 1.0, nodes)
    acc = np.zeros((m,) * f.d, dtype=np.complex128)
    scale = 1.0 / math.factorial(r - 1)
    for z, w in zip(zs, ws):
        field_z = synthesize(poisson_rho_derivative(f, float(z), r), m)
        acc += (w * scale * (1.0 - z) ** (r - 1)) * field_z.values
    if f.real:
        acc = acc.real
    return SampleField(f.d, m, acc)


# --------------------------------------------------------------------------
# multiplier norms


@dataclass
class MultiplierNormEstimate:
    p: float
    d: int
    K: int
    lower: float
    upper: float
    exact: bool
    grid: int = 0

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def overlaps(self, other: "MultiplierNormEstimate", rtol: float = 1e-12) -> bool:
        slack = rtol * max(1.0, abs(self.upper), abs(other.upper))
        return self.lower <= other.upper + slack and other.lower <= self.upper + slack


def multiplier_norm(mult: BlockMultiplier, d: int, p=2, K: int = 8, m: int | None = None,
                    trials: int = 64, seed: int = 0, oversample: int = 4) -> MultiplierNormEstimate:
    """Norm of ``mult`` on Y-supported trigonometric polynomials of box degree K.

    p=2 gives the exact value ``max |mu_nu|``.  For other p the result is a
    bracket: the lower end is the best ratio over a test corpus, the upper end
    (p in {1, inf}) the grid L_1 norm of the Y-restricted kernel, which bounds
    the discrete operator by Young's inequality.
    """
    p = as_exponent(p)
    if mult.nu_max < d * K:
        raise ValueError(f"multiplier defined up to nu={mult.nu_max}, need nu_max >= d*K = {d * K}")
    vals = mult.values[: d * K + 1]
    if p == 2.0:
        s = float(np.max(np.abs(vals)))
        return MultiplierNormEstimate(p, d, K, s, s, True)

    if m is None:
        m = grid_size(K, oversample)
    mask = y_mask(d, K)
    deg = degree_tensor(d, K)
    kernel = SpectralFunction(d, K, np.where(mask, vals[deg], 0))
    kfield = synthesize(kernel, m)
    upper = lp_norm(kfield, 1) if (p == 1.0 or math.isinf(p)) else math.inf

    rng = np.random.default_rng(seed)
    corpus = [SpectralFunction.from_modes(d, K, {(0,) * d: 1.0})]
    corpus += [random_function(rng, d, K, real=False, decay=dec, support="Y")
               for dec in (0.0, 1.0) for _ in range(max(1, trials // 2))]
    for rho in (0.5, 0.8, 0.9, 0.95, 0.99):
        corpus.append(SpectralFunction(d, K, np.where(mask, rho ** deg.astype(float), 0)))
    # sign pattern of the kernel, projected back to Y
    kv = np.asarray(kfield.values)
    sign = np.conj(kv) / np.maximum(np.abs(kv), 1e-300)
    sign = np.roll(np.flip(sign, axis=tuple(range(d))), 1, axis=tuple(range(d)))
    spec = np.fft.fftn(sign) / float(m) ** d
    idx = np.ix_(*[np.arange(-K, K + 1) % m] * d)
    corpus.append(SpectralFunction(d, K, np.where(mask, spec[idx], 0)))

    lower = 0.0
    for g in corpus:
        den = lp_norm(synthesize(g, m), p)
        if den > 0:
            num = lp_norm(synthesize(apply_block_multiplier(g, mult), m), p)
            lower = max(lower, num / den)
    return MultiplierNormEstimate(p, d, K, float(lower), float(upper), False, m)
