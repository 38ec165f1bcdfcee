"""Pure-endpoint singularity of the minimal reverse cost and its entropy rate.

Along the pure-loss path from the pure squeezed state ``diag(e^{2r}, e^{-2r})``
the covariance stays diagonal, so ``nu(t)`` and ``x(t)`` have closed forms. The
small differences ``nu - 1`` and ``x - 1`` are formed without cancellation:

    det Gamma_t = 1 + 2 eta (1 - eta) (cosh 2r - 1)
    x - 1       = eta (cosh 2r - 1) (2 eta - 1) / det Gamma_t

with ``eta = e^{-2 gamma t}``.
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DivergenceError


def default_time_grid(gamma: float = 1.0, per_decade: int = 40, decades: int = 6,
                      t_max: float = 1e-1) -> np.ndarray:
    """Log grid with ``per_decade`` points per decade, ``decades`` decades below ``t_max/gamma``."""
    top = np.log10(t_max / gamma)
    return np.logspace(top - decades, top, per_decade * decades + 1)


def _check_r(r):
    if not np.isfinite(r) or r <= 0:
        raise ValueError(f"pure endpoint needs r > 0 (r = 0 is the vacuum), got {r}")


def endpoint_path(r: float, gamma: float, t):
    """``(nu - 1, x - 1, nu)`` along the path, computed without cancellation."""
    _check_r(r)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("times must be positive")
    eta = np.exp(-2.0 * gamma * t)
    one_m_eta = -np.expm1(-2.0 * gamma * t)
    ch_m1 = 2.0 * np.sinh(r) ** 2  # cosh(2r) - 1
    det_m1 = 2.0 * eta * one_m_eta * ch_m1
    det = 1.0 + det_m1
    nu = np.sqrt(det)
    nu_m1 = det_m1 / (nu + 1.0)
    x_m1 = eta * ch_m1 * (2.0 * eta - 1.0) / det
    return nu_m1, x_m1, nu


def endpoint_cost(r: float, gamma: float, t):
    """Minimal one-mode reverse cost along the pure-endpoint path (both branches)."""
    nu_m1, x_m1, _ = endpoint_path(r, gamma, t)
    with np.errstate(divide="ignore"):
        z = np.where(x_m1 > 0, 4 * gamma * x_m1 / nu_m1, 4 * gamma * (-x_m1) / (nu_m1 + 2.0))
    return z if z.ndim else float(z)


@dataclass(frozen=True)
class EndpointAsymptotics:
    r: float
    gamma: float
    t: np.ndarray
    z_min: np.ndarray
    tz: np.ndarray
    fitted_coefficient: float
    fitted_slope: float


def pure_endpoint_curve(r: float, gamma: float = 1.0, t_grid=None) -> EndpointAsymptotics:
    """Samples of ``t Z_min(t)`` and the intercept ``c0`` of ``t Z = c0 + c1 t``.

    The fit uses the smallest decade of ``t_grid``.
    """
    t = default_time_grid(gamma) if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(t <= 0):
        raise ValueError("times must be positive")
    z = endpoint_cost(r, gamma, t)
    tz = t * z
    sel = np.flatnonzero(t <= 10.0 * t.min() * (1 + 1e-12))
    if len(sel) < 2:
        sel = np.argsort(t)[:2]
    A = np.column_stack([np.ones(len(sel)), t[sel]])
    (c0, c1), *_ = np.linalg.lstsq(A, tz[sel], rcond=None)
    return EndpointAsymptotics(r=float(r), gamma=float(gamma), t=t, z_min=z, tz=tz,
                               fitted_coefficient=float(c0), fitted_slope=float(c1))


def pure_endpoint_action(r: float, gamma: float, eps: float, T: float) -> float:
    """``int_eps^T Z_min dt`` by adaptive quadrature in ``u = ln t``."""
    if not (0 < eps < T):
        raise ValueError("need 0 < eps < T")
    f = lambda u: float(np.exp(u) * endpoint_cost(r, gamma, np.exp(u)))
    lo, hi = np.log(eps), np.log(T)
    # the branch switch at eta = 1/2 is a kink in the integrand
    kink = np.log(np.log(2.0) / (2.0 * gamma))
    points = [kink] if lo < kink < hi else None
    val, _ = quad(f, lo, hi, points=points, limit=200, epsabs=1e-12, epsrel=1e-12)
    return val


def action_remainder(r: float, gamma: float, eps: float, T: float) -> float:
    """``int_eps^T Z_min dt - 2 ln(T/eps)``."""
    return pure_endpoint_action(r, gamma, eps, T) - 2.0 * np.log(T / eps)


@dataclass(frozen=True)
class FluctuationRate:
    nu: float
    ell: float
    s_dot: float


def fluctuation_ell(nu, nu_minus_one=None):
    """``ln((nu + 1)/(nu - 1))``; pass ``nu_minus_one`` to avoid cancellation near 1."""
    nu = np.asarray(nu, dtype=float)
    d = nu - 1.0 if nu_minus_one is None else np.asarray(nu_minus_one, dtype=float)
    if np.any(d <= 0):
        raise DivergenceError("fluctuation rate diverges for nu <= 1")
    ell = np.log1p(2.0 / d)
    return ell if ell.ndim else float(ell)


def fluctuation_rate(nu: float, z: float, nu_minus_one: float | None = None) -> FluctuationRate:
    """Minimal fluctuation entropy rate ``nu ell(nu) Z / 2``."""
    ell = fluctuation_ell(nu, nu_minus_one)
    return FluctuationRate(nu=float(nu), ell=float(ell), s_dot=float(0.5 * nu * ell * z))


def fluctuation_along_endpoint(r: float, gamma: float, t):
    """Entropy rate along the pure-endpoint path at times ``t``."""
    nu_m1, _, nu = endpoint_path(r, gamma, t)
    return 0.5 * nu * fluctuation_ell(nu, nu_m1) * endpoint_cost(r, gamma, t)


def integrated_fluctuation(r: float, gamma: float, eps: float, T: float,
                           per_decade: int = 400) -> float:
    """Trapezoidal integral of the entropy rate over ``[eps, T]`` on a log grid."""
    _check_r(r)
    if not (0 < eps < T):
        raise ValueError("need 0 < eps < T")
    n = max(2, int(np.ceil(per_decade * np.log10(T / eps))) + 1)
    u = np.linspace(np.log(eps), np.log(T), n)
    t = np.exp(u)
    return float(np.trapezoid(t * fluctuation_along_endpoint(r, gamma, t), u))


def fluctuation_slope(r: float, gamma: float = 1.0, eps_grid=None, T: float | None = None):
    """Fit ``I(eps) = a L^2/2 + b L + c`` with ``L = ln(1/(gamma eps))``.

    Returns ``(a, naive)`` where ``naive`` is the slope of ``I`` against ``L^2/2``
    alone. The linear term is part of the asymptotic law, so ``a`` is the
    leading coefficient.
    """
    T = 1.0 / gamma if T is None else T
    eps = np.logspace(-6, -3, 13) / gamma if eps_grid is None else np.asarray(eps_grid)
    I = np.array([integrated_fluctuation(r, gamma, e, T) for e in eps])
    L = np.log(1.0 / (gamma * eps))
    a, b, c = np.linalg.lstsq(np.column_stack([0.5 * L**2, L, np.ones_like(L)]), I, rcond=None)[0]
    naive = np.polyfit(0.5 * L**2, I, 1)[0]
    return float(a), float(naive)
