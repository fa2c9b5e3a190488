"""Scalar and matrix primitives used throughout the package.

Univariate and bivariate standard-normal CDFs, the normal quantile, and
symmetric eigendecomposition. All functions are pure and thread-safe.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = [
    "std_normal_cdf",
    "std_normal_quantile",
    "bivariate_normal_cdf",
    "symmetric_eigendecomposition",
]

# Gauss-Legendre abscissae/weights (orders 6, 12, 20) for the bivariate
# normal quadrature of Drezner & Wesolowsky (1989) as refined by Genz.
_GL_X6 = (0.9324695142031522, 0.6612093864662647, 0.2386191860831970)
_GL_W6 = (0.1713244923791705, 0.3607615730481384, 0.4679139345726904)
_GL_X12 = (
    0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
    0.5873179542866171, 0.3678314989981802, 0.1252334085114692,
)
_GL_W12 = (
    0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
    0.2031674267230659, 0.2334925365383547, 0.2491470458134029,
)
_GL_X20 = (
    0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
    0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
    0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
    0.07652652113349733,
)
_GL_W20 = (
    0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
    0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
    0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
    0.1527533871307259,
)


def std_normal_cdf(x):
    """Standard normal CDF.

    Accepts a scalar or ndarray; every entry must be finite.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("std_normal_cdf requires finite input")
    out = special.ndtr(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def std_normal_quantile(p):
    """Inverse of the standard normal CDF on (0, 1)."""
    arr = np.asarray(p, dtype=np.float64)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise ValueError("std_normal_quantile requires p strictly inside (0, 1)")
    out = special.ndtri(arr)
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


def bivariate_normal_cdf(x: float, y: float, rho: float) -> float:
    """P(X <= x, Y <= y) for standard bivariate normal with correlation rho.

    ``math.inf`` is an accepted sentinel for either argument and
    marginalizes that coordinate away: f(x, inf, rho) == Phi(x). Any other
    non-finite value is rejected. Requires |rho| < 1.

    Uses the Gauss-Legendre scheme of Drezner & Wesolowsky (Genz's
    refinement), absolute accuracy well below 1e-7.
    """
    rho = float(rho)
    if not math.isfinite(rho) or abs(rho) >= 1.0:
        raise ValueError("bivariate_normal_cdf requires |rho| < 1")
    x = float(x)
    y = float(y)
    for v in (x, y):
        if not math.isfinite(v) and v != math.inf:
            raise ValueError("bivariate_normal_cdf arguments must be finite or +inf")
    if x == math.inf and y == math.inf:
        return 1.0
    if x == math.inf:
        return std_normal_cdf(y)
    if y == math.inf:
        return std_normal_cdf(x)
    return _bvn_lower(x, y, rho)


def _bvn_lower(dh: float, dk: float, r: float) -> float:
    # Genz's bvnl: P(X <= dh, Y <= dk) = bvnu(-dh, -dk).
    return _bvn_upper(-dh, -dk, r)


def _bvn_upper(h: float, k: float, r: float) -> float:
    # P(X > h, Y > k). Direct port of the published routine; the |r| >= 0.925
    # branch integrates over the complementary correlation variable.
    if abs(r) < 0.3:
        gx, gw = _GL_X6, _GL_W6
    elif abs(r) < 0.75:
        gx, gw = _GL_X12, _GL_W12
    else:
        gx, gw = _GL_X20, _GL_W20

    phi = std_normal_cdf
    hk = h * k
    bvn = 0.0
    if abs(r) < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r)
        for xi, wi in zip(gx, gw):
            for sgn in (-1.0, 1.0):
                sn = math.sin(asr * (1.0 + sgn * xi) / 2.0)
                bvn += wi * math.exp((sn * hk - hs) / (1.0 - sn * sn))
        bvn = bvn * asr / (4.0 * math.pi) + phi(-h) * phi(-k)
    else:
        if r < 0.0:
            k = -k
            hk = -hk
        a2 = (1.0 - r) * (1.0 + r)
        a = math.sqrt(a2)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 16.0
        asr = -(bs / a2 + hk) / 2.0
        if asr > -100.0:
            bvn = a * math.exp(asr) * (
                1.0 - c * (bs - a2) * (1.0 - d * bs / 5.0) / 3.0
                + c * d * a2 * a2 / 5.0
            )
        if -hk < 100.0:
            b = math.sqrt(bs)
            sp = math.sqrt(2.0 * math.pi) * phi(-b / a)
            bvn -= math.exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
        a /= 2.0
        for xi, wi in zip(gx, gw):
            for sgn in (-1.0, 1.0):
                xs = (a * (1.0 + sgn * xi)) ** 2
                rs = math.sqrt(1.0 - xs)
                asr = -(bs / xs + hk) / 2.0
                if asr > -100.0:
                    sp = 1.0 + c * xs * (1.0 + d * xs)
                    ep = math.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
                    bvn += a * wi * math.exp(asr) * (ep - sp)
        bvn = -bvn / (2.0 * math.pi)
        if r > 0.0:
            bvn += phi(-max(h, k))
        else:
            bvn = -bvn
            if k > h:
                bvn += phi(k) - phi(h)
    return min(1.0, max(0.0, bvn))


def symmetric_eigendecomposition(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues ascending, eigenvectors as columns) such that
    ``V @ diag(lam) @ V.T`` reconstructs the input. Input must be square
    and symmetric within 1e-12.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if np.max(np.abs(a - a.T)) > 1e-12:
        raise ValueError("matrix is not symmetric within 1e-12")
    eigenvalues, eigenvectors = np.linalg.eigh(a)
    return eigenvalues, eigenvectors
