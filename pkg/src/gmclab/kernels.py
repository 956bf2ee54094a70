"""Sigma-positive covariance kernel families.

Each family decomposes a log-correlated covariance K(x,y) = ln_+(T/|x-y|) + g
into a sum of continuous positive, positive-definite level kernels q_n, with
partial sums k_n = q_1 + ... + q_n.  All kernels here are stored in the unit
coupling convention: the intermittency parameter gamma never enters a kernel,
it is applied by the chaos layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import exp1

FAMILIES = ("exact1d", "exact2d", "star", "gff-square")

# time-slice geometry for the gff-square family: slice n covers
# [_gff_slice_lo(n), _gff_slice_lo(n-1)) with a head slice [1, inf)
_GFF_T0 = 1.0
_GFF_RATIO = 4.0
# switch between eigen-sine series (large t) and image/E1 closed form (small t)
_GFF_EIGEN_TOL = 1e-12
_GFF_IMAGE_K = 3


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family together with its correlation length T.

    family: one of 'exact1d', 'exact2d', 'star', 'gff-square'
    T: correlation length (support radius of the exact families)
    d: ambient dimension, must match the family
    star_seed: optional seed kernel k(r) for the star family; defaults to
        exp(-r^2), which is positive definite in every dimension.
    """

    family: str
    T: float = 1.0
    d: int = 1
    star_seed: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise KernelError(f"unknown kernel family {self.family!r}")
        if not (self.T > 0):
            raise KernelError("T must be positive")
        expected_d = {"exact1d": 1, "exact2d": 2, "gff-square": 2}.get(self.family)
        if expected_d is not None and self.d != expected_d:
            raise KernelError(f"family {self.family} requires d={expected_d}, got d={self.d}")
        if self.family == "star" and self.d not in (1, 2):
            raise KernelError("star family supports d in (1, 2)")

    @property
    def stationary(self) -> bool:
        return self.family != "gff-square"


@dataclass(frozen=True)
class LevelRange:
    n_min: int
    n_max: int

    def __post_init__(self):
        if not (1 <= self.n_min <= self.n_max):
            raise KernelError("level range requires 1 <= n_min <= n_max")

    def __iter__(self):
        return iter(range(self.n_min, self.n_max + 1))


def _check_level(n: int):
    if n < 1:
        raise KernelError(f"level must be >= 1, got {n}")


def _pair_distance(x, y, d: int) -> np.ndarray:
    """|x - y| for batches of points; in d=1 arrays are batches of scalars,
    in d=2 the trailing axis holds the coordinates."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = x - y
    if d == 1 or diff.ndim == 0:
        return np.abs(diff)
    return np.sqrt(np.sum(diff * diff, axis=-1))


# ---------------------------------------------------------------------------
# exact scale invariant families
# ---------------------------------------------------------------------------

def _kn_exact(r: np.ndarray, n: int, T: float, d: int) -> np.ndarray:
    """Piecewise partial kernel of the exact scale invariant family.

    0 for r > T; ln(T/r) for T/n <= r <= T; and near the origin
    ln n + (1 - n r/T) in d=1, ln n + 2(1 - sqrt(n r/T)) in d=2.
    """
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    mid = (r >= T / n) & (r <= T)
    inner = r < T / n
    with np.errstate(divide="ignore"):
        out[mid] = np.log(T / r[mid])
    if d == 1:
        out[inner] = np.log(n) + (1.0 - n * r[inner] / T)
    else:
        out[inner] = np.log(n) + 2.0 * (1.0 - np.sqrt(n * r[inner] / T))
    return out


# ---------------------------------------------------------------------------
# star scale invariant family
# ---------------------------------------------------------------------------

def _star_slice_gaussian(r: np.ndarray, a: float, b: float) -> np.ndarray:
    """int_a^b exp(-(r u)^2)/u du, closed form via the exponential integral."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    zero = r == 0
    out[zero] = np.log(b / a)
    rz = r[~zero]
    out[~zero] = 0.5 * (exp1((rz * a) ** 2) - exp1((rz * b) ** 2))
    return out


def _star_slice_quad(seed, r: np.ndarray, a: float, b: float) -> np.ndarray:
    flat = np.atleast_1d(np.asarray(r, dtype=float)).ravel()
    vals = np.empty_like(flat)
    for i, ri in enumerate(flat):
        val, err = integrate.quad(lambda u: seed(ri * u) / u, a, b, epsrel=1e-8, limit=200)
        if not np.isfinite(val) or (abs(val) > 1e-14 and err > 1e-6 * abs(val) + 1e-12):
            raise KernelError(f"star quadrature failed at r={ri}: value {val}, err {err}")
        vals[i] = val
    return vals.reshape(np.shape(r)) if np.ndim(r) else vals[0]


def _star_level(spec: KernelSpec, n: int, r: np.ndarray) -> np.ndarray:
    # level n integrates the seed over u in [2^n, 2^(n+1)]; distances scale by 1/T
    a, b = 2.0**n, 2.0 ** (n + 1)
    rs = np.asarray(r, dtype=float) / spec.T
    if spec.star_seed is None:
        return _star_slice_gaussian(rs, a, b)
    return _star_slice_quad(spec.star_seed, rs, a, b)


# ---------------------------------------------------------------------------
# GFF on the unit square (nonstationary)
# ---------------------------------------------------------------------------

def _gff_slice_lo(n: int) -> float:
    return _GFF_T0 * _GFF_RATIO ** (-(n - 1))


def _check_interior(x: np.ndarray):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(x <= 0.0) or np.any(x >= 1.0):
        raise KernelError("gff-square requires interior points of the unit square")


def _gff_head(x: np.ndarray, y: np.ndarray, a: float) -> np.ndarray:
    """pi * int_a^inf p_D(t,x,y) dt by the eigen-sine series, analytic in t."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    out = np.zeros(np.broadcast(x[..., 0], y[..., 0]).shape)
    jmax = 1
    while np.exp(-((jmax**2 + 1) * np.pi**2 / 2) * a) > _GFF_EIGEN_TOL:
        jmax += 1
    jmax = max(jmax, 2)
    j = np.arange(1, jmax + 1)
    for jj in j:
        for mm in j:
            lam = (jj**2 + mm**2) * np.pi**2 / 2.0
            w = np.exp(-lam * a) / lam
            if w < _GFF_EIGEN_TOL:
                continue
            out = out + (
                4.0
                * np.sin(jj * np.pi * x[..., 0]) * np.sin(jj * np.pi * y[..., 0])
                * np.sin(mm * np.pi * x[..., 1]) * np.sin(mm * np.pi * y[..., 1])
                * w
            )
    return np.pi * out


def _gff_band(x: np.ndarray, y: np.ndarray, a: float, b: float) -> np.ndarray:
    """pi * int_a^b p_D(t,x,y) dt via method of images and E1 closed forms.

    Each image pair contributes a term s*(1/(2 pi t)) exp(-c/(2t)); the time
    integral is (s/2)(E1(c/(2b)) - E1(c/(2a))), with the log form at c=0.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    k = np.arange(-_GFF_IMAGE_K, _GFF_IMAGE_K + 1)
    # per coordinate: offsets (x - y + 2k) with sign +, (x + y + 2k) with sign -
    def offsets(xc, yc):
        o_plus = xc[..., None] - yc[..., None] + 2.0 * k
        o_minus = xc[..., None] + yc[..., None] + 2.0 * k
        offs = np.concatenate([o_plus, o_minus], axis=-1)
        sign = np.concatenate([np.ones_like(o_plus), -np.ones_like(o_minus)], axis=-1)
        return offs, sign

    o1, s1 = offsets(x[..., 0], y[..., 0])
    o2, s2 = offsets(x[..., 1], y[..., 1])
    c = o1[..., :, None] ** 2 + o2[..., None, :] ** 2
    s = s1[..., :, None] * s2[..., None, :]
    out = np.where(
        c == 0.0,
        0.5 * np.log(b / a),
        0.5 * (exp1(np.maximum(c, 1e-300) / (2 * b)) - exp1(np.maximum(c, 1e-300) / (2 * a))),
    )
    return np.sum(s * out, axis=(-2, -1))


def gff_square_level(spec: KernelSpec, n: int, x, y) -> np.ndarray:
    """Level increment q_n for the GFF-on-square family (heat-kernel time slice)."""
    _check_level(n)
    _check_interior(x)
    _check_interior(y)
    scalar = np.ndim(x) == 1
    if n == 1:
        out = _gff_head(x, y, _gff_slice_lo(1))
    else:
        out = _gff_band(x, y, _gff_slice_lo(n), _gff_slice_lo(n - 1))
    return float(out.reshape(())) if scalar and out.size == 1 else out


def _gff_partial(spec: KernelSpec, n: int, x, y) -> np.ndarray:
    out = _gff_head(x, y, _GFF_T0)
    if n >= 2:
        out = out + _gff_band(x, y, _gff_slice_lo(n), _GFF_T0)
    return out


# ---------------------------------------------------------------------------
# public evaluation API
# ---------------------------------------------------------------------------

def eval_partial_kernel(spec: KernelSpec, n: int, x, y):
    """k_n(x, y), the covariance of the accumulated field X^n."""
    _check_level(n)
    if spec.family == "gff-square":
        scalar = np.ndim(x) == 1
        _check_interior(x)
        _check_interior(y)
        out = _gff_partial(spec, n, x, y)
        return float(out.reshape(())) if scalar and out.size == 1 else out
    r = _pair_distance(x, y, spec.d)
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(r)
    if spec.family == "exact1d":
        out = _kn_exact(r, n, spec.T, 1)
    elif spec.family == "exact2d":
        out = _kn_exact(r, n, spec.T, 2)
    else:
        out = np.zeros_like(r)
        for m in range(1, n + 1):
            out = out + _star_level(spec, m, r)
    return float(out[0]) if scalar else out


def eval_level_increment(spec: KernelSpec, n: int, x, y):
    """q_n(x, y) = k_n - k_{n-1} (k_0 = 0)."""
    _check_level(n)
    if spec.family == "gff-square":
        return gff_square_level(spec, n, x, y)
    if spec.family == "star":
        r = _pair_distance(x, y, spec.d)
        scalar = np.ndim(r) == 0
        out = _star_level(spec, n, np.atleast_1d(r))
        return float(out[0]) if scalar else out
    kn = eval_partial_kernel(spec, n, x, y)
    if n == 1:
        return kn
    return kn - eval_partial_kernel(spec, n - 1, x, y)


def partial_kernel_radial(spec: KernelSpec, n: int, r) -> np.ndarray:
    """k_n as a function of distance (stationary families only)."""
    _check_level(n)
    if not spec.stationary:
        raise KernelError("radial evaluation requires a stationary family")
    r = np.abs(np.asarray(r, dtype=float))
    if spec.family == "exact1d":
        return _kn_exact(r, n, spec.T, 1)
    if spec.family == "exact2d":
        return _kn_exact(r, n, spec.T, 2)
    out = np.zeros_like(r)
    for m in range(1, n + 1):
        out = out + _star_level(spec, m, r)
    return out


def level_increment_radial(spec: KernelSpec, n: int, r) -> np.ndarray:
    """q_n as a function of distance (stationary families only)."""
    _check_level(n)
    if not spec.stationary:
        raise KernelError("radial evaluation requires a stationary family")
    r = np.abs(np.asarray(r, dtype=float))
    if spec.family == "star":
        return _star_level(spec, n, r)
    if n == 1:
        return partial_kernel_radial(spec, 1, r)
    return partial_kernel_radial(spec, n, r) - partial_kernel_radial(spec, n - 1, r)


def limit_kernel(spec: KernelSpec, x, y):
    """The log-correlated limit ln_+(T/r) for the exact families."""
    if spec.family not in ("exact1d", "exact2d"):
        raise KernelError("closed-form limit kernel only for the exact families")
    r = _pair_distance(x, y, spec.d)
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(r)
    with np.errstate(divide="ignore"):
        out = np.where(r < spec.T, np.log(spec.T / np.maximum(r, 1e-300)), 0.0)
    return float(out[0]) if scalar else out
