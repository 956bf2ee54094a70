"""Lattice Gaussian layer sampling and field accumulation.

Layers Y^n with covariance q_n are drawn either by dense factorization (any
family, small site counts) or by circulant embedding with FFTs (stationary
families on regular grids).  Replicas own independent RNG substreams derived
from a single master seed, so every draw is reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .kernels import (
    KernelSpec,
    eval_level_increment,
    level_increment_radial,
    partial_kernel_radial,
)

DENSE_SITE_LIMIT = 4096
# negative circulant eigenvalue mass tolerated before the embedding is rejected
CLIP_MASS_TOL = 1e-6
DENSE_JITTER = 1e-12

# stable purpose codes for RNG substream derivation
PURPOSES = {
    "field": 0,
    "atoms": 1,
    "subordinated": 2,
    "bootstrap": 3,
    "omega": 4,
    "control": 5,
}


class FieldError(ValueError):
    pass


class EmbeddingError(FieldError):
    """Circulant embedding not nonnegative definite within tolerance."""


@dataclass(frozen=True)
class RngStream:
    """Deterministic substream factory keyed by (replica, level, purpose)."""

    master_seed: int

    def generator(self, replica: int, level: int = 0, purpose: str = "field") -> np.random.Generator:
        code = PURPOSES[purpose]
        ss = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(code, replica, level))
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Lattice:
    """Regular grid of cell centers over an axis-aligned box (default unit box)."""

    d: int
    resolution: int
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        if self.resolution < 2:
            raise FieldError("resolution must be >= 2")
        if not self.high > self.low:
            raise FieldError("box must have positive side")

    @property
    def spacing(self) -> float:
        return (self.high - self.low) / self.resolution

    @property
    def n_sites(self) -> int:
        return self.resolution**self.d

    def axis_centers(self) -> np.ndarray:
        h = self.spacing
        return self.low + h * (np.arange(self.resolution) + 0.5)

    def centers(self) -> np.ndarray:
        """Site centers, shape (n_sites, d) in row-major site order."""
        ax = self.axis_centers()
        if self.d == 1:
            return ax[:, None]
        gx, gy = np.meshgrid(ax, ax, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def cell_index(self, points: np.ndarray) -> np.ndarray:
        """Nearest-cell flat index for points inside the box."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        idx = np.floor((pts - self.low) / self.spacing).astype(np.int64)
        idx = np.clip(idx, 0, self.resolution - 1)
        if self.d == 1:
            return idx[:, 0]
        return idx[:, 0] * self.resolution + idx[:, 1]


@dataclass
class FieldGrid:
    """Accumulated field X^n on a lattice, with its variance profile.

    variance0 is the scalar k_n(0) for stationary families, or a per-site
    array of k_n(x, x) for the nonstationary GFF family.
    """

    lattice: Lattice
    level: int
    values: np.ndarray
    variance0: float | np.ndarray
    layers: list[np.ndarray] | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise FieldError("field values must be finite")


def _circulant_eigs(spec: KernelSpec, n: int, lattice: Lattice, m: int) -> np.ndarray:
    h = lattice.spacing
    if lattice.d == 1:
        lags = np.minimum(np.arange(m), m - np.arange(m)) * h
        return np.fft.fft(level_increment_radial(spec, n, lags)).real
    lag = np.minimum(np.arange(m), m - np.arange(m)) * h
    rx, ry = np.meshgrid(lag, lag, indexing="ij")
    c = level_increment_radial(spec, n, np.hypot(rx, ry))
    return np.fft.fft2(c).real


def prepare_circulant(spec: KernelSpec, n: int, lattice: Lattice) -> tuple[np.ndarray, int]:
    """Sqrt-eigenvalue array of a nonnegative circulant embedding of q_n.

    Tries embeddings of increasing size; small negative eigenvalue mass is
    clipped to zero, larger mass raises EmbeddingError.
    """
    if not spec.stationary:
        raise EmbeddingError("circulant embedding requires a stationary family")
    m = 2 * lattice.resolution
    last_ratio = np.inf
    for _ in range(4):
        lam = _circulant_eigs(spec, n, lattice, m)
        neg = np.abs(lam[lam < 0]).sum()
        tot = np.abs(lam).sum()
        last_ratio = neg / tot if tot > 0 else 0.0
        if last_ratio <= CLIP_MASS_TOL:
            return np.sqrt(np.maximum(lam, 0.0)), m
        m *= 2
    raise EmbeddingError(
        f"negative eigenvalue mass {last_ratio:.3e} exceeds {CLIP_MASS_TOL} "
        f"for family {spec.family}, level {n}"
    )


def _draw_circulant(sqrt_lam: np.ndarray, m: int, d: int, resolution: int,
                    rng: np.random.Generator) -> np.ndarray:
    shape = (m,) if d == 1 else (m, m)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if d == 1:
        e = np.fft.fft(sqrt_lam * z) / np.sqrt(m)
        return e.real[:resolution]
    e = np.fft.fft2(sqrt_lam * z) / m
    return e.real[:resolution, :resolution].reshape(-1)


def _dense_factor(spec: KernelSpec, n: int, lattice: Lattice) -> np.ndarray:
    if lattice.n_sites > DENSE_SITE_LIMIT:
        raise FieldError(
            f"{lattice.n_sites} sites exceed the dense backend limit {DENSE_SITE_LIMIT}"
        )
    pts = lattice.centers()
    if spec.family == "gff-square":
        # row-chunked: the image-sum expansion is memory hungry on full pair grids
        q = np.empty((len(pts), len(pts)))
        step = max(1, 2**18 // max(len(pts), 1))
        for i in range(0, len(pts), step):
            q[i:i + step] = eval_level_increment(
                spec, n, pts[i:i + step, None, :], pts[None, :, :]
            )
    else:
        r = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        q = level_increment_radial(spec, n, r)
    scale = max(float(np.max(np.diag(q))), 1.0)
    q = q + DENSE_JITTER * scale * np.eye(len(q))
    w, v = np.linalg.eigh(q)
    neg = np.abs(w[w < 0]).sum()
    if neg > 1e-8 * np.abs(w).sum():
        raise FieldError(f"level covariance far from positive semidefinite (mass {neg:.3e})")
    return v * np.sqrt(np.maximum(w, 0.0))


class LayerSampler:
    """Reusable per-level sampler: factorizations are prepared once, then each
    draw costs one batch of normals (plus an FFT for the circulant backend)."""

    def __init__(self, spec: KernelSpec, lattice: Lattice, levels: Sequence[int],
                 backend: str = "auto"):
        self.spec = spec
        self.lattice = lattice
        self.levels = list(levels)
        if backend == "auto":
            backend = "circulant" if spec.stationary else "dense"
        self.backend = backend
        self._prep = {}
        for n in self.levels:
            if backend == "circulant":
                self._prep[n] = prepare_circulant(spec, n, lattice)
            else:
                self._prep[n] = _dense_factor(spec, n, lattice)
        self.variance0 = field_variance0(spec, self.levels, lattice)

    def sample_layer(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.backend == "circulant":
            sqrt_lam, m = self._prep[n]
            return _draw_circulant(sqrt_lam, m, self.lattice.d, self.lattice.resolution, rng)
        factor = self._prep[n]
        return factor @ rng.standard_normal(factor.shape[1])

    def sample_field(self, stream: RngStream, replica: int,
                     store_layers: bool = False) -> FieldGrid:
        """One replica of X^n = sum of layers, each layer on its own substream."""
        layers = []
        total = np.zeros(self.lattice.n_sites)
        for n in self.levels:
            y = self.sample_layer(n, stream.generator(replica, n, "field"))
            total += y
            if store_layers:
                layers.append(y)
        return FieldGrid(
            lattice=self.lattice,
            level=max(self.levels),
            values=total,
            variance0=self.variance0,
            layers=layers if store_layers else None,
        )


def field_variance0(spec: KernelSpec, levels: Sequence[int],
                    lattice: Lattice | None = None) -> float | np.ndarray:
    """Sum of q_n(x, x) over the sampled levels (k_n(0) for levels 1..n).

    Stationary families give a scalar; gff-square gives a per-site array and
    therefore requires the lattice.
    """
    levels = sorted(levels)
    if spec.family == "gff-square":
        if lattice is None:
            raise FieldError("gff-square variance profile requires the lattice")
        pts = lattice.centers()
        out = np.zeros(len(pts))
        for n in levels:
            out = out + eval_level_increment(spec, n, pts, pts)
        return out
    if levels == list(range(1, levels[-1] + 1)):
        return float(partial_kernel_radial(spec, levels[-1], 0.0))
    return float(sum(level_increment_radial(spec, n, 0.0) for n in levels))


def sample_layer(spec: KernelSpec, n: int, lattice: Lattice,
                 rng: np.random.Generator, backend: str = "auto") -> np.ndarray:
    """One draw of the level-n layer Y^n at the lattice sites."""
    return LayerSampler(spec, lattice, [n], backend=backend).sample_layer(n, rng)


def accumulate_field(spec: KernelSpec, lattice: Lattice, layers: Sequence[np.ndarray],
                     levels: Sequence[int], store_layers: bool = False) -> FieldGrid:
    """Sitewise sum of layers sampled on one lattice."""
    levels = list(levels)
    if len(layers) != len(levels):
        raise FieldError("layers and levels must align")
    total = np.zeros(lattice.n_sites)
    for y in layers:
        if y.shape != (lattice.n_sites,):
            raise FieldError("layer shape does not match lattice")
        total = total + y
    var0 = field_variance0(spec, levels, lattice) if levels else 0.0
    return FieldGrid(
        lattice=lattice,
        level=max(levels) if levels else 0,
        values=total,
        variance0=var0,
        layers=list(layers) if store_layers else None,
    )
