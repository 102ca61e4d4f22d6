"""Quantizer-ensemble implementations.

Four kinds behind one descriptor-plus-functions interface: the zero-rate
synthesis scheme, resampling within the cells of a scalar quantizer, the
transformation-based scheme built on ECDQ, and the scaled-AWGN construction
that sits exactly on the Gaussian DP-RDF.  Encoder and decoder rebuild the
shared randomness from the same 64-bit seed; decoding never sees the source.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .ecdq import ecdq_decode, ecdq_encode
from .lattice import Lattice
from .prob import SourceModel
from .rng import stream_rng
from .transform import dpq_transform

__all__ = [
    "SimpleDpq",
    "ResampleDpq",
    "TransformDpq",
    "AwgnOracle",
    "simple_dpq",
    "resample_dpq",
    "transform_dpq_encode",
    "transform_dpq_decode",
    "awgn_oracle_apply",
]

# stream tags, to keep the seed-derived streams of different roles disjoint
_TAG_SCHEME = 2
_TAG_DITHER = 3


@dataclass(frozen=True)
class SimpleDpq:
    source: SourceModel
    seed: int


@dataclass(frozen=True)
class ResampleDpq:
    source: SourceModel
    seed: int
    step: float  # base uniform scalar quantizer step

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("base quantizer step must be > 0")
        if self.source.dim != 1:
            raise ValueError("resampling scheme is scalar")


@dataclass(frozen=True, eq=False)
class TransformDpq:
    source: SourceModel
    seed: int
    lat: Lattice

    def __post_init__(self):
        if self.source.dim != self.lat.dim:
            raise ValueError("source and lattice dimension mismatch")


@dataclass(frozen=True)
class AwgnOracle:
    source: SourceModel
    seed: int
    noise_var: float

    def __post_init__(self):
        from .prob import Family
        if self.source.family is not Family.GAUSSIAN:
            raise ValueError("the AWGN construction requires a Gaussian source")
        if self.noise_var < 0:
            raise ValueError("noise variance must be >= 0")


def simple_dpq(scheme: SimpleDpq, x, block: int = 0) -> np.ndarray:
    """Synthesize from the source law, ignoring x.  Rate 0."""
    x = np.asarray(x, dtype=float)
    rng = stream_rng(scheme.seed, _TAG_SCHEME, block)
    return np.asarray(scheme.source.icdf(rng.random(x.shape)))


def resample_dpq(scheme: ResampleDpq, x, block: int = 0):
    """Resample within the base-quantizer cell of each input.

    Cell j is [j*step, (j+1)*step); the reconstruction is an inverse-cdf draw
    restricted to the cell, so its marginal is exactly the source law.
    Returns (cell indices, x_tilde).
    """
    x = np.asarray(x, dtype=float).ravel()
    step = scheme.step
    j = np.floor(x / step).astype(np.int64)
    fa = np.asarray(scheme.source.cdf(j * step))
    fb = np.asarray(scheme.source.cdf((j + 1) * step))
    if np.any(fb - fa <= 0):
        raise ValueError("zero-probability base cell encountered")
    rng = stream_rng(scheme.seed, _TAG_SCHEME, block)
    u = fa + (fb - fa) * rng.random(x.shape)
    x_tilde = np.asarray(scheme.source.icdf(u))
    # clip against icdf clamping at the far tails
    x_tilde = np.clip(x_tilde, j * step, np.nextafter((j + 1) * step, -np.inf))
    return j, x_tilde


def _block_dithers(scheme: TransformDpq, n: int, block: int) -> np.ndarray:
    rng = stream_rng(scheme.seed, _TAG_DITHER, block)
    return scheme.lat.sample_dither(rng, n)


def transform_dpq_encode(scheme: TransformDpq, x, block: int = 0) -> np.ndarray:
    """ECDQ encode with the seed-derived dither stream for this block."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    z = _block_dithers(scheme, len(x), block)
    return ecdq_encode(scheme.lat, z, x).indices


def transform_dpq_decode(scheme: TransformDpq, indices, block: int = 0) -> np.ndarray:
    """Regenerate the dithers from the seed, undo ECDQ, apply the transform."""
    indices = np.atleast_2d(np.asarray(indices, dtype=np.int64))
    z = _block_dithers(scheme, len(indices), block)
    x_hat = ecdq_decode(scheme.lat, z, indices)
    return dpq_transform(scheme.source, scheme.lat, x_hat)


def awgn_oracle_apply(scheme: AwgnOracle, x, block: int = 0) -> np.ndarray:
    """x_tilde = sqrt(var/(var+eta^2)) (x - mu + N) + mu, N ~ N(0, eta^2)."""
    x = np.asarray(x, dtype=float)
    mu, var = scheme.source.params
    rng = stream_rng(scheme.seed, _TAG_SCHEME, block)
    noise = rng.standard_normal(x.shape) * math.sqrt(scheme.noise_var)
    return math.sqrt(var / (var + scheme.noise_var)) * (x - mu + noise) + mu
