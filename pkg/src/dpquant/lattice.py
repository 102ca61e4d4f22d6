"""Quantization lattices: nearest-point rule, cell geometry, dither sampling.

Two lattices are provided.  ScaledInteger is the cubic lattice (step per
axis, any dimension); its basic cell is the centered cube, symmetric per
coordinate.  Hexagonal is the 2-D hexagonal lattice, whose Voronoi cell is a
regular hexagon and exercises the non-product integration path of the
cell-smoothed cdf.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Lattice", "scaled_integer", "hexagonal"]


@dataclass(frozen=True, eq=False)
class Lattice:
    kind: str                 # "scaled_integer" | "hexagonal"
    generator: np.ndarray     # k x k, columns are basis vectors
    dim: int

    def __post_init__(self):
        g = np.asarray(self.generator, dtype=float)
        if g.shape != (self.dim, self.dim) or abs(np.linalg.det(g)) < 1e-300:
            raise ValueError("generator must be a nonsingular k x k matrix")

    @property
    def cell_volume(self) -> float:
        return abs(float(np.linalg.det(self.generator)))

    @property
    def step(self) -> float:
        """Per-axis step for ScaledInteger; scale (minimum distance) for Hexagonal."""
        return float(self.generator[0, 0])

    # ---- quantization ------------------------------------------------------

    def nearest_point(self, x):
        """Nearest lattice point(s) to x; returns (index, point).

        x may be a single k-vector or an (n, k) batch.  Ties: round-half-to-
        even per coordinate for ScaledInteger, lexicographically smallest
        index for Hexagonal.
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        xb = x[None, :] if single else x
        if self.kind == "scaled_integer":
            idx = np.rint(xb / self.step).astype(np.int64)  # rint = half-to-even
            pt = idx * self.step
        else:
            idx, pt = self._nearest_hex(xb)
        if single:
            return idx[0], pt[0]
        return idx, pt

    def _nearest_hex(self, xb):
        ginv = np.linalg.inv(self.generator)
        base = np.floor(xb @ ginv.T).astype(np.int64)
        offsets = np.array(list(itertools.product((0, 1), repeat=2)), dtype=np.int64)
        # widen by one ring to be safe near cell corners
        offsets = np.array(sorted(set(map(tuple, np.concatenate(
            [offsets + d for d in itertools.product((-1, 0, 1), repeat=2)])))),
            dtype=np.int64)
        cand_idx = base[:, None, :] + offsets[None, :, :]          # (n, c, 2)
        cand_pt = cand_idx @ self.generator.T                      # (n, c, 2)
        d2 = np.sum((cand_pt - xb[:, None, :]) ** 2, axis=2)
        # lexicographic tie-break: order candidates by index, take first argmin
        order = np.lexsort((offsets[:, 1], offsets[:, 0]))
        d2 = d2[:, order]
        cand_idx = cand_idx[:, order, :]
        cand_pt = cand_pt[:, order, :]
        best = np.argmin(np.where(d2 <= d2.min(axis=1, keepdims=True) + 1e-12,
                                  d2, np.inf), axis=1)
        rows = np.arange(len(xb))
        return cand_idx[rows, best], cand_pt[rows, best]

    def point(self, index):
        """Lattice point for an integer index vector (or batch)."""
        idx = np.asarray(index, dtype=np.int64)
        return idx @ np.asarray(self.generator, dtype=float).T

    # ---- dither ------------------------------------------------------------

    def sample_dither(self, rng: np.random.Generator, n: int | None = None):
        """Uniform draw(s) over the basic (Voronoi) cell.

        ScaledInteger: per-axis uniform on [-step/2, step/2].  General case:
        uniform on the fundamental parallelepiped folded into the Voronoi cell
        (subtract the nearest lattice point), which is exact and rejection-free.
        """
        m = 1 if n is None else n
        if self.kind == "scaled_integer":
            z = (rng.random((m, self.dim)) - 0.5) * self.step
        else:
            u = rng.random((m, self.dim)) @ np.asarray(self.generator).T
            _, pt = self.nearest_point(u)
            z = u - pt
        return z[0] if n is None else z

    # ---- geometry ------------------------------------------------------------

    def covering_box(self) -> list[tuple[float, float]]:
        """Per-axis extent [inf, sup] of the basic cell."""
        if self.kind == "scaled_integer":
            h = self.step / 2.0
            return [(-h, h)] * self.dim
        verts = self.cell_vertices()
        return [(float(verts[:, i].min()), float(verts[:, i].max()))
                for i in range(self.dim)]

    def cell_vertices(self) -> np.ndarray:
        """Vertices of the Voronoi cell (Hexagonal only), by half-plane
        enumeration over nearby lattice vectors."""
        if self.kind == "scaled_integer":
            h = self.step / 2.0
            corners = np.array(list(itertools.product((-h, h), repeat=self.dim)))
            return corners
        neigh = []
        for i, j in itertools.product(range(-2, 3), repeat=2):
            if (i, j) != (0, 0):
                neigh.append(self.point((i, j)))
        neigh = np.asarray(neigh)
        verts = []
        for a, b in itertools.combinations(range(len(neigh)), 2):
            va, vb = neigh[a], neigh[b]
            mat = np.array([va, vb])
            if abs(np.linalg.det(mat)) < 1e-12:
                continue
            rhs = np.array([va @ va / 2.0, vb @ vb / 2.0])
            v = np.linalg.solve(mat, rhs)
            # keep if inside every half-plane
            if np.all(neigh @ v <= np.sum(neigh ** 2, axis=1) / 2.0 + 1e-9):
                verts.append(v)
        verts = np.unique(np.round(np.asarray(verts), 12), axis=0)
        return verts


def scaled_integer(step: float, dim: int = 1) -> Lattice:
    if step <= 0:
        raise ValueError("step must be > 0")
    return Lattice(kind="scaled_integer", generator=np.eye(dim) * step, dim=dim)


def hexagonal(scale: float = 1.0) -> Lattice:
    """Hexagonal lattice with minimum distance = scale (dimension 2)."""
    if scale <= 0:
        raise ValueError("scale must be > 0")
    g = scale * np.array([[1.0, 0.5],
                          [0.0, math.sqrt(3.0) / 2.0]])
    return Lattice(kind="hexagonal", generator=g, dim=2)
