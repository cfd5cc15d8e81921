"""Constraint sets in R^n and their geometric oracles.

Every set is bounded, non-empty and closed.  Oracles work on a single
point (shape ``(n,)``) or a batch (shape ``(m, n)``); batch evaluation is
what the quadrature and Monte Carlo engines rely on.

    >>> b = Ball(np.zeros(2), 1.0)
    >>> float(dist(b, [3.0, 0.0]))
    2.0
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.spatial import ConvexHull as _QHull
from scipy.spatial import Delaunay, QhullError
from scipy.spatial.distance import pdist

from ._numerics import ConvergenceError

__all__ = [
    "SetSpecError", "DimensionMismatch", "UnsupportedComposition", "SpecParseError",
    "SetSpec", "Point", "FinitePoints", "Ball", "Box", "Segment", "Ellipsoid",
    "L1Ball", "ConvexHull", "Scale", "Translate", "Product", "Union", "MinkowskiSum",
    "dist", "dist2", "project", "support", "sup_quadratic", "diameter", "diameter_bound", "contains",
    "volume", "as_points", "project_ellipsoid", "project_l1_ball", "from_dict", "to_dict",
    "load_spec", "loads_spec", "dumps_spec",
]

_CHUNK = 1 << 15


class SetSpecError(ValueError):
    pass


class DimensionMismatch(SetSpecError):
    pass


class UnsupportedComposition(SetSpecError):
    pass


class SpecParseError(SetSpecError):
    """Malformed spec document; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = "$", line: int | None = None):
        self.path = path
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{path}: {message}")


def _array(x, name) -> np.ndarray:
    try:
        return np.asarray(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SetSpecError(f"{name} is not a numeric array: {exc}") from None


def _vec(x, name="vector") -> np.ndarray:
    a = np.atleast_1d(_array(x, name))
    if a.ndim != 1 or a.size < 1:
        raise SetSpecError(f"{name} must be a non-empty 1-d array")
    if not np.all(np.isfinite(a)):
        raise SetSpecError(f"{name} has non-finite entries")
    return a


def _points(pts, name="points") -> np.ndarray:
    a = _array(pts, name)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise SetSpecError(f"{name} must be a non-empty list of equal-length vectors")
    if not np.all(np.isfinite(a)):
        raise SetSpecError(f"{name} has non-finite entries")
    return a


def _positive(x, name) -> float:
    x = float(x)
    if not (x > 0 and math.isfinite(x)):
        raise SetSpecError(f"{name} must be positive and finite, got {x}")
    return x


def _as_batch(spec: "SetSpec", x) -> tuple[np.ndarray, bool]:
    a = np.asarray(x, dtype=float)
    single = a.ndim <= 1
    a = a.reshape(1, -1) if single else a
    if a.ndim != 2 or a.shape[-1] != spec.dim:
        raise DimensionMismatch(f"point has dimension {a.shape[-1]}, set has dimension {spec.dim}")
    return a, single


def _sq_min_dist(X: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Row-wise min over P of squared distances.

    Uses explicit differences rather than the |x|^2 - 2<x,p> + |p|^2
    expansion, which loses absolute accuracy near the points.
    """
    out = np.full(X.shape[0], np.inf)
    n = X.shape[1]
    rows = max(1, (1 << 21) // max(1, P.shape[0] * n))
    for s in range(0, X.shape[0], rows):
        D = X[s:s + rows, None, :] - P[None, :, :]
        out[s:s + rows] = np.einsum("ijk,ijk->ij", D, D).min(axis=1)
    return out


def _is_symmetric_cloud(P: np.ndarray, tol: float = 1e-12) -> np.ndarray | None:
    c = P.mean(axis=0)
    Q = P - c
    a = Q[np.lexsort(Q.T[::-1])]
    b = (-Q)[np.lexsort((-Q).T[::-1])]
    scale = 1.0 + np.abs(Q).max()
    return c if np.allclose(a, b, atol=tol * scale, rtol=0) else None


class SetSpec:
    """Base class; subclasses are immutable value objects."""

    kind: str = ""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def is_convex(self) -> bool:
        return False

    @property
    def symmetry_center(self) -> np.ndarray | None:
        """Center c with A - c = c - A when provable from the constructor tree."""
        return None

    @property
    def is_symmetric(self) -> bool:
        return self.symmetry_center is not None

    def _dist2(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _support(self, X: np.ndarray) -> np.ndarray:
        raise UnsupportedComposition(f"no support oracle for {self.kind}")

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _diameter(self) -> tuple[float, bool]:
        lo, hi = self.bbox()
        return float(np.linalg.norm(hi - lo)), False

    def _volume(self) -> float:
        raise UnsupportedComposition(f"no volume formula for {self.kind}")

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({json.dumps(self.to_dict())})"


@dataclass(frozen=True, eq=False, repr=False)
class Point(SetSpec):
    v: np.ndarray
    kind = "point"

    def __post_init__(self):
        object.__setattr__(self, "v", _vec(self.v, "point"))

    @property
    def dim(self):
        return self.v.size

    @property
    def is_convex(self):
        return True

    @property
    def symmetry_center(self):
        return self.v

    def _dist2(self, X):
        D = X - self.v
        return np.einsum("ij,ij->i", D, D)

    def _support(self, X):
        return X @ self.v

    def bbox(self):
        return self.v.copy(), self.v.copy()

    def _diameter(self):
        return 0.0, True

    def _volume(self):
        return 0.0

    def to_dict(self):
        return {"type": "point", "coords": self.v.tolist()}


@dataclass(frozen=True, eq=False, repr=False)
class FinitePoints(SetSpec):
    points: np.ndarray
    kind = "finite_points"

    def __post_init__(self):
        P = _points(self.points)
        # canonical lexicographic order, duplicates removed
        P = np.unique(P, axis=0)
        object.__setattr__(self, "points", P)

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def is_convex(self):
        return self.size == 1

    @property
    def symmetry_center(self):
        return _is_symmetric_cloud(self.points)

    def _dist2(self, X):
        return _sq_min_dist(X, self.points)

    def _support(self, X):
        out = np.full(X.shape[0], -np.inf)
        for s in range(0, self.size, 256):
            np.maximum(out, (X @ self.points[s:s + 256].T).max(axis=1), out=out)
        return out

    def bbox(self):
        return self.points.min(axis=0), self.points.max(axis=0)

    def _diameter(self):
        if self.size == 1:
            return 0.0, True
        return float(pdist(self.points).max()), True

    def _volume(self):
        return 0.0

    def to_dict(self):
        return {"type": "finite_points", "points": self.points.tolist()}


@dataclass(frozen=True, eq=False, repr=False)
class Ball(SetSpec):
    center: np.ndarray
    radius: float
    kind = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        object.__setattr__(self, "radius", _positive(self.radius, "radius"))

    @property
    def dim(self):
        return self.center.size

    @property
    def is_convex(self):
        return True

    @property
    def symmetry_center(self):
        return self.center

    def _dist2(self, X):
        r = np.linalg.norm(X - self.center, axis=1)
        return np.maximum(r - self.radius, 0.0) ** 2

    def _support(self, X):
        return X @ self.center + self.radius * np.linalg.norm(X, axis=1)

    def bbox(self):
        return self.center - self.radius, self.center + self.radius

    def _diameter(self):
        return 2.0 * self.radius, True

    def _volume(self):
        from .intrinsic import kappa
        return kappa(self.dim) * self.radius ** self.dim

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False, repr=False)
class Box(SetSpec):
    corner: np.ndarray
    sides: np.ndarray
    kind = "box"

    def __post_init__(self):
        corner = _vec(self.corner, "corner")
        sides = _vec(self.sides, "sides")
        if sides.size != corner.size:
            raise DimensionMismatch("corner and sides differ in length")
        if np.any(sides <= 0):
            raise SetSpecError("box sides must be positive")
        object.__setattr__(self, "corner", corner)
        object.__setattr__(self, "sides", sides)

    @property
    def dim(self):
        return self.corner.size

    @property
    def is_convex(self):
        return True

    @property
    def symmetry_center(self):
        return self.corner + self.sides / 2.0

    def _dist2(self, X):
        D = X - np.clip(X, self.corner, self.corner + self.sides)
        return np.einsum("ij,ij->i", D, D)

    def _support(self, X):
        return X @ self.corner + np.maximum(X, 0.0) @ self.sides

    def bbox(self):
        return self.corner.copy(), self.corner + self.sides

    def _diameter(self):
        return float(np.linalg.norm(self.sides)), True

    def _volume(self):
        return float(np.prod(self.sides))

    def to_dict(self):
        return {"type": "box", "corner": self.corner.tolist(), "sides": self.sides.tolist()}


@dataclass(frozen=True, eq=False, repr=False)
class Segment(SetSpec):
    endpoints: np.ndarray
    kind = "segment"

    def __post_init__(self):
        E = _points(self.endpoints, "endpoints")
        if E.shape[0] != 2:
            raise SetSpecError("segment needs exactly two endpoints")
        object.__setattr__(self, "endpoints", E)

    @property
    def dim(self):
        return self.endpoints.shape[1]

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.endpoints[1] - self.endpoints[0]))

    @property
    def is_convex(self):
        return True

    @property
    def symmetry_center(self):
        return self.endpoints.mean(axis=0)

    def _dist2(self, X):
        p, q = self.endpoints
        d = q - p
        dd = float(d @ d)
        if dd == 0.0:
            D = X - p
        else:
            t = np.clip((X - p) @ d / dd, 0.0, 1.0)
            D = X - p - t[:, None] * d
        return np.einsum("ij,ij->i", D, D)

    def _support(self, X):
        return (X @ self.endpoints.T).max(axis=1)

    def bbox(self):
        return self.endpoints.min(axis=0), self.endpoints.max(axis=0)

    def _diameter(self):
        return self.length, True

    def _volume(self):
        return self.length if self.dim == 1 else 0.0

    def to_dict(self):
        return {"type": "segment", "endpoints": self.endpoints.tolist()}


def project_ellipsoid(axes, Y, tol: float = 1e-14, max_iter: int = 200):
    """Nearest points of the centered axis-aligned ellipsoid to the rows of Y.

    Exterior points solve sum_i a_i^2 y_i^2 / (a_i^2 + mu)^2 = 1 for mu > 0 by
    Newton's method on psi(mu) = 1/sqrt(S(mu)) - 1, safeguarded by bisection
    on a bracket derived from the largest and smallest terms.
    Returns (foot points, mu); mu = 0 for interior points.
    """
    a = np.asarray(axes, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    a2 = a * a
    g2 = a2 * Y * Y
    inside = np.einsum("ij,j->i", Y * Y, 1.0 / a2) <= 1.0
    mu = np.zeros(Y.shape[0])
    ext = np.flatnonzero(~inside)
    if ext.size:
        G2 = g2[ext]
        lo = np.maximum(0.0, (np.sqrt(G2) - a2).max(axis=1))
        hi = np.sqrt(G2.sum(axis=1)) - a2.min()
        hi = np.maximum(hi, lo)
        m = lo.copy()
        active = np.ones(ext.size, dtype=bool)
        for _ in range(max_iter):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            den = a2[None, :] + m[idx, None]
            S = (G2[idx] / den ** 2).sum(axis=1)
            dS = -2.0 * (G2[idx] / den ** 3).sum(axis=1)
            psi = 1.0 / np.sqrt(S) - 1.0
            dpsi = -0.5 * S ** -1.5 * dS
            # bracket update: psi < 0 means mu below the root
            below = psi < 0
            lo[idx] = np.where(below, np.maximum(lo[idx], m[idx]), lo[idx])
            hi[idx] = np.where(below, hi[idx], np.minimum(hi[idx], m[idx]))
            with np.errstate(divide="ignore", invalid="ignore"):
                step = -psi / dpsi
            new = m[idx] + step
            bad = ~np.isfinite(new) | (new < lo[idx]) | (new > hi[idx])
            new = np.where(bad, 0.5 * (lo[idx] + hi[idx]), new)
            done = (np.abs(new - m[idx]) <= tol * (1.0 + np.abs(new))) | (np.abs(psi) <= 1e-15) | (
                hi[idx] - lo[idx] <= tol * (1.0 + hi[idx]))
            m[idx] = new
            active[idx[done]] = False
        else:
            if np.any(active):
                raise ConvergenceError("ellipsoid projection did not converge")
        mu[ext] = m
    foot = a2 * Y / (a2 + mu[:, None])
    return foot, mu


@dataclass(frozen=True, eq=False, repr=False)
class Ellipsoid(SetSpec):
    """Axis-aligned ellipsoid {theta : sum (theta_i - c_i)^2 / a_i^2 <= 1}."""

    axes: np.ndarray
    center: np.ndarray | None = None
    kind = "ellipsoid"

    def __post_init__(self):
        a = _vec(self.axes, "axes")
        if np.any(a <= 0):
            raise SetSpecError("ellipsoid axes must be strictly positive")
        c = np.zeros_like(a) if self.center is None else _vec(self.center, "center")
        if c.size != a.size:
            raise DimensionMismatch("axes and center differ in length")
        object.__setattr__(self, "axes", a)
        object.__setattr__(self, "center", c)

    @property
    def dim(self):
        return self.axes.size

    @property
    def sorted_axes(self) -> np.ndarray:
        return np.sort(self.axes)[::-1]

    @property
    def is_convex(self):
        return True

    @property
    def symmetry_center(self):
        return self.center

    def project(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        foot, _ = project_ellipsoid(self.axes, X - self.center)
        return foot + self.center

    def _dist2(self, X):
        Y = X - self.center
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], _CHUNK):
            y = Y[s:s + _CHUNK]
            _, mu = project_ellipsoid(self.axes, y)
            R = mu[:, None] * y / (self.axes ** 2 + mu[:, None])
            out[s:s + _CHUNK] = np.einsum("ij,ij->i", R, R)
        return out

    def _support(self, X):
        return X @ self.center + np.linalg.norm(X * self.axes, axis=1)

    def bbox(self):
        return self.center - self.axes, self.center + self.axes

    def _diameter(self):
        return 2.0 * float(self.axes.max()), True

    def _volume(self):
        from .intrinsic import kappa
        return kappa(self.dim) * float(np.prod(self.axes))

    def to_dict(self):
        d = {"type": "ellipsoid", "axes": self.axes.tolist()}
        if np.any(self.center != 0):
            d["center"] = self.center.tolist()
        return d


def project_l1_ball(X, alpha: float) -> np.ndarray:
    """Euclidean projection of the rows of X onto alpha * B_1 (sort-based)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    A = np.abs(X)
    out = X.copy()
    outside = A.sum(axis=1) > alpha
    if np.any(outside):
        U = -np.sort(-A[outside], axis=1)
        css = np.cumsum(U, axis=1) - alpha
        j = np.arange(1, X.shape[1] + 1)
        cond = U - css / j > 0
        rho = X.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
        tau = css[np.arange(U.shape[0]), rho] / (rho + 1)
        out[outside] = np.sign(X[outside]) * np.maximum(A[outside] - tau[:, None], 0.0)
    return out


@dataclass(frozen=True, eq=False, repr=False)
class L1Ball(SetSpec):
    alpha: float
    d: int
    kind = "l1_ball"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive(self.alpha, "alpha"))
        if int(self.d) != self.d or self.d < 1:
            raise SetSpecError("l1 ball dimension must be a positive integer")
        object.__setattr__(self, "d", int(self.d))

    @property
    def dim(self):
        return self.d

    @property
    def is_convex(self):
        return True

    @property
    def symmetry_center(self):
        return np.zeros(self.d)

    def _dist2(self, X):
        D = X - project_l1_ball(X, self.alpha)
        return np.einsum("ij,ij->i", D, D)

    def _support(self, X):
        return self.alpha * np.abs(X).max(axis=1)

    def bbox(self):
        return -self.alpha * np.ones(self.d), self.alpha * np.ones(self.d)

    def _diameter(self):
        return 2.0 * self.alpha if self.d > 1 else 2.0 * self.alpha, True

    def _volume(self):
        return (2.0 * self.alpha) ** self.d / math.factorial(self.d)

    def to_dict(self):
        return {"type": "l1_ball", "alpha": self.alpha, "dim": self.d}


def _wolfe_min_norm(Y: np.ndarray, gap_tol: float, cap: int) -> np.ndarray:
    """Minimum-norm point of conv(rows of Y) by Wolfe's algorithm."""
    norms = np.einsum("ij,ij->i", Y, Y)
    S = [int(np.argmin(norms))]
    w = np.array([1.0])
    z = Y[S[0]].copy()
    scale = max(1.0, float(norms.max()))
    for _ in range(cap):
        scores = Y @ z
        j = int(np.argmin(scores))
        if z @ z - scores[j] <= gap_tol or j in S:
            return z
        S.append(j)
        w = np.append(w, 0.0)
        for _ in range(len(Y) + 1):
            B = Y[S]
            m = len(S)
            K = np.zeros((m + 1, m + 1))
            K[:m, :m] = B @ B.T
            K[:m, m] = K[m, :m] = 1.0
            rhs = np.zeros(m + 1)
            rhs[m] = 1.0
            alpha = np.linalg.lstsq(K, rhs, rcond=None)[0][:m]
            if np.all(alpha > 1e-14 * scale):
                w = alpha
                break
            neg = alpha <= 1e-14 * scale
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, w / (w - alpha), np.inf)
            theta = min(1.0, float(np.min(ratios)))
            w = w + theta * (alpha - w)
            keep = w > 1e-15
            S = [s for s, k in zip(S, keep) if k]
            w = w[keep] / w[keep].sum()
        z = w @ Y[S]
    raise ConvergenceError(f"convex hull projection: gap > {gap_tol} after {cap} iterations")


@dataclass(frozen=True, eq=False, repr=False)
class ConvexHull(SetSpec):
    points: np.ndarray
    gap_tol: float = 1e-9
    kind = "convex_hull"
    _tri: Any = field(default=None, init=False, compare=False)

    def __post_init__(self):
        P = np.unique(_points(self.points), axis=0)
        object.__setattr__(self, "points", P)
        tri = None
        n = P.shape[1]
        if P.shape[0] > n and n <= 8:
            try:
                tri = Delaunay(P)
            except (QhullError, ValueError):
                tri = None
        object.__setattr__(self, "_tri", tri)

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def is_convex(self):
        return True

    @property
    def symmetry_center(self):
        return _is_symmetric_cloud(self.points)

    def project(self, X) -> np.ndarray:
        """Nearest hull points.

        A batched away-step Frank-Wolfe pass handles most rows; rows still
        above the dual-gap tolerance are finished by Wolfe's min-norm-point
        active-set method, which terminates finitely.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        P = self.points
        k, n = P.shape
        out = X.copy()
        todo = np.arange(X.shape[0])
        if self._tri is not None:
            todo = todo[self._tri.find_simplex(X) < 0]
        if k == 1:
            out[todo] = P[0]
            return out
        cap = 10 * k * n
        for s in range(0, todo.size, 4096):
            idx = todo[s:s + 4096]
            z, left = self._fw(X[idx], min(cap, 400))
            for i in np.flatnonzero(left):
                z[i] = _wolfe_min_norm(P - X[idx[i]], self.gap_tol, cap) + X[idx[i]]
            out[idx] = z
        return out

    def _fw(self, X, cap):
        P = self.points
        B = X.shape[0]
        rows = np.arange(B)
        d0 = X @ P.T
        start = np.argmin(np.einsum("ij,ij->i", P, P)[None, :] - 2 * d0, axis=1)
        W = np.zeros((B, P.shape[0]))
        W[rows, start] = 1.0
        z = P[start].copy()
        active = np.ones(B, dtype=bool)
        for _ in range(cap):
            ia = np.flatnonzero(active)
            if ia.size == 0:
                break
            g = z[ia] - X[ia]
            scores = g @ P.T
            gz = np.einsum("ij,ij->i", g, z[ia])
            fw = np.argmin(scores, axis=1)
            gap_fw = gz - scores[np.arange(ia.size), fw]
            done = gap_fw <= self.gap_tol
            masked = np.where(W[ia] > 0, scores, -np.inf)
            aw = np.argmax(masked, axis=1)
            gap_aw = masked[np.arange(ia.size), aw] - gz
            use_fw = gap_fw >= gap_aw
            wa = W[ia, aw]
            d = np.where(use_fw[:, None], P[fw] - z[ia], z[ia] - P[aw])
            gmax = np.where(use_fw, 1.0, wa / np.maximum(1.0 - wa, 1e-300))
            dd = np.einsum("ij,ij->i", d, d)
            with np.errstate(divide="ignore", invalid="ignore"):
                gam = np.where(dd > 0, -np.einsum("ij,ij->i", g, d) / dd, 0.0)
            gam = np.clip(gam, 0.0, gmax)
            gam[done] = 0.0
            z[ia] += gam[:, None] * d
            Wi = W[ia]
            fwm = use_fw & ~done
            Wi[fwm] *= (1.0 - gam[fwm])[:, None]
            Wi[np.flatnonzero(fwm), fw[fwm]] += gam[fwm]
            awm = ~use_fw & ~done
            Wi[awm] *= (1.0 + gam[awm])[:, None]
            Wi[np.flatnonzero(awm), aw[awm]] -= gam[awm]
            drop = awm & (gam >= gmax)
            Wi[np.flatnonzero(drop), aw[drop]] = 0.0
            Wi[Wi < 1e-16] = 0.0
            W[ia] = Wi
            active[ia[done]] = False
        return z, active

    def _dist2(self, X):
        D = X - self.project(X)
        return np.einsum("ij,ij->i", D, D)

    def _support(self, X):
        return (X @ self.points.T).max(axis=1)

    def bbox(self):
        return self.points.min(axis=0), self.points.max(axis=0)

    def _diameter(self):
        if self.points.shape[0] == 1:
            return 0.0, True
        return float(pdist(self.points).max()), True

    def _volume(self):
        try:
            return float(_QHull(self.points).volume)
        except (QhullError, ValueError):
            return 0.0

    def to_dict(self):
        return {"type": "convex_hull", "points": self.points.tolist()}


@dataclass(frozen=True, eq=False, repr=False)
class Scale(SetSpec):
    factor: float
    inner: SetSpec
    kind = "scale"

    def __post_init__(self):
        object.__setattr__(self, "factor", _positive(self.factor, "scale factor"))

    @property
    def dim(self):
        return self.inner.dim

    @property
    def is_convex(self):
        return self.inner.is_convex

    @property
    def symmetry_center(self):
        c = self.inner.symmetry_center
        return None if c is None else self.factor * c

    def _dist2(self, X):
        return self.factor ** 2 * self.inner._dist2(X / self.factor)

    def _support(self, X):
        return self.factor * self.inner._support(X)

    def bbox(self):
        lo, hi = self.inner.bbox()
        return self.factor * lo, self.factor * hi

    def _diameter(self):
        d, exact = self.inner._diameter()
        return self.factor * d, exact

    def _volume(self):
        return self.factor ** self.dim * self.inner._volume()

    def to_dict(self):
        return {"type": "scale", "factor": self.factor, "inner": self.inner.to_dict()}


@dataclass(frozen=True, eq=False, repr=False)
class Translate(SetSpec):
    by: np.ndarray
    inner: SetSpec
    kind = "translate"

    def __post_init__(self):
        by = _vec(self.by, "translation")
        if by.size != self.inner.dim:
            raise DimensionMismatch("translation vector and inner set differ in dimension")
        object.__setattr__(self, "by", by)

    @property
    def dim(self):
        return self.inner.dim

    @property
    def is_convex(self):
        return self.inner.is_convex

    @property
    def symmetry_center(self):
        c = self.inner.symmetry_center
        return None if c is None else c + self.by

    def _dist2(self, X):
        return self.inner._dist2(X - self.by)

    def _support(self, X):
        return X @ self.by + self.inner._support(X)

    def bbox(self):
        lo, hi = self.inner.bbox()
        return lo + self.by, hi + self.by

    def _diameter(self):
        return self.inner._diameter()

    def _volume(self):
        return self.inner._volume()

    def to_dict(self):
        return {"type": "translate", "by": self.by.tolist(), "inner": self.inner.to_dict()}


def _check_parts(parts, same_dim: bool) -> tuple:
    parts = tuple(parts)
    if not parts:
        raise SetSpecError("composite needs at least one part")
    for p in parts:
        if not isinstance(p, SetSpec):
            raise SetSpecError(f"composite part is not a SetSpec: {p!r}")
    if same_dim and len({p.dim for p in parts}) != 1:
        raise DimensionMismatch("composite parts differ in dimension")
    return parts


@dataclass(frozen=True, eq=False, repr=False)
class Product(SetSpec):
    parts: tuple
    kind = "product"

    def __post_init__(self):
        object.__setattr__(self, "parts", _check_parts(self.parts, same_dim=False))

    @property
    def dim(self):
        return sum(p.dim for p in self.parts)

    @property
    def offsets(self) -> list[int]:
        return list(itertools.accumulate([0] + [p.dim for p in self.parts]))

    @property
    def is_convex(self):
        return all(p.is_convex for p in self.parts)

    @property
    def symmetry_center(self):
        cs = [p.symmetry_center for p in self.parts]
        return None if any(c is None for c in cs) else np.concatenate(cs)

    def _blocks(self, X):
        o = self.offsets
        return [(p, X[:, o[i]:o[i + 1]]) for i, p in enumerate(self.parts)]

    def _dist2(self, X):
        return sum(p._dist2(x) for p, x in self._blocks(X))

    def _support(self, X):
        return sum(p._support(x) for p, x in self._blocks(X))

    def bbox(self):
        boxes = [p.bbox() for p in self.parts]
        return np.concatenate([b[0] for b in boxes]), np.concatenate([b[1] for b in boxes])

    def _diameter(self):
        ds = [p._diameter() for p in self.parts]
        return float(math.sqrt(sum(d * d for d, _ in ds))), all(e for _, e in ds)

    def _volume(self):
        return float(np.prod([p._volume() for p in self.parts]))

    def to_dict(self):
        return {"type": "product", "parts": [p.to_dict() for p in self.parts]}


@dataclass(frozen=True, eq=False, repr=False)
class Union(SetSpec):
    parts: tuple
    kind = "union"

    def __post_init__(self):
        object.__setattr__(self, "parts", _check_parts(self.parts, same_dim=True))

    @property
    def dim(self):
        return self.parts[0].dim

    @property
    def is_convex(self):
        return len(self.parts) == 1 and self.parts[0].is_convex

    @property
    def symmetry_center(self):
        return self.parts[0].symmetry_center if len(self.parts) == 1 else None

    def _dist2(self, X):
        return np.minimum.reduce([p._dist2(X) for p in self.parts])

    def _support(self, X):
        return np.maximum.reduce([p._support(X) for p in self.parts])

    def bbox(self):
        boxes = [p.bbox() for p in self.parts]
        return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)

    def _diameter(self):
        if len(self.parts) == 1:
            return self.parts[0]._diameter()
        # bounding balls around bbox centers
        balls = []
        for p in self.parts:
            lo, hi = p.bbox()
            balls.append(((lo + hi) / 2, np.linalg.norm(hi - lo) / 2))
        best = max(2 * r for _, r in balls)
        for (c1, r1), (c2, r2) in itertools.combinations(balls, 2):
            best = max(best, float(np.linalg.norm(c1 - c2)) + r1 + r2)
        return float(best), False

    def to_dict(self):
        return {"type": "union", "parts": [p.to_dict() for p in self.parts]}


def _sumset(point_sets: Sequence[np.ndarray]) -> np.ndarray:
    S = point_sets[0]
    for P in point_sets[1:]:
        S = (S[:, None, :] + P[None, :, :]).reshape(-1, S.shape[1])
    return S


@dataclass(frozen=True, eq=False, repr=False)
class MinkowskiSum(SetSpec):
    """Minkowski sum; distance needs all-finite parts or one ball plus one other part."""

    parts: tuple
    kind = "minkowski_sum"

    def __post_init__(self):
        object.__setattr__(self, "parts", _check_parts(self.parts, same_dim=True))

    @property
    def dim(self):
        return self.parts[0].dim

    @property
    def is_convex(self):
        return all(p.is_convex for p in self.parts)

    @property
    def symmetry_center(self):
        cs = [p.symmetry_center for p in self.parts]
        return None if any(c is None for c in cs) else np.sum(cs, axis=0)

    def _reduced(self) -> SetSpec:
        balls = [p for p in self.parts if isinstance(p, Ball)]
        rest = [p for p in self.parts if not isinstance(p, Ball)]
        if not balls:
            if all(isinstance(p, (FinitePoints, Point)) for p in rest):
                sets = [p.points if isinstance(p, FinitePoints) else p.v[None, :] for p in rest]
                return FinitePoints(_sumset(sets))
            raise UnsupportedComposition("Minkowski sum distance needs finite parts or exactly one ball")
        if len(balls) != 1:
            raise UnsupportedComposition("Minkowski sum distance supports exactly one ball part")
        if not rest:
            return balls[0]
        if len(rest) == 1:
            other = rest[0]
        elif all(isinstance(p, (FinitePoints, Point)) for p in rest):
            other = MinkowskiSum(tuple(rest))._reduced()
        else:
            raise UnsupportedComposition("Minkowski sum of a ball with several non-finite parts")
        return _BallInflation(other, balls[0])

    def _dist2(self, X):
        return self._reduced()._dist2(X)

    def _support(self, X):
        return sum(p._support(X) for p in self.parts)

    def bbox(self):
        boxes = [p.bbox() for p in self.parts]
        return np.sum([b[0] for b in boxes], axis=0), np.sum([b[1] for b in boxes], axis=0)

    def _diameter(self):
        try:
            red = self._reduced()
            if isinstance(red, FinitePoints):
                return red._diameter()
        except UnsupportedComposition:
            pass
        return float(sum(p._diameter()[0] for p in self.parts)), False

    def to_dict(self):
        return {"type": "minkowski_sum", "parts": [p.to_dict() for p in self.parts]}


@dataclass(frozen=True, eq=False, repr=False)
class _BallInflation(SetSpec):
    """A + B(c, r); internal helper behind MinkowskiSum."""

    inner: SetSpec
    ball: Ball
    kind = "ball_inflation"

    @property
    def dim(self):
        return self.inner.dim

    def _dist2(self, X):
        d = np.sqrt(self.inner._dist2(X - self.ball.center))
        return np.maximum(d - self.ball.radius, 0.0) ** 2

    def bbox(self):
        lo, hi = self.inner.bbox()
        return lo + self.ball.center - self.ball.radius, hi + self.ball.center + self.ball.radius

    def to_dict(self):
        return MinkowskiSum((self.inner, self.ball)).to_dict()


# ---------------------------------------------------------------- oracles

def dist(spec: SetSpec, x) -> np.ndarray | float:
    """Euclidean distance from x (one point or a batch of rows) to the set."""
    X, single = _as_batch(spec, x)
    d = np.sqrt(spec._dist2(X))
    return float(d[0]) if single else d


def dist2(spec: SetSpec, x) -> np.ndarray:
    X, _ = _as_batch(spec, x)
    return spec._dist2(X)


def support(spec: SetSpec, x) -> np.ndarray | float:
    """Support function h(x) = sup over theta in the set of <theta, x>."""
    X, single = _as_batch(spec, x)
    h = spec._support(X)
    return float(h[0]) if single else h


def sup_quadratic(spec: SetSpec, x) -> np.ndarray | float:
    """sup_theta [<theta, x> - |theta|^2 / 2] = (|x|^2 - dist^2(x)) / 2."""
    X, single = _as_batch(spec, x)
    v = 0.5 * (np.einsum("ij,ij->i", X, X) - spec._dist2(X))
    return float(v[0]) if single else v


def project(spec: SetSpec, x) -> np.ndarray:
    """Nearest point(s) of a convex spec (and of finite sets, by enumeration)."""
    X, single = _as_batch(spec, x)
    out = _project(spec, X)
    return out[0] if single else out


def _project(spec: SetSpec, X: np.ndarray) -> np.ndarray:
    if isinstance(spec, Point):
        return np.broadcast_to(spec.v, X.shape).copy()
    if isinstance(spec, Ball):
        D = X - spec.center
        r = np.linalg.norm(D, axis=1, keepdims=True)
        f = np.where(r > spec.radius, spec.radius / np.maximum(r, 1e-300), 1.0)
        return spec.center + D * f
    if isinstance(spec, Box):
        return np.clip(X, spec.corner, spec.corner + spec.sides)
    if isinstance(spec, Segment):
        p, q = spec.endpoints
        d = q - p
        dd = float(d @ d)
        t = np.zeros(X.shape[0]) if dd == 0 else np.clip((X - p) @ d / dd, 0.0, 1.0)
        return p + t[:, None] * d
    if isinstance(spec, (Ellipsoid, ConvexHull)):
        return spec.project(X)
    if isinstance(spec, L1Ball):
        return project_l1_ball(X, spec.alpha)
    if isinstance(spec, FinitePoints):
        out = np.empty_like(X)
        for s in range(0, X.shape[0], 4096):
            D = X[s:s + 4096, None, :] - spec.points[None, :, :]
            out[s:s + 4096] = spec.points[np.einsum("ijk,ijk->ij", D, D).argmin(axis=1)]
        return out
    if isinstance(spec, Scale):
        return spec.factor * _project(spec.inner, X / spec.factor)
    if isinstance(spec, Translate):
        return spec.by + _project(spec.inner, X - spec.by)
    if isinstance(spec, Product):
        o = spec.offsets
        return np.concatenate([_project(p, X[:, o[i]:o[i + 1]]) for i, p in enumerate(spec.parts)], axis=1)
    if isinstance(spec, Union):
        feet = np.stack([_project(p, X) for p in spec.parts])
        best = np.einsum("pij,pij->pi", feet - X, feet - X).argmin(axis=0)
        return feet[best, np.arange(X.shape[0])]
    raise UnsupportedComposition(f"no projection oracle for {spec.kind}")


def as_points(spec: SetSpec) -> np.ndarray | None:
    """The (k, n) point array of a finite spec, through scales, translates,
    unions and Minkowski sums of finite parts; None for infinite sets."""
    if isinstance(spec, Point):
        return spec.v[None, :]
    if isinstance(spec, FinitePoints):
        return spec.points
    if isinstance(spec, Scale):
        P = as_points(spec.inner)
        return None if P is None else np.unique(spec.factor * P, axis=0)
    if isinstance(spec, Translate):
        P = as_points(spec.inner)
        return None if P is None else P + spec.by
    if isinstance(spec, (Union, MinkowskiSum)):
        parts = [as_points(p) for p in spec.parts]
        if any(P is None for P in parts):
            return None
        Q = np.vstack(parts) if isinstance(spec, Union) else _sumset(parts)
        # merge points that coincide up to roundoff in the sums
        return np.unique(np.round(Q, 12), axis=0)
    return None


def contains(spec: SetSpec, x, tol: float = 1e-10) -> np.ndarray | bool:
    X, single = _as_batch(spec, x)
    inside = np.sqrt(spec._dist2(X)) <= tol
    return bool(inside[0]) if single else inside


def diameter_bound(spec: SetSpec) -> tuple[float, bool]:
    """(diameter or upper bound, exact flag)."""
    return spec._diameter()


def diameter(spec: SetSpec) -> float:
    return spec._diameter()[0]


def volume(spec: SetSpec) -> float:
    """n-dimensional Lebesgue volume, where a formula is available."""
    return float(spec._volume())


# ---------------------------------------------------------- serialization

def _get(d: dict, key: str, path: str):
    if key not in d:
        raise SpecParseError(f"missing field '{key}'", path)
    return d[key]


def from_dict(d: Any, path: str = "$") -> SetSpec:
    """Build a SetSpec from its JSON document form (``type`` discriminator)."""
    if not isinstance(d, dict):
        raise SpecParseError("expected an object", path)
    kind = d.get("type")
    if kind is None:
        raise SpecParseError("missing field 'type'", path)

    def sub(key):
        return from_dict(_get(d, key, path), f"{path}.{key}")

    def parts():
        ps = _get(d, "parts", path)
        if not isinstance(ps, list) or not ps:
            raise SpecParseError("'parts' must be a non-empty list", f"{path}.parts")
        return tuple(from_dict(p, f"{path}.parts[{i}]") for i, p in enumerate(ps))

    try:
        if kind == "point":
            return Point(_get(d, "coords", path))
        if kind == "finite_points":
            return FinitePoints(_get(d, "points", path))
        if kind == "ball":
            radius = _get(d, "radius", path)
            if "center" in d:
                center = d["center"]
            else:
                center = np.zeros(int(_get(d, "dim", path)))
            return Ball(center, radius)
        if kind == "box":
            sides = _get(d, "sides", path)
            corner = d.get("corner", [0.0] * len(sides))
            return Box(corner, sides)
        if kind == "segment":
            return Segment(_get(d, "endpoints", path))
        if kind == "ellipsoid":
            return Ellipsoid(_get(d, "axes", path), d.get("center"))
        if kind == "l1_ball":
            return L1Ball(_get(d, "alpha", path), _get(d, "dim", path))
        if kind == "convex_hull":
            return ConvexHull(_get(d, "points", path))
        if kind == "scale":
            return Scale(_get(d, "factor", path), sub("inner"))
        if kind == "translate":
            return Translate(_get(d, "by", path), sub("inner"))
        if kind == "product":
            return Product(parts())
        if kind == "union":
            return Union(parts())
        if kind == "minkowski_sum":
            return MinkowskiSum(parts())
    except SpecParseError:
        raise
    except (SetSpecError, TypeError, ValueError) as exc:
        msg = str(exc)
        # attribute the failure to the field the constructor message names
        named = [k for k in d if k != "type" and re.search(rf"\b{k}\b", msg)]
        raise SpecParseError(msg, f"{path}.{named[0]}" if named else path) from exc
    raise SpecParseError(f"unknown set type '{kind}'", f"{path}.type")


def to_dict(spec: SetSpec) -> dict:
    return spec.to_dict()


def _locate(text: str, path: str, message: str = "") -> int | None:
    """Best-effort line number of the field a parse error refers to."""
    # the deepest field in the path is the most specific anchor; words from
    # the message are a fallback for errors attributed to a whole object
    keys = re.findall(r"\.([A-Za-z_]+)", path)[::-1]
    keys += re.findall(r"'([^']+)'", message)
    head = message.split(" ", 1)[0] if message else ""
    if head.isidentifier():
        keys.append(head)
    lines = text.splitlines()
    for key in keys:
        needle = f'"{key}"'
        for i, line in enumerate(lines, 1):
            if needle in line:
                return i
    return None


def loads_spec(text: str) -> SetSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(exc.msg, "$", exc.lineno) from exc
    try:
        return from_dict(doc)
    except SpecParseError as exc:
        if exc.line is None:
            msg = str(exc).split(": ", 1)[-1]
            raise SpecParseError(msg, exc.path, _locate(text, exc.path, msg)) from exc
        raise


def load_spec(path) -> SetSpec:
    with open(path, encoding="utf-8") as fh:
        return loads_spec(fh.read())


def dumps_spec(spec: SetSpec) -> str:
    return json.dumps(spec.to_dict(), sort_keys=True)
