"""Convex bodies: membership, sampling, moments, whitening, certificates.

A body is an intersection of halfspaces plus a bounding ball; the ball is part
of the membership test, so a ball with no halfspaces is a valid body (a disk).
All randomized estimates take an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import DimensionMismatchError, FlatBodyError, InfeasibleBodyError

_EIG_FLOOR = 1e-9


@dataclass(frozen=True)
class AffineMap:
    """x -> matrix @ x + offset, applied row-wise to batches."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.atleast_2d(np.asarray(self.matrix, dtype=float)))
        object.__setattr__(self, "offset", np.atleast_1d(np.asarray(self.offset, dtype=float)))
        if self.matrix.shape[0] != self.offset.shape[0]:
            raise DimensionMismatchError("matrix rows must match offset length")

    @property
    def dim_in(self) -> int:
        return self.matrix.shape[1]

    @property
    def dim_out(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.matrix @ x + self.offset
        return x @ self.matrix.T + self.offset

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """Map equal to self(inner(x))."""
        if inner.dim_out != self.dim_in:
            raise DimensionMismatchError("incompatible composition")
        return AffineMap(self.matrix @ inner.matrix, self.matrix @ inner.offset + self.offset)

    def inverse(self) -> "AffineMap":
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise DimensionMismatchError("only square maps invert")
        inv = np.linalg.inv(self.matrix)
        return AffineMap(inv, -inv @ self.offset)

    @staticmethod
    def identity(n: int) -> "AffineMap":
        return AffineMap(np.eye(n), np.zeros(n))

    @staticmethod
    def translation(offset: np.ndarray) -> "AffineMap":
        offset = np.atleast_1d(np.asarray(offset, dtype=float))
        return AffineMap(np.eye(offset.size), offset)


@dataclass(frozen=True)
class MomentEstimate:
    """Sampled mean and centered covariance with sampling-error scales."""

    mean: np.ndarray
    covariance: np.ndarray
    count: int
    stderr_scale: float  # 1/sqrt(count)

    @property
    def mean_stderr(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None) / self.count)


@dataclass(frozen=True)
class DiameterCertificate:
    """Observed diameter against covariance-based upper bounds.

    ``diam_upper`` is ``2(n+1)·sigma_max``; ``circumradius_upper`` is
    ``(n+1)·sigma_max`` and bounds the farthest boundary point from the mean.
    """

    diam_estimate: float
    diam_upper: float
    circumradius_estimate: float
    circumradius_upper: float
    directions_used: int


class ConvexBody:
    """Halfspace intersection clipped to a bounding ball."""

    def __init__(self, dimension, normals=None, offsets=None, ball_center=None, ball_radius=None):
        self.dimension = int(dimension)
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if normals is None or len(normals) == 0:
            self.normals = np.zeros((0, self.dimension))
            self.offsets = np.zeros(0)
        else:
            normals = np.atleast_2d(np.asarray(normals, dtype=float))
            offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
            if normals.shape[1] != self.dimension:
                raise DimensionMismatchError("halfspace normals have wrong dimension")
            if normals.shape[0] != offsets.shape[0]:
                raise DimensionMismatchError("normals/offsets length mismatch")
            norms = np.linalg.norm(normals, axis=1)
            if np.any(norms < 1e-14):
                raise ValueError("zero halfspace normal")
            self.normals = normals / norms[:, None]
            self.offsets = offsets / norms
        if ball_center is None:
            if self.normals.shape[0] == 0:
                raise ValueError("a body needs halfspaces or a ball")
            center, radius = self._bounding_ball_from_halfspaces()
            self.ball_center = center
            self.ball_radius = radius
            self._ball_given = False
        else:
            self.ball_center = np.atleast_1d(np.asarray(ball_center, dtype=float))
            if self.ball_center.shape[0] != self.dimension:
                raise DimensionMismatchError("ball center has wrong dimension")
            self.ball_radius = float(ball_radius)
            if self.ball_radius <= 0:
                raise ValueError("ball radius must be positive")
            self._ball_given = True
        self._vertices_cache = None

    # -- constructors -------------------------------------------------------

    @staticmethod
    def box(lows, highs) -> "ConvexBody":
        lows = np.atleast_1d(np.asarray(lows, dtype=float))
        highs = np.atleast_1d(np.asarray(highs, dtype=float))
        if lows.shape != highs.shape or np.any(highs <= lows):
            raise ValueError("box needs lows < highs")
        n = lows.size
        eye = np.eye(n)
        normals = np.vstack([eye, -eye])
        offsets = np.concatenate([highs, -lows])
        center = 0.5 * (lows + highs)
        radius = 0.5 * float(np.linalg.norm(highs - lows)) * (1 + 1e-12) + 1e-15
        return ConvexBody(n, normals, offsets, center, radius)

    @staticmethod
    def interval(lo: float, hi: float) -> "ConvexBody":
        return ConvexBody.box([lo], [hi])

    @staticmethod
    def ball(center, radius: float) -> "ConvexBody":
        center = np.atleast_1d(np.asarray(center, dtype=float))
        return ConvexBody(center.size, None, None, center, float(radius))

    @staticmethod
    def regular_polygon(sides: int, radius: float = 1.0, center=(0.0, 0.0)) -> "ConvexBody":
        """2-D regular polygon given by its supporting halfspaces."""
        center = np.asarray(center, dtype=float)
        angles = 2 * np.pi * np.arange(sides) / sides
        normals = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        apothem = radius * math.cos(math.pi / sides)
        offsets = apothem + normals @ center
        return ConvexBody(2, normals, offsets, center, radius * (1 + 1e-12))

    # -- basic predicates ----------------------------------------------------

    def contains(self, points, tol: float = 1e-9):
        """Membership test; accepts a single point or a batch of rows."""
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        pts = np.atleast_2d(points)
        if pts.shape[1] != self.dimension:
            raise DimensionMismatchError("point dimension mismatch")
        ok = np.ones(pts.shape[0], dtype=bool)
        if self.normals.shape[0]:
            ok &= np.all(pts @ self.normals.T <= self.offsets + tol, axis=1)
        ok &= np.linalg.norm(pts - self.ball_center, axis=1) <= self.ball_radius + tol
        return bool(ok[0]) if single else ok

    @property
    def has_halfspaces(self) -> bool:
        return self.normals.shape[0] > 0

    def _bounding_ball_from_halfspaces(self):
        lows, highs = self._axis_bounds_lp()
        center = 0.5 * (lows + highs)
        radius = 0.5 * float(np.linalg.norm(highs - lows)) * (1 + 1e-9) + 1e-15
        return center, radius

    def _axis_bounds_lp(self):
        n = self.dimension
        lows = np.empty(n)
        highs = np.empty(n)
        for i in range(n):
            c = np.zeros(n)
            c[i] = 1.0
            for sign, store in ((1.0, lows), (-1.0, highs)):
                res = linprog(sign * c, A_ub=self.normals, b_ub=self.offsets,
                              bounds=[(None, None)] * n, method="highs")
                if res.status == 3:
                    raise InfeasibleBodyError("halfspace polytope is unbounded")
                if not res.success:
                    raise InfeasibleBodyError("halfspace polytope is empty")
                store[i] = res.x[i]
        return lows, highs

    def bounding_box(self):
        """Axis-aligned bounds (lows, highs) containing the body."""
        ball_lo = self.ball_center - self.ball_radius
        ball_hi = self.ball_center + self.ball_radius
        if not self.has_halfspaces:
            return ball_lo, ball_hi
        lows, highs = self._axis_bounds_lp()
        return np.maximum(lows, ball_lo), np.minimum(highs, ball_hi)

    def interval_bounds(self) -> tuple[float, float]:
        if self.dimension != 1:
            raise DimensionMismatchError("interval_bounds needs dimension 1")
        lo, hi = self.bounding_box()
        return float(lo[0]), float(hi[0])

    # -- inscribed ball ------------------------------------------------------

    def largest_inscribed_ball(self) -> tuple[np.ndarray, float]:
        """Center and radius of a largest inscribed ball (Chebyshev center).

        Exact LP for polytopes; for bodies with an active ball constraint the
        ball is handled by a convex refinement step.
        """
        n = self.dimension
        if not self.has_halfspaces:
            return self.ball_center.copy(), self.ball_radius
        # LP: maximize r subject to a_i . c + r <= b_i (normals are unit rows).
        c_obj = np.zeros(n + 1)
        c_obj[-1] = -1.0
        A = np.hstack([self.normals, np.ones((self.normals.shape[0], 1))])
        res = linprog(c_obj, A_ub=A, b_ub=self.offsets,
                      bounds=[(None, None)] * n + [(0, None)], method="highs")
        if not res.success:
            raise InfeasibleBodyError("body has no inscribed ball (empty polytope)")
        center, radius = res.x[:n], float(res.x[n])
        # Shrink against the bounding ball when it actually cuts the polytope.
        if np.linalg.norm(center - self.ball_center) + radius <= self.ball_radius + 1e-9:
            return center, radius

        def neg_r(z):
            return -z[n]

        cons = [{"type": "ineq",
                 "fun": lambda z, a=self.normals[i], b=self.offsets[i]: b - a @ z[:n] - z[n]}
                for i in range(self.normals.shape[0])]
        cons.append({"type": "ineq",
                     "fun": lambda z: (self.ball_radius - z[n])
                     - np.linalg.norm(z[:n] - self.ball_center)})
        start = np.concatenate([np.clip(center, self.ball_center - 0.5 * self.ball_radius,
                                        self.ball_center + 0.5 * self.ball_radius), [0.0]])
        sol = minimize(neg_r, start, method="SLSQP", constraints=cons,
                       options={"maxiter": 200, "ftol": 1e-12})
        if not sol.success or sol.x[n] <= 0:
            raise InfeasibleBodyError("no inscribed ball found inside ball constraint")
        return sol.x[:n], float(sol.x[n])

    # -- support function ----------------------------------------------------

    def support_point(self, direction) -> tuple[float, np.ndarray]:
        """sup over the body of <direction, x> together with a maximizer."""
        d = np.atleast_1d(np.asarray(direction, dtype=float))
        if d.shape[0] != self.dimension:
            raise DimensionMismatchError("direction dimension mismatch")
        nd = np.linalg.norm(d)
        if nd < 1e-14:
            raise ValueError("zero direction")
        if not self.has_halfspaces:
            point = self.ball_center + self.ball_radius * d / nd
            return float(d @ point), point
        lo = self.ball_center - self.ball_radius
        hi = self.ball_center + self.ball_radius
        res = linprog(-d, A_ub=self.normals, b_ub=self.offsets,
                      bounds=list(zip(lo, hi)), method="highs")
        if not res.success:
            raise InfeasibleBodyError("support LP infeasible")
        x = res.x
        if np.linalg.norm(x - self.ball_center) <= self.ball_radius + 1e-9:
            return float(d @ x), x
        # The bounding ball is active: polish inside the true feasible set.
        cons = [{"type": "ineq",
                 "fun": lambda z, a=self.normals[i], b=self.offsets[i]: b - a @ z}
                for i in range(self.normals.shape[0])]
        cons.append({"type": "ineq",
                     "fun": lambda z: self.ball_radius ** 2
                     - float((z - self.ball_center) @ (z - self.ball_center))})
        start = self.ball_center + (x - self.ball_center) * (
            self.ball_radius / max(np.linalg.norm(x - self.ball_center), 1e-12)) * (1 - 1e-9)
        if not self.contains(start, tol=1e-7):
            start, _ = self.largest_inscribed_ball()
        sol = minimize(lambda z: -float(d @ z), start, method="SLSQP",
                       constraints=cons, options={"maxiter": 200, "ftol": 1e-12})
        x = sol.x if sol.success else start
        return float(d @ x), x

    def support_function(self, direction) -> float:
        return self.support_point(direction)[0]

    # -- 2-D vertex enumeration ---------------------------------------------

    def vertices(self) -> np.ndarray:
        """Vertices of a 2-D polytope (requires a redundant bounding ball)."""
        if self.dimension != 2:
            raise DimensionMismatchError("vertex enumeration implemented for 2-D")
        if not self.has_halfspaces:
            raise ValueError("a pure ball has no vertices")
        if self._vertices_cache is not None:
            return self._vertices_cache
        A, b = self.normals, self.offsets
        m = A.shape[0]
        pts = []
        for i in range(m):
            for j in range(i + 1, m):
                M = np.stack([A[i], A[j]])
                det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
                if abs(det) < 1e-12:
                    continue
                p = np.linalg.solve(M, np.array([b[i], b[j]]))
                if np.all(A @ p <= b + 1e-7):
                    pts.append(p)
        if not pts:
            raise InfeasibleBodyError("no vertices: polytope empty or degenerate")
        pts = np.array(pts)
        if np.any(np.linalg.norm(pts - self.ball_center, axis=1) > self.ball_radius + 1e-6):
            raise ValueError("bounding ball cuts the polytope; vertices unavailable")
        # Dedupe and order by angle around the centroid.
        centroid = pts.mean(axis=0)
        order = np.argsort(np.arctan2(pts[:, 1] - centroid[1], pts[:, 0] - centroid[0]))
        pts = pts[order]
        keep = [0]
        for k in range(1, len(pts)):
            if np.linalg.norm(pts[k] - pts[keep[-1]]) > 1e-9:
                keep.append(k)
        if len(keep) > 1 and np.linalg.norm(pts[keep[-1]] - pts[keep[0]]) <= 1e-9:
            keep.pop()
        self._vertices_cache = pts[keep]
        return self._vertices_cache

    def ball_is_redundant(self) -> bool:
        """True when the halfspaces alone already define the body."""
        if not self.has_halfspaces:
            return False
        if self.dimension == 2:
            try:
                verts = self.vertices()
            except ValueError:
                return False
            return bool(np.all(np.linalg.norm(verts - self.ball_center, axis=1)
                               <= self.ball_radius + 1e-6))
        box = self._is_box()
        if box is None:
            try:
                box = self._axis_bounds_lp()  # box containing the polytope
            except InfeasibleBodyError:
                return False
        lows, highs = box
        corners = np.stack(np.meshgrid(*zip(lows, highs), indexing="ij"), axis=-1)
        corners = corners.reshape(-1, self.dimension)
        return bool(np.all(np.linalg.norm(corners - self.ball_center, axis=1)
                           <= self.ball_radius + 1e-6))

    def _is_box(self):
        """Per-axis (lows, highs) when every normal is +-e_i, else None."""
        if not self.has_halfspaces:
            return None
        n = self.dimension
        lows = np.full(n, -np.inf)
        highs = np.full(n, np.inf)
        for a, b in zip(self.normals, self.offsets):
            axis = np.argmax(np.abs(a))
            rest = np.abs(a).sum() - abs(a[axis])
            if rest > 1e-12 or abs(abs(a[axis]) - 1.0) > 1e-12:
                return None
            if a[axis] > 0:
                highs[axis] = min(highs[axis], b)
            else:
                lows[axis] = max(lows[axis], -b)
        if np.any(~np.isfinite(lows)) or np.any(~np.isfinite(highs)):
            return None
        if np.any(highs <= lows):
            return None
        return lows, highs

    # -- chords and sampling ----------------------------------------------------

    def chord_bounds(self, points: np.ndarray, directions: np.ndarray):
        """Parameter range [t_lo, t_hi] with points + t*direction inside the body.

        ``points`` is (m, n); ``directions`` is a shared unit vector (n,) or
        per-row unit vectors (m, n). Infeasible points yield empty (clipped to
        zero-length) ranges at t = 0.
        """
        X = np.atleast_2d(np.asarray(points, dtype=float))
        D = np.asarray(directions, dtype=float)
        if D.ndim == 1:
            D = np.broadcast_to(D, X.shape)
        m = X.shape[0]
        t_lo = np.full(m, -np.inf)
        t_hi = np.full(m, np.inf)
        if self.has_halfspaces:
            ad = D @ self.normals.T
            slack = self.offsets[None, :] - X @ self.normals.T
            pos = ad > 1e-14
            neg = ad < -1e-14
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = slack / ad
            t_hi = np.minimum(t_hi, np.where(pos, ratios, np.inf).min(axis=1))
            t_lo = np.maximum(t_lo, np.where(neg, ratios, -np.inf).max(axis=1))
        diff = X - self.ball_center
        mid = np.einsum("ij,ij->i", D, diff)
        disc = np.clip(mid ** 2 - (np.einsum("ij,ij->i", diff, diff)
                                   - self.ball_radius ** 2), 0.0, None)
        root = np.sqrt(disc)
        t_lo = np.maximum(t_lo, -mid - root)
        t_hi = np.minimum(t_hi, -mid + root)
        return np.minimum(t_lo, t_hi), t_hi

    def sample_uniform(self, m: int, rng: np.random.Generator,
                       burn_in: int | None = None, thinning: int | None = None) -> np.ndarray:
        """m (approximately) uniform points, shape (m, n).

        Boxes, intervals, and balls are sampled exactly; other bodies use
        multi-chain hit-and-run with burn-in 50n and thinning n.
        """
        if m <= 0:
            raise ValueError("m must be positive")
        n = self.dimension
        box = self._is_box()
        if box is not None and self.ball_is_redundant():
            lows, highs = box
            return rng.uniform(lows, highs, size=(m, n))
        if not self.has_halfspaces:
            u = rng.standard_normal((m, n))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            radii = self.ball_radius * rng.uniform(0.0, 1.0, m) ** (1.0 / n)
            return self.ball_center + u * radii[:, None]
        return self._hit_and_run(m, rng,
                                 burn_in if burn_in is not None else 50 * n,
                                 thinning if thinning is not None else n)

    def _hit_and_run(self, m, rng, burn_in, thinning):
        n = self.dimension
        try:
            start, radius = self.largest_inscribed_ball()
        except InfeasibleBodyError:
            raise
        if radius < 1e-12:
            warnings.warn("body has empty interior; sampling along its flat subspace")
        if not self.contains(start, tol=1e-7):
            raise InfeasibleBodyError("no feasible starting point for hit-and-run")
        chains = min(m, 64)
        X = np.tile(start, (chains, 1))
        per_chain = math.ceil(m / chains)
        out = np.empty((chains * per_chain, n))
        filled = 0
        total_steps = burn_in + per_chain * thinning
        for step in range(total_steps):
            D = rng.standard_normal((chains, n))
            D /= np.linalg.norm(D, axis=1, keepdims=True)
            t_lo, t_hi = self.chord_bounds(X, D)
            t_lo = np.minimum(t_lo, 0.0)
            t_hi = np.maximum(t_hi, 0.0)
            X = X + (t_lo + (t_hi - t_lo) * rng.uniform(size=chains))[:, None] * D
            if step >= burn_in and (step - burn_in) % thinning == thinning - 1:
                out[filled:filled + chains] = X
                filled += chains
        return out[rng.permutation(filled)[:m]]

    # -- moments and whitening -------------------------------------------------

    def estimate_moments(self, m: int, rng: np.random.Generator) -> MomentEstimate:
        """Sampled mean and centered covariance; requires m >= 100 n^2."""
        n = self.dimension
        if m < 100 * n * n:
            raise ValueError(f"need at least {100 * n * n} samples for dimension {n}")
        samples = self.sample_uniform(m, rng)
        mean = samples.mean(axis=0)
        cov = np.cov(samples, rowvar=False, ddof=1).reshape(n, n)
        eigs = np.linalg.eigvalsh(cov)
        if eigs[0] < _EIG_FLOOR * max(eigs[-1], _EIG_FLOOR):
            raise FlatBodyError(
                f"covariance nearly singular (eigenvalues {eigs.min():.3e}..{eigs.max():.3e})")
        return MomentEstimate(mean, cov, m, 1.0 / math.sqrt(m))


def whitening_map(moments: MomentEstimate) -> AffineMap:
    """Symmetric inverse square root of the covariance, centering the image.

    Eigenvalues are floored at 1e-9 (with a warning) so the map stays finite
    on nearly flat bodies.
    """
    lam, vec = np.linalg.eigh(moments.covariance)
    if np.any(lam < _EIG_FLOOR):
        warnings.warn("covariance eigenvalue floored at 1e-9 in whitening_map")
    lam = np.clip(lam, _EIG_FLOOR, None)
    q = (vec * (1.0 / np.sqrt(lam))) @ vec.T
    return AffineMap(q, -q @ moments.mean)


def slab(body: ConvexBody, theta, half_width: float = 0.25, center=None) -> ConvexBody:
    """body intersected with {x : |<theta, x - center>| <= half_width}."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    nt = np.linalg.norm(theta)
    if nt < 1e-14:
        raise ValueError("zero slab direction")
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    theta = theta / nt
    shift = 0.0 if center is None else float(theta @ np.asarray(center, dtype=float))
    normals = np.vstack([body.normals, theta, -theta])
    offsets = np.concatenate([body.offsets, [half_width + shift, half_width - shift]])
    return ConvexBody(body.dimension, normals, offsets, body.ball_center, body.ball_radius)


def affine_image(body: ConvexBody, amap: AffineMap) -> ConvexBody:
    """Image of a polytope under an invertible affine map.

    Requires the bounding ball to be redundant: the transformed ball is only a
    certificate, so an active ball would change the body.
    """
    if amap.dim_in != body.dimension or amap.dim_out != body.dimension:
        raise DimensionMismatchError("affine_image needs a square map of matching dimension")
    if not body.has_halfspaces or not body.ball_is_redundant():
        raise ValueError("affine_image requires halfspaces with a redundant bounding ball")
    minv = np.linalg.inv(amap.matrix)
    normals = body.normals @ minv
    offsets = body.offsets + normals @ amap.offset
    center = amap(body.ball_center)
    radius = body.ball_radius * float(np.linalg.norm(amap.matrix, 2)) * (1 + 1e-12)
    return ConvexBody(body.dimension, normals, offsets, center, radius)


def diameter_certificates(body: ConvexBody, moments: MomentEstimate,
                          directions: int = 128,
                          rng: np.random.Generator | None = None) -> DiameterCertificate:
    """Boundary-based diameter estimate checked against covariance bounds.

    Support points are collected over a direction net; the estimate is the
    maximum pairwise distance. The certified bounds are the circumradius form
    ``(n+1)·sigma_max`` about the mean and the diameter form twice that.
    Raises ``RuntimeError`` when the observed diameter exceeds the bound
    beyond sampling slack.
    """
    n = body.dimension
    if n == 1:
        lo, hi = body.interval_bounds()
        dirs = np.array([[1.0], [-1.0]])
        pts = np.array([[hi], [lo]])
    elif n == 2:
        ang = np.linspace(0.0, 2 * np.pi, directions, endpoint=False)
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        pts = np.array([body.support_point(d)[1] for d in dirs])
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        dirs = rng.standard_normal((directions, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        dirs = np.vstack([dirs, np.eye(n), -np.eye(n)])
        pts = np.array([body.support_point(d)[1] for d in dirs])
    diff = pts[:, None, :] - pts[None, :, :]
    diam = float(np.sqrt((diff ** 2).sum(axis=2)).max())
    sigma_max = float(np.sqrt(max(np.linalg.eigvalsh(moments.covariance).max(), 0.0)))
    circ_upper = (n + 1) * sigma_max
    diam_upper = 2.0 * circ_upper
    circ_est = float(np.linalg.norm(pts - moments.mean, axis=1).max())
    slackf = 1.0 + 5.0 * moments.stderr_scale
    if diam > diam_upper * slackf:
        raise RuntimeError(
            f"diameter {diam:.6g} exceeds covariance bound {diam_upper:.6g}")
    return DiameterCertificate(diam, diam_upper, circ_est, circ_upper, len(dirs))


def volume_ratio(inner: ConvexBody, outer: ConvexBody, m: int,
                 rng: np.random.Generator) -> tuple[float, float, float]:
    """Vol(inner)/Vol(outer) for inner contained in outer, with a Wilson CI.

    Containment is spot-checked on samples from ``inner``.
    """
    if inner.dimension != outer.dimension:
        raise DimensionMismatchError("bodies live in different dimensions")
    if m <= 0:
        raise ValueError("m must be positive")
    check = inner.sample_uniform(min(m, 256), rng)
    if not np.all(outer.contains(check, tol=1e-7)):
        raise ValueError("inner body is not contained in outer body")
    samples = outer.sample_uniform(m, rng)
    hits = int(inner.contains(samples).sum())
    low, high = _wilson(hits, m)
    return hits / m, low, high


def thinnest_slab(body: ConvexBody, direction_count: int = 512) -> tuple[np.ndarray, float]:
    """Direction minimizing max |<u, x>| over the body, with that half-width.

    The slab is centered at the origin, which must belong to the body for the
    result to certify a two-sided width.
    """
    n = body.dimension
    if n == 1:
        lo, hi = body.interval_bounds()
        return np.array([1.0]), max(abs(lo), abs(hi))
    if n == 2 and body.has_halfspaces and body.ball_is_redundant():
        verts = body.vertices()
        ang = np.linspace(0.0, np.pi, direction_count, endpoint=False)
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        widths = np.abs(verts @ dirs.T).max(axis=0)
        k = int(np.argmin(widths))
        return dirs[k], float(widths[k])
    rng = np.random.default_rng(12345)
    dirs = rng.standard_normal((direction_count, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    best_dir, best = None, np.inf
    for d in dirs:
        w = max(body.support_function(d), body.support_function(-d))
        if w < best:
            best, best_dir = w, d
    return best_dir, float(best)


def _wilson(successes: int, total: int, z: float = 1.96) -> tuple[float, float]:
    from .stats import wilson_interval

    return wilson_interval(successes, total, z)
