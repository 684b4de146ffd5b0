"""Exploration measures and their one-dimensional construction.

A measure is a finite mixture with exact rational weights. Components are
point masses, uniform segments, uniform balls, affine pushforwards, and fiber
lifts of a lower-dimensional measure. Atoms are always integrated exactly in
event probabilities; only the continuous part is sampled.

The 1-D builder places dyadic windows around the minimizer: with domain
diameter d and scale count N = ceil(log2(1/eps)) + 4 it mixes the uniform
measures on [x0 - d 2^-k, x0 + d 2^-k] (clipped to the domain, k = 0..N) and a
point mass at x0, all with weight 1/(N+2). The guarantee verified downstream:
any convex g dipping below -eps somewhere gets caught by a relative gap event
with probability at least 1/(8 ln(1 + 1/eps)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .convexfn import MaxAffineFunction, argmin
from .errors import DimensionMismatchError
from .geometry import AffineMap, ConvexBody
from .stats import wilson_interval


@dataclass(frozen=True)
class PointMass:
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", np.atleast_1d(np.asarray(self.point, dtype=float)))

    @property
    def dimension(self) -> int:
        return self.point.size


@dataclass(frozen=True)
class UniformSegment:
    """Uniform measure on the 1-D interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError("segment needs lo <= hi")

    @property
    def dimension(self) -> int:
        return 1

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class UniformBall:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def dimension(self) -> int:
        return self.center.size


@dataclass(frozen=True)
class Pushforward:
    """Image of an inner measure under an affine map."""

    map: AffineMap
    inner: "ExplorationMeasure"

    @property
    def dimension(self) -> int:
        return self.map.dim_out


@dataclass(frozen=True)
class FiberLift:
    """Lift of a base measure on R^(n-1) along a direction through a host body.

    A base draw u maps to the segment
    {anchor + frame @ u + w * direction : w real} intersected with the host,
    and the lift samples uniformly on that segment. Zero-length fibers trigger
    a base re-draw, up to ``budget`` rounds.
    """

    base: "ExplorationMeasure"
    anchor: np.ndarray
    frame: np.ndarray        # (n, n-1), orthonormal columns spanning direction^perp
    direction: np.ndarray    # unit vector
    host: ConvexBody
    budget: int = 16

    def __post_init__(self):
        object.__setattr__(self, "anchor", np.atleast_1d(np.asarray(self.anchor, dtype=float)))
        object.__setattr__(self, "frame", np.atleast_2d(np.asarray(self.frame, dtype=float)))
        d = np.atleast_1d(np.asarray(self.direction, dtype=float))
        object.__setattr__(self, "direction", d / np.linalg.norm(d))

    @property
    def dimension(self) -> int:
        return self.host.dimension


Component = PointMass | UniformSegment | UniformBall | Pushforward | FiberLift


class ExplorationMeasure:
    """Finite mixture of components with exact Fraction weights summing to 1."""

    def __init__(self, weights, components):
        ws = tuple(Fraction(w) if not isinstance(w, Fraction) else w for w in weights)
        if len(ws) != len(components) or not components:
            raise ValueError("weights/components mismatch or empty measure")
        if any(w < 0 for w in ws):
            raise ValueError("weights must be nonnegative")
        if sum(ws) != 1:
            raise ValueError(f"weights must sum to 1 exactly, got {sum(ws)}")
        dims = {c.dimension for c in components}
        if len(dims) != 1:
            raise DimensionMismatchError("components live in different dimensions")
        self.weights = ws
        self.components = tuple(components)
        self.dimension = dims.pop()

    @staticmethod
    def equal_mixture(components) -> "ExplorationMeasure":
        k = len(components)
        return ExplorationMeasure([Fraction(1, k)] * k, components)

    # -- structure ---------------------------------------------------------

    def flatten(self):
        """(weight, leaf) pairs with mixtures and atom pushforwards resolved.

        Leaves are (kind, payload) tuples: ("atom", point) for exactly
        integrable mass, ("cont", (component, affine_or_None)) otherwise.
        """
        out = []
        self._flatten_into(out, Fraction(1), None)
        return out

    def _flatten_into(self, out, scale, outer_map):
        for w, comp in zip(self.weights, self.components):
            if w == 0:
                continue
            weight = scale * w
            if isinstance(comp, PointMass):
                p = comp.point if outer_map is None else outer_map(comp.point)
                out.append((weight, ("atom", p)))
            elif isinstance(comp, Pushforward):
                amap = comp.map if outer_map is None else outer_map.compose(comp.map)
                comp.inner._flatten_into(out, weight, amap)
            else:
                out.append((weight, ("cont", (comp, outer_map))))

    # -- sampling ------------------------------------------------------------

    def sample(self, m: int, rng: np.random.Generator) -> np.ndarray:
        """m independent draws, shape (m, dimension)."""
        if m <= 0:
            raise ValueError("m must be positive")
        leaves = self.flatten()
        probs = np.array([float(w) for w, _ in leaves])
        probs /= probs.sum()
        counts = rng.multinomial(m, probs)
        blocks = []
        for (w, leaf), k in zip(leaves, counts):
            if k == 0:
                continue
            kind, payload = leaf
            if kind == "atom":
                blocks.append(np.tile(payload, (k, 1)))
            else:
                comp, amap = payload
                pts = _sample_component(comp, k, rng)
                blocks.append(pts if amap is None else amap(pts))
        pts = np.vstack(blocks)
        return pts[rng.permutation(pts.shape[0])]

    # -- integration -----------------------------------------------------------

    def event_probability(self, predicate, m: int,
                          rng: np.random.Generator) -> tuple[float, float, float]:
        """P(event) with atoms exact and a Wilson interval on the sampled part.

        ``predicate`` maps an (m, n) batch to a boolean vector.
        """
        leaves = self.flatten()
        atom_true = 0.0
        cont = []
        for w, (kind, payload) in leaves:
            if kind == "atom":
                if bool(predicate(np.atleast_2d(payload))[0]):
                    atom_true += float(w)
            else:
                cont.append((float(w), payload))
        cont_weight = sum(w for w, _ in cont)
        if cont_weight < 1e-15:
            return atom_true, atom_true, atom_true
        probs = np.array([w for w, _ in cont]) / cont_weight
        counts = rng.multinomial(m, probs)
        hits = 0
        for (w, (comp, amap)), k in zip(cont, counts):
            if k == 0:
                continue
            pts = _sample_component(comp, k, rng)
            if amap is not None:
                pts = amap(pts)
            hits += int(predicate(pts).sum())
        low, high = wilson_interval(hits, m)
        return (atom_true + cont_weight * hits / m,
                atom_true + cont_weight * low,
                atom_true + cont_weight * high)


def _sample_component(comp, m: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(comp, UniformSegment):
        return (comp.lo + (comp.hi - comp.lo) * rng.uniform(size=m))[:, None]
    if isinstance(comp, UniformBall):
        n = comp.dimension
        u = rng.standard_normal((m, n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        return comp.center + u * (comp.radius * rng.uniform(0.0, 1.0, m) ** (1.0 / n))[:, None]
    if isinstance(comp, Pushforward):
        return comp.map(comp.inner.sample(m, rng))
    if isinstance(comp, FiberLift):
        return _sample_fiber_lift(comp, m, rng)
    if isinstance(comp, PointMass):
        return np.tile(comp.point, (m, 1))
    raise TypeError(f"unknown component {type(comp).__name__}")


def _sample_fiber_lift(lift: FiberLift, m: int, rng: np.random.Generator) -> np.ndarray:
    need = np.arange(m)
    out = np.empty((m, lift.host.dimension))
    for _ in range(lift.budget):
        u = lift.base.sample(need.size, rng)
        anchors = lift.anchor + u @ lift.frame.T
        t_lo, t_hi = lift.host.chord_bounds(anchors, lift.direction)
        ok = (t_hi - t_lo) > 1e-12
        if ok.any():
            w = t_lo[ok] + (t_hi[ok] - t_lo[ok]) * rng.uniform(size=int(ok.sum()))
            out[need[ok]] = anchors[ok] + w[:, None] * lift.direction
        need = need[~ok]
        if need.size == 0:
            return out
    raise RuntimeError(f"zero-length fiber persisted for {need.size} draws "
                       f"after {lift.budget} re-draw rounds")


@dataclass(frozen=True)
class VerificationReport:
    """Monte Carlo event-probability report against a threshold."""

    p_hat: float
    ci_low: float
    ci_high: float
    threshold: float
    samples: int
    passed: bool
    atom_mass: float = 0.0
    detail: dict = field(default_factory=dict)


def dyadic_measure_1d(domain: ConvexBody, x0: float,
                      eps: float) -> ExplorationMeasure:
    """Dyadic segments shrinking toward x0, plus an atom at x0.

    The core of the 1-D construction; x0 is the minimizer of whichever
    function the measure is meant to explore.
    """
    if domain.dimension != 1:
        raise DimensionMismatchError("dyadic_measure_1d needs a 1-D domain")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    lo, hi = domain.interval_bounds()
    d = hi - lo
    if d <= 0:
        raise ValueError("domain has no length")
    if not lo - 1e-9 <= x0 <= hi + 1e-9:
        raise ValueError("x0 lies outside the domain")
    x0 = min(max(x0, lo), hi)
    n_scales = math.ceil(math.log2(1.0 / eps)) + 4
    weight = Fraction(1, n_scales + 2)
    comps: list[Component] = []
    for k in range(n_scales + 1):
        half = d * 2.0 ** (-k)
        comps.append(UniformSegment(max(lo, x0 - half), min(hi, x0 + half)))
    comps.append(PointMass(np.array([x0])))
    return ExplorationMeasure([weight] * (n_scales + 2), comps)


def build_measure_1d(domain: ConvexBody, f: MaxAffineFunction,
                     eps: float) -> ExplorationMeasure:
    """Dyadic exploration measure on a 1-D domain for the function f."""
    if domain.dimension != 1 or f.dimension != 1:
        raise DimensionMismatchError("build_measure_1d needs a 1-D domain and function")
    x0 = float(argmin(f, domain)[0])
    return dyadic_measure_1d(domain, x0, eps)


def guarantee_threshold_1d(eps: float) -> float:
    """Mass guaranteed on the dyadic measure's separation event.

    Any convex g that stays eps-far below some admissible f somewhere forces
    mu(|f - g| > eps/8) >= 1 / (8 ln(1 + 1/eps)).
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    return 1.0 / (8.0 * math.log(1.0 + 1.0 / eps))


def event_probability(mu: ExplorationMeasure, predicate, m: int,
                      rng: np.random.Generator) -> tuple[float, float, float]:
    """Module-level alias for ExplorationMeasure.event_probability."""
    return mu.event_probability(predicate, m, rng)


def verify_exploration(mu: ExplorationMeasure, f: MaxAffineFunction,
                       g: MaxAffineFunction, eps: float, gap_constant: float,
                       prob_threshold: float, m: int, rng: np.random.Generator,
                       gap_scaling: str = "max",
                       witness=None) -> VerificationReport:
    """Estimate the mass of {|f - g| > gap} and compare to a threshold.

    The gap is ``gap_constant * max(eps, f(x))`` by default, or the absolute
    ``gap_constant * eps`` with ``gap_scaling="eps"`` (the sharper form used by
    the 1-D guarantee). ``witness`` optionally asserts g(witness) < -eps.
    """
    if gap_scaling not in ("max", "eps"):
        raise ValueError("gap_scaling must be 'max' or 'eps'")
    if witness is not None:
        w = np.atleast_1d(np.asarray(witness, dtype=float))
        if f.value(w) < -1e-9:
            raise ValueError("witness check failed: f must be nonnegative")
        if not g.value(w) < -eps:
            raise ValueError(f"witness check failed: g({w}) = {g.value(w):.6g} >= -eps")

    def event(pts):
        fv = np.atleast_1d(f.value(pts))
        gv = np.atleast_1d(g.value(pts))
        scale = np.maximum(eps, fv) if gap_scaling == "max" else eps
        return np.abs(fv - gv) > gap_constant * scale

    p, low, high = mu.event_probability(event, m, rng)
    atom_mass = sum(float(w) for w, (kind, payload) in mu.flatten()
                    if kind == "atom" and bool(event(np.atleast_2d(payload))[0]))
    return VerificationReport(p, low, high, prob_threshold, m,
                              passed=low > prob_threshold, atom_mass=atom_mass,
                              detail={"gap_constant": gap_constant,
                                      "gap_scaling": gap_scaling, "eps": eps})


def segment_gap_check(f: MaxAffineFunction, g: MaxAffineFunction, x0: float,
                      alpha: float, mu: ExplorationMeasure, beta: float,
                      eps: float, m: int, rng: np.random.Generator,
                      grid: int = 2048) -> VerificationReport:
    """Check the half-mass gap event for a density-bounded measure on [x0, alpha].

    Preconditions enforced: 0 < alpha - x0 <= 1, beta >= 1, the measure is a
    mixture of segments inside [x0, alpha] with pointwise density <= beta,
    f >= 0 and nondecreasing right of x0, and g(alpha) < -eps. The event is
    {|f - g| > (1/4) beta^-1 max(eps, f(x))} with threshold 1/2.
    """
    if beta < 1.0:
        raise ValueError("beta must be >= 1")
    gap_len = alpha - x0
    if not 0 < gap_len <= 1 + 1e-12:
        raise ValueError("need 0 < alpha - x0 <= 1")
    if not g.value(np.array([alpha])) < -eps:
        raise ValueError("need g(alpha) < -eps")
    xs = np.linspace(x0, alpha, grid)[:, None]
    fv = f.value(xs)
    if fv.min() < -1e-9:
        raise ValueError("f must be nonnegative on [x0, alpha]")
    if f.subgradients(xs).min() < -1e-9:
        raise ValueError("f must be nondecreasing right of x0")
    dens = np.zeros(grid)
    for w, (kind, payload) in mu.flatten():
        if kind == "atom":
            if w > 0:
                raise ValueError("atoms have unbounded density; segment mixture required")
            continue
        comp, amap = payload
        if not isinstance(comp, UniformSegment) or amap is not None:
            raise ValueError("segment_gap_check requires a plain segment mixture")
        if comp.lo < x0 - 1e-9 or comp.hi > alpha + 1e-9:
            raise ValueError("measure support leaves [x0, alpha]")
        if comp.length <= 0:
            raise ValueError("zero-length segment has unbounded density")
        inside = (xs[:, 0] >= comp.lo - 1e-12) & (xs[:, 0] <= comp.hi + 1e-12)
        dens[inside] += float(w) / comp.length
    if dens.max() > beta * (1 + 1e-6):
        raise ValueError(f"density {dens.max():.4g} exceeds beta = {beta:.4g}")

    def event(pts):
        fv = np.atleast_1d(f.value(pts))
        gv = np.atleast_1d(g.value(pts))
        return np.abs(fv - gv) > 0.25 / beta * np.maximum(eps, fv)

    p, low, high = mu.event_probability(event, m, rng)
    return VerificationReport(p, low, high, 0.5, m, passed=low > 0.5,
                              detail={"beta": beta, "eps": eps, "x0": x0,
                                      "alpha": alpha})
