"""Exploration measures in dimension two and above.

The construction runs in three layers:

* a single scale: whiten the body, cover the sphere of directions with
  stable-gradient patches (plus separating directions where the body is
  thin), reduce the cover to at most n+1 patches through a minimum-norm
  point, and cut the body along the thinnest direction of the resulting
  polytope;
* the multi-scale loop: repeat single scales, tracking frames, until the
  remaining body fits inside a slab of the stop width;
* dimension induction: mix the multi-scale measure with a lift of a
  recursively built (n-1)-dimensional measure living on the projection of
  the final slab.

All randomness flows through an explicit generator; constants come from a
named profile so conservative and measurable regimes share one code path.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .convexfn import MaxAffineFunction, argmin, smoothed_gradient
from .errors import CoverError, DimensionMismatchError, PatchNotFoundError
from .explore1d import (ExplorationMeasure, FiberLift, Pushforward,
                        UniformBall, build_measure_1d)
from .geometry import (AffineMap, ConvexBody, affine_image, slab,
                       thinnest_slab, volume_ratio, whitening_map)
from .minnorm import caratheodory_prune, min_norm_point
from .profiles import CALIBRATED, ConstantProfile
from .stats import wilson_half_width


@dataclass(frozen=True)
class PipelineParams:
    """Sampling budgets and structural limits for the construction."""

    phi_count: int = 48          # directions probed per unit sphere (2-D)
    patch_attempts: int = 24     # candidate centres tried per placement ball
    grad_samples: int = 160      # draws per smoothed gradient
    patch_samples: int = 768     # draws per patch verification
    moment_samples: int = 2500   # draws per covariance estimate
    volume_samples: int = 3000   # draws per volume-ratio check
    cover_samples: int = 4096    # sphere draws per cover verification
    xi_relax_rounds: int = 1     # doublings of xi allowed when patches fail
    max_dimension: int = 3


@dataclass(frozen=True)
class StableGradientPatch:
    """Ball on which subgradients concentrate around a common direction.

    ``fraction`` of ``sample_count`` subgradients sampled on B(center, radius)
    landed within ``xi * scale`` of ``scale * direction``; acceptance demands
    fraction >= 1/2 + 3 Wilson half-widths.
    """

    center: np.ndarray
    direction: np.ndarray
    scale: float
    radius: float
    fraction: float
    sample_count: int
    xi: float
    relaxed: bool = False


@dataclass(frozen=True)
class GammaCover:
    """Accepted patches plus separating directions, before reduction."""

    dimension: int
    gamma: float
    patches: tuple
    separators: tuple
    failures: int


@dataclass(frozen=True)
class CoverCheck:
    ok: bool
    worst_value: float
    worst_direction: np.ndarray
    samples: int


@dataclass(frozen=True)
class ReducedCover:
    patches: tuple            # at most n+1 members
    separators: tuple
    hull_point: np.ndarray
    hull_norm: float
    check: CoverCheck


@dataclass
class StageRecord:
    index: int
    whiten: np.ndarray          # work frame -> whitened frame
    unwhiten: np.ndarray
    function: MaxAffineFunction  # objective in the whitened frame
    width_before: float
    patches: tuple              # reduced patches, whitened frame
    separator_count: int
    raw_patch_count: int
    failures: int
    hull_norm: float
    inscribed_radius: float
    slab_direction: np.ndarray  # whitened frame
    slab_halfwidth: float
    volume: tuple               # (ratio, ci_low, ci_high) of the kept slab


@dataclass
class MultiScaleResult:
    measure: ExplorationMeasure
    stages: list
    direction: np.ndarray       # input frame (translations preserve directions)
    base_point: np.ndarray      # minimiser in the input frame
    final_halfwidth: float
    capped: bool
    profile: str
    eta: float


@dataclass
class BuildReport:
    dimension: int
    profile: str
    direction: np.ndarray | None = None    # whitened frame
    base_point: np.ndarray | None = None   # whitened frame
    slab_halfwidth: float = 0.0
    stages: list = field(default_factory=list)
    capped: bool = False
    child: "BuildReport | None" = None


def _unit_net(n: int, count: int) -> np.ndarray:
    """Deterministic, roughly uniform direction net on the unit sphere."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        ang = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if n == 3:
        m = 2 * count
        k = np.arange(m) + 0.5
        phi = np.arccos(1.0 - 2.0 * k / m)
        theta = np.pi * (1.0 + math.sqrt(5.0)) * k
        return np.stack([np.sin(phi) * np.cos(theta),
                         np.sin(phi) * np.sin(theta),
                         np.cos(phi)], axis=1)
    raise DimensionMismatchError("direction nets implemented for n <= 3")


def _project_onto_body(body: ConvexBody, p: np.ndarray) -> np.ndarray:
    """Euclidean projection of p onto the body."""
    start, _ = body.largest_inscribed_ball()
    cons = [{"type": "ineq",
             "fun": lambda z, a=body.normals[i], b=body.offsets[i]: b - a @ z}
            for i in range(body.normals.shape[0])]
    cons.append({"type": "ineq",
                 "fun": lambda z: body.ball_radius ** 2
                 - float((z - body.ball_center) @ (z - body.ball_center))})
    sol = minimize(lambda z: float((z - p) @ (z - p)), start, method="SLSQP",
                   constraints=cons, options={"maxiter": 200, "ftol": 1e-14})
    if not sol.success:
        raise RuntimeError("projection onto body failed to converge")
    return sol.x


def _sample_ball(center: np.ndarray, radius: float, m: int,
                 rng: np.random.Generator) -> np.ndarray:
    n = center.size
    u = rng.standard_normal((m, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, m) ** (1.0 / n)
    return center + u * r[:, None]


def find_stable_gradient_patch(f: MaxAffineFunction, placement_center,
                               placement_radius: float, delta: float,
                               xi: float, rng: np.random.Generator,
                               attempts: int = 24, grad_samples: int = 160,
                               check_samples: int = 768) -> StableGradientPatch:
    """Search a placement ball for a centre whose subgradients concentrate.

    Each attempt smooths the gradient over B(z, delta) and accepts when the
    fraction of subgradients within ``xi * |g|`` of the smoothed gradient
    clears 1/2 by three Wilson half-widths. Raises ``PatchNotFoundError``
    carrying the best fraction seen.
    """
    center = np.atleast_1d(np.asarray(placement_center, dtype=float))
    best = 0.0
    for _ in range(attempts):
        z = _sample_ball(center, placement_radius, 1, rng)[0]
        g = smoothed_gradient(f, z, delta, grad_samples, rng)
        t = g.norm
        if t < 1e-13:
            continue
        theta = g.vector / t
        pts = _sample_ball(z, delta, check_samples, rng)
        dev = np.linalg.norm(f.subgradients(pts) - t * theta, axis=1)
        hits = int((dev <= xi * t).sum())
        fraction = hits / check_samples
        margin = 3.0 * wilson_half_width(hits, check_samples)
        if fraction >= 0.5 + margin:
            return StableGradientPatch(z, theta, t, delta, fraction,
                                       check_samples, xi)
        best = max(best, fraction)
    raise PatchNotFoundError(
        f"no stable-gradient patch found (best fraction {best:.3f})", best)


def build_gamma_cover(f: MaxAffineFunction, body: ConvexBody,
                      profile: ConstantProfile, params: PipelineParams,
                      rng: np.random.Generator, eta: float) -> GammaCover:
    """Cover the sphere of directions with patches and separators.

    For each probe direction phi: when phi/8 lies in the body, a patch is
    hunted inside a ball placed on the segment from phi/32 toward the
    Chebyshev ball; otherwise phi/8 is separated from the body and the
    separating direction s (with support value at most 1/8) joins the cover.
    The body must contain the origin, where f attains its minimum.
    """
    n = body.dimension
    if f.dimension != n:
        raise DimensionMismatchError("function/body dimension mismatch")
    if not body.contains(np.zeros(n), tol=1e-7):
        raise CoverError("cover construction expects the origin inside the body")
    gamma = profile.gamma(n)
    cheb_center, cheb_radius = body.largest_inscribed_ball()
    if cheb_radius <= 1e-12:
        raise CoverError("body is flat: no room to place patch balls")
    r_target = profile.patch_ball_radius(n)
    radius_bound = float(np.linalg.norm(body.ball_center) + body.ball_radius)
    lipschitz = f.lipschitz_bound(radius_bound)
    xi_base = profile.xi(n)
    patches = []
    separators = []
    failures = 0
    for phi in _unit_net(n, params.phi_count):
        probe = phi / 8.0
        if body.contains(probe):
            lam = min(1.0, r_target / cheb_radius)
            ball_center = (1.0 - lam) * (phi / 32.0) + lam * cheb_center
            ball_radius = lam * cheb_radius
            delta = min(profile.patch_delta(n, ball_radius, lipschitz, eta),
                        ball_radius)
            xi = xi_base
            for round_ in range(params.xi_relax_rounds + 1):
                try:
                    patch = find_stable_gradient_patch(
                        f, ball_center, ball_radius, delta, xi, rng,
                        params.patch_attempts, params.grad_samples,
                        params.patch_samples)
                    if round_ > 0:
                        patch = StableGradientPatch(
                            patch.center, patch.direction, patch.scale,
                            patch.radius, patch.fraction, patch.sample_count,
                            patch.xi, relaxed=True)
                    patches.append(patch)
                    break
                except PatchNotFoundError:
                    if round_ == params.xi_relax_rounds:
                        failures += 1
                    else:
                        xi *= 2.0
                        warnings.warn(
                            "stable-gradient patch not found; relaxing the "
                            f"concentration radius to xi={xi:.4g}")
        else:
            q = _project_onto_body(body, probe)
            gapv = probe - q
            norm = float(np.linalg.norm(gapv))
            if norm < 1e-12:
                continue  # boundary grazing: treat as inside
            s = gapv / norm
            if body.support_function(s) > 0.125 + 1e-6:
                raise CoverError(
                    "separating direction fails its support certificate",
                    worst_direction=s,
                    worst_value=float(body.support_function(s)))
            separators.append(s)
    return GammaCover(n, gamma, tuple(patches), tuple(separators), failures)


def verify_gamma_cover(directions, gamma: float,
                       rng: np.random.Generator | None = None,
                       samples: int = 4096) -> CoverCheck:
    """Check min over the sphere of max over directions of <theta, x> >= -gamma.

    Two dimensions use a dense angular grid; higher dimensions use random
    unit vectors augmented with the coordinate axes and the negated cover.
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    if dirs.shape[0] == 0:
        return CoverCheck(False, -1.0, np.zeros(0), 0)
    n = dirs.shape[1]
    if n == 2:
        ang = np.linspace(0.0, 2.0 * np.pi, max(samples, 2048), endpoint=False)
        test = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        test = rng.standard_normal((samples, n))
        test /= np.linalg.norm(test, axis=1, keepdims=True)
        test = np.vstack([test, np.eye(n), -np.eye(n), -dirs])
    scores = (test @ dirs.T).max(axis=1)
    k = int(np.argmin(scores))
    worst = float(scores[k])
    return CoverCheck(worst >= -gamma - 1e-9, worst, test[k], test.shape[0])


def caratheodory_reduce(cover: GammaCover,
                        rng: np.random.Generator | None = None,
                        samples: int = 4096) -> ReducedCover:
    """Reduce a verified cover to at most n+1 patches plus the separators.

    The minimum-norm point of the direction hull must have norm at most
    gamma; its support is pruned to n+1 members, and the surviving set is
    re-verified as a cover. Raises ``CoverError`` when either step fails.
    """
    if not cover.patches:
        raise CoverError("cover holds no stable-gradient patches")
    dirs = np.vstack([p.direction for p in cover.patches]
                     + [s for s in cover.separators])
    y, w = min_norm_point(dirs)
    hull_norm = float(np.linalg.norm(y))
    if hull_norm > cover.gamma * (1.0 + 1e-6):
        raise CoverError(
            f"direction hull misses the gamma ball ({hull_norm:.4g} > "
            f"{cover.gamma:.4g})",
            worst_value=hull_norm)
    w = caratheodory_prune(dirs, w, cover.dimension + 1)
    kept = [p for p, wi in zip(cover.patches, w) if wi > 1e-12]
    if not kept:
        raise CoverError("reduction kept no patches, only separators")
    reduced_dirs = np.vstack([p.direction for p in kept]
                             + [s for s in cover.separators])
    check = verify_gamma_cover(reduced_dirs, cover.gamma, rng, samples)
    if not check.ok:
        raise CoverError("reduced cover fails verification",
                         worst_direction=check.worst_direction,
                         worst_value=check.worst_value)
    return ReducedCover(tuple(kept), cover.separators, y, hull_norm, check)


def single_scale_measure(f: MaxAffineFunction, body: ConvexBody,
                         profile: ConstantProfile, params: PipelineParams,
                         rng: np.random.Generator, eta: float,
                         moment_slack: float = 0.0):
    """One whitened stage: cover, reduce, cut; returns its measure and cut.

    The body is assumed whitened (covariance near identity) with the
    objective minimised at the origin. Returns ``(measure, direction,
    halfwidth, info)`` where the slab {|<direction, x>| <= halfwidth}
    contains the polytope left after cutting along the reduced cover.
    """
    n = body.dimension
    cover = build_gamma_cover(f, body, profile, params, rng, eta)
    reduced = caratheodory_reduce(cover, rng, params.cover_samples)
    gamma = cover.gamma
    mgamma = profile.slab_multiplier(n) * gamma  # = 1/8
    cut_normals = np.vstack([body.normals]
                            + [p.direction[None, :] for p in reduced.patches])
    cut_offsets = np.concatenate(
        [body.offsets, np.full(len(reduced.patches), mgamma)])
    polytope = ConvexBody(n, cut_normals, cut_offsets,
                          body.ball_center, body.ball_radius)
    _, inscribed = polytope.largest_inscribed_ball()
    # Inscribed balls of the cut polytope stay below gamma*(M + diameter):
    # the cover pins one direction against each candidate centre.
    bound = gamma * (profile.slab_multiplier(n)
                     + 2.0 * (n + 1) * (1.0 + 5.0 * moment_slack))
    if inscribed > bound * (1.0 + 1e-9):
        raise CoverError(
            f"cut polytope keeps an inscribed ball of radius {inscribed:.4g} "
            f"(bound {bound:.4g}); the cover is unsound",
            worst_value=inscribed)
    direction, halfwidth = thinnest_slab(polytope)
    measure = ExplorationMeasure.equal_mixture(
        [UniformBall(p.center, p.radius) for p in reduced.patches])
    info = {
        "cover": cover,
        "reduced": reduced,
        "inscribed_radius": float(inscribed),
    }
    return measure, direction, float(halfwidth), info


def _as_polytope(body: ConvexBody) -> ConvexBody:
    """Replace an active bounding ball by an inscribed 64-gon (2-D only)."""
    if body.has_halfspaces and body.ball_is_redundant():
        return body
    n = body.dimension
    if n != 2:
        raise ValueError(
            "bodies with an active ball constraint are only supported in 2-D")
    sides = 64
    ang = np.linspace(0.0, 2.0 * np.pi, sides, endpoint=False)
    units = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    apothem = body.ball_radius * math.cos(math.pi / sides)
    normals = np.vstack([body.normals, units])
    offsets = np.concatenate(
        [body.offsets, units @ body.ball_center + apothem])
    return ConvexBody(2, normals, offsets, body.ball_center,
                      body.ball_radius * (1.0 + 1e-9))


def multi_scale_measure(f: MaxAffineFunction, body: ConvexBody,
                        eps: float,
                        profile: ConstantProfile = CALIBRATED,
                        params: PipelineParams | None = None,
                        rng: np.random.Generator | None = None) -> MultiScaleResult:
    """Stack single scales until the remaining body fits in a thin slab.

    Each stage whitens the current body with a matrix-only map (keeping the
    minimiser at the origin), builds a stage measure from its reduced cover,
    and keeps only the slab around the thinnest direction of the cut
    polytope. Stage measures are pulled back to the input frame and mixed
    equally. The returned direction/base point describe the final slab
    {x : |<direction, x - base_point>| <= final_halfwidth} containing
    everything never cut away.
    """
    params = params if params is not None else PipelineParams()
    rng = rng if rng is not None else np.random.default_rng()
    n = body.dimension
    if n < 2:
        raise DimensionMismatchError("multi_scale_measure needs dimension >= 2")
    if n > params.max_dimension:
        raise ValueError(f"dimension {n} above configured cap "
                         f"{params.max_dimension}")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    body = _as_polytope(body)
    x0 = argmin(f, body)
    eta = profile.eta(n, eps)
    # Pin the minimum to zero at the origin and add strong convexity once.
    f0 = f.translate(x0).add_constant(-float(f.value(x0)))
    f0 = MaxAffineFunction(f0.offsets, f0.slopes, f0.eta + eta, f0.quad)
    work = affine_image(body, AffineMap(np.eye(n), -x0))
    stop = profile.stop_width(n, eps)
    cap = profile.stage_cap(n, eps)
    stages: list[StageRecord] = []
    components = []
    capped = True
    direction = None
    halfwidth = math.inf
    moment_count = max(params.moment_samples, 100 * n * n)
    for index in range(cap):
        direction, halfwidth = thinnest_slab(work)
        if halfwidth <= stop:
            capped = False
            break
        moments = work.estimate_moments(moment_count, rng)
        q = whitening_map(moments).matrix  # matrix-only: origin stays fixed
        q_inv = np.linalg.inv(q)
        whitened = affine_image(work, AffineMap(q, np.zeros(n)))
        f_stage = f0.compose_affine(AffineMap(q_inv, np.zeros(n)))
        mu_stage, v, v_halfwidth, info = single_scale_measure(
            f_stage, whitened, profile, params, rng, eta,
            moments.stderr_scale)
        kept = slab(whitened, v, v_halfwidth * (1.0 + 1e-9))
        volume = volume_ratio(kept, whitened, params.volume_samples, rng)
        work = affine_image(kept, AffineMap(q_inv, np.zeros(n)))
        components.append(Pushforward(AffineMap(q_inv, x0), mu_stage))
        stages.append(StageRecord(
            index=index, whiten=q, unwhiten=q_inv, function=f_stage,
            width_before=float(halfwidth),
            patches=info["reduced"].patches,
            separator_count=len(info["reduced"].separators),
            raw_patch_count=len(info["cover"].patches),
            failures=info["cover"].failures,
            hull_norm=info["reduced"].hull_norm,
            inscribed_radius=info["inscribed_radius"],
            slab_direction=v, slab_halfwidth=v_halfwidth,
            volume=volume))
        if index + 1 == cap:
            direction, halfwidth = thinnest_slab(work)
    if not components:
        raise CoverError(
            "body is already thinner than the stop width; no stages produced")
    if capped:
        warnings.warn("stage cap reached before the stop width")
    measure = ExplorationMeasure.equal_mixture(components)
    return MultiScaleResult(measure, stages, direction, x0,
                            float(halfwidth), capped, profile.name, eta)


def _complement_frame(theta: np.ndarray) -> np.ndarray:
    """Orthonormal (n, n-1) basis of the hyperplane orthogonal to theta."""
    n = theta.size
    u, _, _ = np.linalg.svd(theta.reshape(n, 1), full_matrices=True)
    frame = u[:, 1:]
    # svd may flip the first column's sign relative to theta; the complement
    # columns are orthonormal to theta either way.
    return frame


def _projected_body(host: ConvexBody, anchor: np.ndarray,
                    frame: np.ndarray) -> ConvexBody:
    """Projection of the host onto anchor + range(frame), in frame coordinates.

    Exact for a one-dimensional image (support interval); otherwise an outer
    polygon over a direction net. Fibers over any over-approximated sliver
    are empty and handled by the lift's conditional re-draws.
    """
    k = frame.shape[1]
    if k == 1:
        t = frame[:, 0]
        hi = host.support_function(t) - float(t @ anchor)
        lo = -(host.support_function(-t) + float(-t @ anchor))
        if hi - lo <= 1e-12:
            mid = 0.5 * (lo + hi)
            lo, hi = mid - 1e-9, mid + 1e-9
        return ConvexBody.interval(lo, hi)
    net = _unit_net(k, 32)
    offsets = np.array([host.support_function(frame @ u)
                        - float((frame @ u) @ anchor) for u in net])
    return ConvexBody(k, net, offsets)


def build_exploratory_measure(body: ConvexBody, f: MaxAffineFunction,
                              eps: float,
                              profile: ConstantProfile = CALIBRATED,
                              params: PipelineParams | None = None,
                              rng: np.random.Generator | None = None
                              ) -> tuple[ExplorationMeasure, BuildReport]:
    """Full construction with dimension induction.

    After whitening, the multi-scale measure handles everything outside the
    final slab; a recursively built measure on the slab's projection is
    lifted along fibers to handle the rest. The mixture gives the
    multi-scale part weight 1/n and the lift (n-1)/n.
    """
    params = params if params is not None else PipelineParams()
    rng = rng if rng is not None else np.random.default_rng()
    n = body.dimension
    if f.dimension != n:
        raise DimensionMismatchError("function/body dimension mismatch")
    if n > params.max_dimension:
        raise ValueError(f"dimension {n} above configured cap "
                         f"{params.max_dimension}")
    if n == 1:
        measure = build_measure_1d(body, f, eps)
        return measure, BuildReport(1, profile.name)
    body = _as_polytope(body)
    moments = body.estimate_moments(max(params.moment_samples, 100 * n * n), rng)
    w_map = whitening_map(moments)
    whitened = affine_image(body, w_map)
    f_w = f.compose_affine(w_map.inverse())
    ms = multi_scale_measure(f_w, whitened, eps, profile, params, rng)
    theta = ms.direction / np.linalg.norm(ms.direction)
    anchor = ms.base_point
    delta = max(ms.final_halfwidth, profile.stop_width(n, eps)) * (1.0 + 1e-9)
    slab_body = slab(whitened, theta, delta, center=anchor)
    frame = _complement_frame(theta)
    shadow = _projected_body(slab_body, anchor, frame)
    # The fiber envelope max_w f(anchor + frame u + w theta) over the slab
    # window is realised exactly: the restrictions share one quadratic form,
    # so their affine pieces union into a single function of u.
    grid = np.linspace(-delta, delta, 33)
    parts = [f_w.compose_affine(AffineMap(frame, anchor + w * theta))
             for w in grid]
    envelope = MaxAffineFunction(
        np.concatenate([p.offsets for p in parts]),
        np.vstack([p.slopes for p in parts]),
        parts[0].eta, parts[0].quad)
    child, child_report = build_exploratory_measure(
        shadow, envelope, eps, profile, params, rng)
    lift = FiberLift(child, anchor, frame, theta, whitened)
    weights = [Fraction(1, n) * w for w in ms.measure.weights]
    components = list(ms.measure.components)
    weights.append(Fraction(n - 1, n))
    components.append(lift)
    inner = ExplorationMeasure(weights, components)
    measure = ExplorationMeasure([Fraction(1)],
                                 [Pushforward(w_map.inverse(), inner)])
    report = BuildReport(n, profile.name, theta, anchor, delta,
                         ms.stages, ms.capped, child_report)
    return measure, report
