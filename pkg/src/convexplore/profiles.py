"""Constant profiles for the multi-scale construction.

The "paper" profile uses the conservative theory constants; they certify the
guarantees but make patch balls astronomically small, so finite-sample
verification cannot resolve them. The "calibrated" profile keeps every
structural relation (scalings in n and eps) while choosing constants large
enough to measure. Outputs always record which profile produced them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

ETA_FLOOR = 1e-12


@dataclass(frozen=True)
class ConstantProfile:
    name: str

    def gamma(self, n: int) -> float:
        """Cover resolution: hull of accepted directions has norm <= gamma."""
        return 1.0 / (16.0 * n)

    def slab_multiplier(self, n: int) -> float:
        # M with M * gamma = 1/8, matching the separating-direction bound.
        return 2.0 * n

    def xi(self, n: int) -> float:
        """Relative subgradient-concentration radius for a stable patch."""
        if self.name == "paper":
            return 1.0 / (16.0 * n * n)
        return 0.25

    def patch_ball_radius(self, n: int) -> float:
        """Target radius of the ball in which a patch centre is sought."""
        if self.name == "paper":
            return 2.0 ** -13 / (n * n)
        return 1.0 / (8.0 * n * n)

    def patch_delta(self, n: int, placed_radius: float, lipschitz: float,
                    eta: float) -> float:
        """Smoothing / verification radius around a candidate patch centre."""
        if self.name == "paper":
            arg = 1.0 + lipschitz * n / max(eta, ETA_FLOOR)
            return 1.0 / (2.0 ** 28 * n ** 6 * math.log(arg))
        return placed_radius / 8.0

    def eta(self, n: int, eps: float) -> float:
        """Strong-convexity regularisation added before hunting patches."""
        if self.name == "paper":
            return max((eps / (2.0 ** 20 * n ** 10)) ** 2, ETA_FLOOR)
        return 1e-6

    def stop_width(self, n: int, eps: float) -> float:
        """Slab half-width below which the stage loop stops."""
        if self.name == "paper":
            return eps / (16.0 * n ** 10)
        return eps / 8.0

    def stage_cap(self, n: int, eps: float) -> int:
        return math.ceil(8.0 * n * (1.0 + math.log(1.0 + n / eps)))


PAPER = ConstantProfile("paper")
CALIBRATED = ConstantProfile("calibrated")

_PROFILES = {"paper": PAPER, "calibrated": CALIBRATED}


def get_profile(name: str) -> ConstantProfile:
    try:
        return _PROFILES[name]
    except KeyError:
        raise ConfigError(
            f"unknown profile {name!r}; choose from {sorted(_PROFILES)}"
        ) from None
