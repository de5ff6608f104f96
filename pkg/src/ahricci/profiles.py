"""Named profiles and perturbations used by the experiments.

Profiles ``w`` define metrics through :func:`~ahricci.geometry.from_profile`
(``phi = sqrt(1 + w**2)``, ``psi = sinh r``).  Perturbations are built in
orthonormal-frame components of a base metric as ``rho**mu`` times an even
radial bump, so that they belong to the weighted decay class measured by the
weighted norms, and are scaled to a prescribed weighted ``C^2`` size.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from .geometry import (BoundaryWeight, MetricPerturbation, RotSymMetric, WeightedNormParams,
                       weighted_norm)

Profile = Callable[[np.ndarray], np.ndarray]


class ProfileError(ValueError):
    pass


def gaussian_profile(amplitude: float = 1.0) -> Profile:
    """``w(r) = A r**2 exp(-r**2)``."""
    return lambda r: amplitude * r ** 2 * np.exp(-r ** 2)


def _scaled(name: str) -> Profile:
    m = re.fullmatch(r"([0-9.eE+-]+)\*?gauss", name)
    if m is None:
        raise ProfileError(f"unknown profile {name!r}; known: {', '.join(sorted(PROFILES))} "
                           "or '<A>*gauss'")
    try:
        a = float(m.group(1))
    except ValueError as exc:
        raise ProfileError(f"bad amplitude in profile {name!r}") from exc
    return gaussian_profile(a)


PROFILES: Dict[str, Profile] = {
    "zero": lambda r: np.zeros_like(r),
    "gauss": gaussian_profile(1.0),
    "2sinh": lambda r: 2.0 * np.sinh(r),
}


def get_profile(name: str) -> Profile:
    """Look up a named profile; ``'<A>*gauss'`` gives ``A r**2 exp(-r**2)``."""
    if name in PROFILES:
        return PROFILES[name]
    return _scaled(name)


# -- perturbations -----------------------------------------------------------

@dataclass(frozen=True)
class BumpSpec:
    """Even bump ``tanh(r)**2 (G(r - c) + G(r + c))``, ``G(x) = exp(-(x/width)**2)``.

    ``components`` is ``'rr'``, ``'sph'`` or ``'both'``; ``sign`` flips the
    bump.  The ``tanh**2`` factor makes the bump vanish to second order at
    the origin, so perturbed metrics stay smooth there.
    """

    name: str
    center: float
    width: float
    components: str = "rr"
    sign: float = 1.0

    def __post_init__(self):
        if self.components not in ("rr", "sph", "both"):
            raise ProfileError(f"components must be 'rr', 'sph' or 'both', got {self.components!r}")
        if not self.width > 0:
            raise ProfileError("bump width must be positive")

    def shape(self, r: np.ndarray) -> np.ndarray:
        g = np.exp(-((r - self.center) / self.width) ** 2) + np.exp(-((r + self.center) / self.width) ** 2)
        return self.sign * np.tanh(r) ** 2 * g


BUMPS: Dict[str, BumpSpec] = {b.name: b for b in (
    BumpSpec("rr-near", 2.0, 0.5, "rr"),
    BumpSpec("rr-far", 3.5, 0.8, "rr"),
    BumpSpec("sph-near", 2.0, 0.6, "sph"),
    BumpSpec("both-mid", 2.5, 0.7, "both"),
    BumpSpec("rr-neg", 1.5, 0.6, "rr", -1.0),
)}


def get_bump(name: str) -> BumpSpec:
    try:
        return BUMPS[name]
    except KeyError:
        raise ProfileError(f"unknown perturbation {name!r}; known: {', '.join(BUMPS)}") from None


def bump_perturbation(base: RotSymMetric, spec: BumpSpec, mu: float = 1.0) -> MetricPerturbation:
    """``rho**mu`` times the bump, in frame components of ``base`` (unscaled)."""
    grid = base.grid
    r = grid.nodes
    f = BoundaryWeight.sech(grid).rho ** mu * spec.shape(r)
    a = f if spec.components in ("rr", "both") else np.zeros_like(r)
    b = f if spec.components in ("sph", "both") else np.zeros_like(r)
    return MetricPerturbation(grid, base.phi ** 2 * a, base.psi ** 2 * b)


def scaled_perturbation(base: RotSymMetric, p: MetricPerturbation, delta: float,
                        norm: WeightedNormParams = WeightedNormParams(mu=1.0, k=2)) -> MetricPerturbation:
    """``p`` rescaled so its weighted ``C^k`` norm (measured with ``base``) equals ``delta``."""
    if delta < 0:
        raise ProfileError("delta must be nonnegative")
    size = weighted_norm(base, p, norm)
    if size == 0.0:
        if delta == 0.0:
            return p * 0.0
        raise ProfileError("cannot rescale a zero perturbation to a positive size")
    return p * (delta / size)


def bump_names() -> List[str]:
    return list(BUMPS)
