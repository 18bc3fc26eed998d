"""Density fields on the unit cube.

Each field is a small frozen dataclass evaluated on an ``(M, d)`` array of
points.  Fields defined for four dimensions extend to any ``d``: the mean is
``(0.5, ..., 0.5)`` and the cone treats the last coordinate as time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _points(x) -> np.ndarray:
    return np.atleast_2d(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Uniform:
    recommended_order: int = 2

    def __call__(self, x):
        return np.ones(len(_points(x)))


@dataclass(frozen=True)
class Gaussian:
    """Normal density with diagonal covariance ``variance * I``."""

    mean: tuple | None = None
    variance: float = 0.02
    recommended_order: int = 4

    def __call__(self, x):
        x = _points(x)
        d = x.shape[1]
        mu = np.full(d, 0.5) if self.mean is None else np.asarray(self.mean, dtype=float)
        r2 = np.sum((x - mu) ** 2, axis=1)
        norm = ((2.0 * np.pi) ** d * self.variance ** d) ** -0.5
        return norm * np.exp(-0.5 * r2 / self.variance)


@dataclass(frozen=True)
class Cone:
    """``scale / (h^2 + floor)`` where ``h`` is the distance to an expanding sphere.

    In the (radius, time) half-plane the sphere traces the segment from
    ``(r0, 0)`` to ``(r1, 1)``; ``h`` is the distance to that segment.
    The radius is measured from ``center`` over the spatial coordinates.
    """

    r0: float = 0.4
    r1: float = 0.7
    center: tuple | None = None
    scale: float = 100.0
    floor: float = 0.001
    recommended_order: int = 2

    def distance(self, x) -> np.ndarray:
        x = _points(x)
        space, t = x[:, :-1], x[:, -1]
        c = np.zeros(space.shape[1]) if self.center is None else np.asarray(self.center, dtype=float)
        r = np.linalg.norm(space - c, axis=1)
        seg = np.array([self.r1 - self.r0, 1.0])
        rel = np.stack([r - self.r0, t], axis=1)
        u = np.clip(rel @ seg / (seg @ seg), 0.0, 1.0)
        return np.linalg.norm(rel - u[:, None] * seg, axis=1)

    def __call__(self, x):
        h = self.distance(x)
        return self.scale / (h ** 2 + self.floor)


@dataclass(frozen=True)
class Sphere:
    """``1 + scale * |x - mean|^2``."""

    mean: tuple | None = None
    scale: float = 100.0
    recommended_order: int = 2

    def __call__(self, x):
        x = _points(x)
        mu = np.full(x.shape[1], 0.5) if self.mean is None else np.asarray(self.mean, dtype=float)
        return 1.0 + self.scale * np.sum((x - mu) ** 2, axis=1)


DENSITIES = {
    "uniform": Uniform,
    "gaussian": Gaussian,
    "cone": Cone,
    "sphere": Sphere,
}


def make_density(name: str, **params):
    try:
        cls = DENSITIES[name]
    except KeyError:
        raise ValueError(f"unknown density {name!r}; choose from {sorted(DENSITIES)}") from None
    return cls(**params)


def evaluate(density, x) -> np.ndarray:
    return density(x)
