"""Initial density profiles gamma: T^d -> [0, 1].

Profiles are callables over point arrays of shape (..., d).  The catalogue
matches what experiment configs can name: a constant, a step along one
coordinate, and a cosine bump along one coordinate.
"""

from __future__ import annotations

import numpy as np


class ConstantProfile:
    def __init__(self, value):
        if not 0.0 <= value <= 1.0:
            raise ValueError("constant profile value must lie in [0, 1]")
        self.value = float(value)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return np.full(u.shape[:-1], self.value)

    def __repr__(self):
        return f"constant({self.value})"


class StepProfile:
    """gamma = left for u_axis < split, right otherwise."""

    def __init__(self, axis=0, split=0.5, left=1.0, right=0.0):
        for v in (left, right):
            if not 0.0 <= v <= 1.0:
                raise ValueError("step levels must lie in [0, 1]")
        if not 0.0 <= split <= 1.0:
            raise ValueError("split must lie in [0, 1]")
        self.axis, self.split = int(axis), float(split)
        self.left, self.right = float(left), float(right)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u[..., self.axis] < self.split, self.left, self.right)

    def __repr__(self):
        return (f"step(axis={self.axis},split={self.split},"
                f"left={self.left},right={self.right})")


class CosineProfile:
    """gamma = base + amplitude * cos(2 pi u_axis), kept inside [0, 1]."""

    def __init__(self, axis=0, base=0.5, amplitude=0.25):
        if base - abs(amplitude) < 0.0 or base + abs(amplitude) > 1.0:
            raise ValueError("cosine profile must map into [0, 1]")
        self.axis, self.base, self.amplitude = int(axis), float(base), float(amplitude)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return self.base + self.amplitude * np.cos(
            2.0 * np.pi * u[..., self.axis])

    def __repr__(self):
        return (f"cosine(axis={self.axis},base={self.base},"
                f"amplitude={self.amplitude})")
