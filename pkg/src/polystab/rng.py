"""Deterministic random streams: one counter-based generator per (seed, label)."""
from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream", "unit_ball", "unit_sphere_complex", "random_direction"]


def stream(seed, label):
    """Philox generator keyed by a stable hash of (seed, label)."""
    digest = hashlib.sha256(f"{int(seed)}:{label}".encode()).digest()
    key = int.from_bytes(digest[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def unit_ball(rng, count, m):
    """``count`` points uniform in the closed Euclidean unit ball of R^m."""
    g = rng.standard_normal((count, m))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rng.random(count) ** (1.0 / m)
    return g * r[:, None]


def random_direction(rng, m):
    g = rng.standard_normal(m)
    return g / np.linalg.norm(g)


def unit_sphere_complex(rng, count, n):
    """Normalized complex Gaussians: uniform on the unit sphere of C^n."""
    x = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)
