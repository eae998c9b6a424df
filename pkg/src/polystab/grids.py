"""Rectangular lambda-plane grids: node layout, component labels, contours.

Grids are stored image-style: ``field[j, i]`` belongs to the node with real
part ``re[i]`` and imaginary part ``im[j]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

__all__ = [
    "GridSpec",
    "count_components",
    "label_components",
    "marching_squares",
    "point_to_polylines",
    "polyline_hausdorff",
    "touches_border",
]


@dataclass(frozen=True)
class GridSpec:
    """Nodes at ``linspace`` over (re_min, re_max, im_min, im_max)."""

    region: tuple
    resolution: tuple  # (N_re, N_im)

    def __post_init__(self):
        re_min, re_max, im_min, im_max = (float(x) for x in self.region)
        if not (re_min < re_max and im_min < im_max):
            raise ValueError(f"empty region {self.region}")
        n_re, n_im = (int(x) for x in self.resolution)
        if n_re < 2 or n_im < 2:
            raise ValueError("grid resolution must be at least 2 in each direction")
        object.__setattr__(self, "region", (re_min, re_max, im_min, im_max))
        object.__setattr__(self, "resolution", (n_re, n_im))

    @property
    def re(self):
        return np.linspace(self.region[0], self.region[1], self.resolution[0])

    @property
    def im(self):
        return np.linspace(self.region[2], self.region[3], self.resolution[1])

    @property
    def steps(self):
        return (
            (self.region[1] - self.region[0]) / (self.resolution[0] - 1),
            (self.region[3] - self.region[2]) / (self.resolution[1] - 1),
        )

    @property
    def diagonal(self):
        return float(np.hypot(*self.steps))

    def nodes(self):
        """Complex node values, shape (N_im, N_re)."""
        return self.re[None, :] + 1j * self.im[:, None]

    def cell_of(self, z):
        """(j, i) indices of the nearest node, or None outside the grid cells."""
        hr, hi = self.steps
        i = int(np.floor((z.real - self.region[0]) / hr + 0.5))
        j = int(np.floor((z.imag - self.region[2]) / hi + 0.5))
        if 0 <= i < self.resolution[0] and 0 <= j < self.resolution[1]:
            return j, i
        return None

    def is_axis_symmetric(self, rtol=1e-12):
        lo, hi = self.region[2], self.region[3]
        return abs(lo + hi) <= rtol * max(1.0, abs(lo), abs(hi))


_FOUR = ndimage.generate_binary_structure(2, 1)


def label_components(member):
    labels, count = ndimage.label(np.asarray(member, dtype=bool), structure=_FOUR)
    return labels, int(count)


def touches_border(member):
    m = np.asarray(member, dtype=bool)
    return bool(m[0].any() or m[-1].any() or m[:, 0].any() or m[:, -1].any())


def count_components(member):
    return label_components(member)[1]


# Contour segments per 2x2 case. Corners: 0=(j,i) 1=(j,i+1) 2=(j+1,i+1) 3=(j+1,i);
# edges: 0 bottom, 1 right, 2 top, 3 left. Saddles keep diagonal members apart,
# matching 4-connected labelling.
_CASES = {
    0: [], 15: [],
    1: [(3, 0)], 2: [(0, 1)], 4: [(1, 2)], 8: [(2, 3)],
    3: [(3, 1)], 6: [(0, 2)], 12: [(1, 3)], 9: [(2, 0)],
    7: [(3, 2)], 14: [(0, 3)], 13: [(1, 0)], 11: [(2, 1)],
    5: [(3, 0), (1, 2)], 10: [(0, 1), (2, 3)],
}


def _edge_key(j, i, e):
    # edge midpoints in doubled integer coordinates (2j, 2i)
    return {
        0: (2 * j, 2 * i + 1),
        1: (2 * j + 1, 2 * i + 2),
        2: (2 * j + 2, 2 * i + 1),
        3: (2 * j + 1, 2 * i),
    }[e]


def marching_squares(member, spec: GridSpec, values=None, level=0.0):
    """Boundary polylines (complex vertex arrays) of a boolean node field.

    The field is padded with False so every member region yields closed
    loops. Without ``values`` vertices sit halfway between a member node and
    a non-member one; with a scalar ``values`` field (members where
    values <= level) they are placed by linear interpolation of the level
    crossing. Closed loops repeat their first vertex at the end.
    """
    field = np.pad(np.asarray(member, dtype=bool), 1)
    code = (
        field[:-1, :-1].astype(int)
        | (field[:-1, 1:].astype(int) << 1)
        | (field[1:, 1:].astype(int) << 2)
        | (field[1:, :-1].astype(int) << 3)
    )
    nxt = {}
    for j, i in zip(*np.nonzero((code != 0) & (code != 15))):
        for a, b in _CASES[int(code[j, i])]:
            nxt[_edge_key(j, i, a)] = _edge_key(j, i, b)

    hr, hi = spec.steps
    re0, im0 = spec.region[0], spec.region[2]
    if values is not None:
        vals = np.pad(np.asarray(values, dtype=float), 1, constant_values=np.inf)

    def frac(key):
        # position of the crossing along the edge, 0.5 without a value field
        if values is None:
            return 0.5
        jj, ii = key
        if jj % 2 == 0:
            a, b = vals[jj // 2, (ii - 1) // 2], vals[jj // 2, (ii + 1) // 2]
        else:
            a, b = vals[(jj - 1) // 2, ii // 2], vals[(jj + 1) // 2, ii // 2]
        if not np.isfinite(a):
            return 1.0 if b <= level else 0.0
        if not np.isfinite(b):
            return 0.0 if a <= level else 1.0
        if a == b:
            return 0.5
        return float(np.clip((level - a) / (b - a), 0.0, 1.0))

    def to_complex(key):
        # doubled padded coords -> lambda plane
        jj, ii = key
        t = frac(key)
        if jj % 2 == 0:
            x, y = (ii - 1) / 2.0 + t - 1.0, jj / 2.0 - 1.0
        else:
            x, y = ii / 2.0 - 1.0, (jj - 1) / 2.0 + t - 1.0
        return complex(re0 + x * hr, im0 + y * hi)

    lines = []
    seen = set()
    for start in sorted(nxt):
        if start in seen:
            continue
        chain = [start]
        seen.add(start)
        cur = nxt[start]
        while cur != start and cur not in seen and cur in nxt:
            chain.append(cur)
            seen.add(cur)
            cur = nxt[cur]
        if cur == start:
            chain.append(start)
        lines.append(np.array([to_complex(k) for k in chain]))
    return lines


def point_to_polylines(points, lines):
    """Distance from each point to the union of the polyline segments."""
    pts = np.asarray(points, dtype=complex).ravel()
    segs = [(ln[:-1], ln[1:]) for ln in lines if ln.size >= 2]
    singles = [ln for ln in lines if ln.size == 1]
    a = np.concatenate([s[0] for s in segs] + [x for x in singles]) if (segs or singles) else None
    if a is None:
        raise ValueError("no polylines")
    b = np.concatenate([s[1] for s in segs] + [x for x in singles])
    ab = b - a
    denom = np.abs(ab) ** 2
    best = np.full(pts.size, np.inf)
    step = max(1, 2_000_000 // a.size)
    for s0 in range(0, pts.size, step):
        p = pts[s0:s0 + step, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(denom > 0, ((p - a) * np.conj(ab)).real / denom, 0.0)
        t = np.clip(t, 0.0, 1.0)
        best[s0:s0 + step] = np.min(np.abs(p - (a + t * ab)), axis=1)
    return best


def polyline_hausdorff(A, B):
    """Hausdorff distance between two unions of polylines (segments, not vertices)."""
    va = np.concatenate(A)
    vb = np.concatenate(B)
    return float(max(np.max(point_to_polylines(va, B)), np.max(point_to_polylines(vb, A))))
