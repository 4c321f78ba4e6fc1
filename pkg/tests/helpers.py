"""Shared random generators and small comparison utilities for tests."""

from __future__ import annotations

import math

from rotbox import OrientedBox


def random_box(rng, span: float = 60.0, lo: float = 2.0, hi: float = 30.0) -> OrientedBox:
    cx, cy = rng.uniform(-span, span, 2)
    w, h = rng.uniform(lo, hi, 2)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    return OrientedBox(float(cx), float(cy), float(w), float(h), float(theta))


def random_nearby_pair(rng, span: float = 60.0) -> tuple[OrientedBox, OrientedBox]:
    """Two random boxes whose centers are close, so overlap is common."""
    a = random_box(rng, span=span)
    dx, dy = rng.uniform(-0.6, 0.6, 2) * (a.w + a.h) / 2.0
    w, h = rng.uniform(2.0, 30.0, 2)
    b = OrientedBox(
        a.cx + float(dx),
        a.cy + float(dy),
        float(w),
        float(h),
        float(rng.uniform(0.0, 2.0 * math.pi)),
    )
    return a, b


def apply_rigid(box: OrientedBox, phi: float, tx: float, ty: float) -> OrientedBox:
    """Rotate about the origin by phi, then translate by (tx, ty)."""
    c, s = math.cos(phi), math.sin(phi)
    return OrientedBox(
        c * box.cx - s * box.cy + tx,
        s * box.cx + c * box.cy + ty,
        box.w,
        box.h,
        box.theta + phi,
    )


def angle_distance(a: float, b: float, period: float = math.pi) -> float:
    """Distance between two angles on a circle of the given period."""
    d = abs(a - b) % period
    return min(d, period - d)


def corner_sets_match(verts_a, verts_b, tol: float = 1e-9) -> bool:
    """True when each vertex of one set has a partner in the other within tol."""
    va, vb = list(verts_a), list(verts_b)
    if len(va) != len(vb):
        return False
    for x, y in va:
        if min((x - u) ** 2 + (y - v) ** 2 for u, v in vb) > tol * tol:
            return False
    for u, v in vb:
        if min((x - u) ** 2 + (y - v) ** 2 for x, y in va) > tol * tol:
            return False
    return True
