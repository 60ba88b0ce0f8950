# experiments/hull.py - Upper-right convex hull of achievable rate pairs.

import numpy as np


def _turns_left_or_straight(v0, v1, p) -> bool:
    return (v1[0] - v0[0]) * (p[1] - v0[1]) - (p[0] - v0[0]) * (v1[1] - v0[1]) >= 0.0


def convex_hull(points) -> list[tuple[float, float]]:
    """Dominant face of the convex hull, from (0, max R2) to (max R1, 0), ordered by increasing R1.

    Monotone chain over the points plus their axis projections; collinear and duplicate points are
    dropped.
    """
    pts = [(float(x), float(y)) for x, y in np.asarray(points, dtype=float).reshape(-1, 2)]
    if not pts:
        raise ValueError("need at least one point")
    top = max(y for _, y in pts)
    right = max(x for x, _ in pts)
    right_top = max(y for x, y in pts if x == right)
    # points straight below the two end vertices only add vertical, collinear edges
    candidates = sorted(
        p for p in set(pts) | {(0.0, top)} if not (p[0] == 0.0 and p[1] < top) and not (p[0] == right and p[1] < right_top)
    )

    upper: list[tuple[float, float]] = []
    for p in candidates:
        while len(upper) > 1 and _turns_left_or_straight(upper[-2], upper[-1], p):
            upper.pop()
        upper.append(p)

    # the chain starts at (0, top): the global maximum of R2, so it only descends from there
    if upper[-1][1] > 0.0:
        upper.append((right, 0.0))
    hull = []
    for vertex in upper:
        if not hull or vertex != hull[-1]:
            hull.append(vertex)
    return hull


def hull_contains(hull, point, tol: float = 1e-9) -> bool:
    """True when `point` lies on or below the hull boundary (and inside the positive quadrant box)."""
    x, y = float(point[0]), float(point[1])
    xs = [v[0] for v in hull]
    if x < -tol or y < -tol or x > max(xs) + tol:
        return False
    for a, b in zip(hull, hull[1:]):
        if a[0] - tol <= x <= b[0] + tol:
            if b[0] - a[0] <= tol:
                if y <= max(a[1], b[1]) + tol:
                    return True
                continue
            level = a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0])
            if y <= level + tol:
                return True
    return len(hull) == 1 and y <= hull[0][1] + tol
