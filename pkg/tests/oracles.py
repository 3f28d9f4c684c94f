"""Independent oracles used by the test suite.

Everything here is deliberately brute force or classical closed form, and
never calls the code path it is checking.
"""

import itertools
import math

import numpy as np


def finite_diff_grad_y(phi_eval, x, y, h=1e-5):
    """Central-difference gradient of phi(x, .) at y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = np.zeros(2)
    for i in range(2):
        dy = np.zeros(2)
        dy[i] = h
        g[i] = (phi_eval(x, y + dy) - phi_eval(x, y - dy)) / (2 * h)
    return g


def disk_lens_area(ra, rb, dist):
    """Intersection area of two disks with the given radii and center distance."""
    if dist >= ra + rb:
        return 0.0
    if dist <= abs(ra - rb):
        r = min(ra, rb)
        return math.pi * r * r
    a2 = (dist * dist + ra * ra - rb * rb) / (2 * dist * ra)
    b2 = (dist * dist + rb * rb - ra * ra) / (2 * dist * rb)
    a2 = min(1.0, max(-1.0, a2))
    b2 = min(1.0, max(-1.0, b2))
    tri = 0.5 * math.sqrt(
        max(0.0, (-dist + ra + rb) * (dist + ra - rb) * (dist - ra + rb) * (dist + ra + rb))
    )
    return ra * ra * math.acos(a2) + rb * rb * math.acos(b2) - tri


def exact_annuli_overlap(center_a, ra, center_b, rb, width):
    """Exact total area of the overlap of two circular annuli of half-width."""
    dist = float(np.linalg.norm(np.asarray(center_a) - np.asarray(center_b)))
    return (
        disk_lens_area(ra + width, rb + width, dist)
        - disk_lens_area(ra + width, rb - width, dist)
        - disk_lens_area(ra - width, rb + width, dist)
        + disk_lens_area(ra - width, rb - width, dist)
    )


def circle_circle_points(center_a, ra, center_b, rb):
    """The (up to two) intersection points of two circles."""
    pa = np.asarray(center_a, dtype=float)
    pb = np.asarray(center_b, dtype=float)
    d = float(np.linalg.norm(pb - pa))
    if d > ra + rb or d < abs(ra - rb) or d == 0.0:
        return []
    a = (ra * ra - rb * rb + d * d) / (2 * d)
    h2 = ra * ra - a * a
    if h2 < 0:
        return []
    h = math.sqrt(max(h2, 0.0))
    mid = pa + a * (pb - pa) / d
    perp = np.array([-(pb - pa)[1], (pb - pa)[0]]) / d
    if h == 0.0:
        return [mid]
    return [mid + h * perp, mid - h * perp]


def kst_brute_force_witness(bits, m, n):
    """Exhaustive scan over all 2-row, 3-column tuples of an m x n 0/1 table."""
    for r1, r2 in itertools.combinations(range(m), 2):
        cols = [c for c in range(n) if bits[r1][c] and bits[r2][c]]
        if len(cols) >= 3:
            return (r1, r2), tuple(cols[:3])
    return None


def apollonius_internal_solutions(circles):
    """Circles (x, r) with |x - xi| = |r - ri| for three given circles.

    Subtracting the squared equations pairwise leaves two linear equations in
    (x, r); substituting the resulting line back into one quadratic gives at
    most two solutions.  These are the classical common-tangency solutions in
    the internal-contact regime.
    """
    (x1, r1), (x2, r2), (x3, r3) = circles
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    x3 = np.asarray(x3, dtype=float)
    rows = []
    rhs = []
    for (xa, ra), (xb, rb) in (((x1, r1), (x2, r2)), ((x1, r1), (x3, r3))):
        # -2 x.(xa - xb) + 2 r (ra - rb) = rb^2 - ra^2 + |xa|^2 - |xb|^2 ... rearranged
        rows.append([-2 * (xa[0] - xb[0]), -2 * (xa[1] - xb[1]), 2 * (ra - rb)])
        rhs.append(ra * ra - rb * rb - float(xa @ xa) + float(xb @ xb))
    rows = np.asarray(rows)
    rhs = np.asarray(rhs)
    # parametrize the solution line of the 2x3 system
    sol, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    null = _null_vector(rows)
    # plug x(t), r(t) into |x - x1|^2 = (r - r1)^2
    p = sol[:2] - x1
    q = null[:2]
    pr = sol[2] - r1
    qr = null[2]
    a = float(q @ q) - qr * qr
    b = 2 * float(p @ q) - 2 * pr * qr
    c = float(p @ p) - pr * pr
    if abs(a) < 1e-14:
        ts = [-c / b] if abs(b) > 1e-14 else []
    else:
        disc = b * b - 4 * a * c
        if disc < 0:
            return []
        ts = [(-b + math.sqrt(disc)) / (2 * a), (-b - math.sqrt(disc)) / (2 * a)]
    out = []
    for t in ts:
        v = sol + t * null
        out.append((np.array([v[0], v[1]]), float(v[2])))
    return out


def _null_vector(rows):
    _, _, vt = np.linalg.svd(rows)
    return vt[-1]
