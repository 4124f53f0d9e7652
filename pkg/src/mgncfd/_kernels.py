"""Hot numeric kernels with numba-jitted and pure-numpy implementations.

Every kernel exists in two variants: a numba ``@njit`` version and a
vectorized numpy fallback. The public names bind to the numba variant when
numba imports successfully and the environment variable ``MGNCFD_NO_NUMBA``
is unset (or "0"); otherwise they bind to the numpy fallback. Both variants
of each kernel are kept reachable through ``KERNEL_VARIANTS`` so the
benchmark command can time them against each other.
"""

import os

import numpy as np

_flag = os.environ.get("MGNCFD_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag in {"1", "true", "yes"}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED


def _njit(fn):
    if HAVE_NUMBA:
        return numba.njit(cache=True)(fn)
    return None


# ---------------------------------------------------------------------------
# segment sum: scatter-add edge rows onto their destination nodes


def segment_sum_numpy(values, segments, n):
    out = np.zeros((n, values.shape[1]), dtype=values.dtype)
    np.add.at(out, segments, values)
    return out


def _segment_sum_loop(values, segments, n):
    out = np.zeros((n, values.shape[1]), dtype=values.dtype)
    for e in range(values.shape[0]):
        s = segments[e]
        for f in range(values.shape[1]):
            out[s, f] += values[e, f]
    return out


segment_sum_numba = _njit(_segment_sum_loop)


# ---------------------------------------------------------------------------
# signed distance from points to a closed polygon (positive outside)


def polygon_sdist_numpy(points, poly):
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a  # (M, 2)
    ap = points[:, None, :] - a[None, :, :]  # (N, M, 2)
    denom = np.maximum((ab * ab).sum(axis=1), 1e-300)
    t = np.clip((ap * ab[None, :, :]).sum(axis=2) / denom[None, :], 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d2 = ((points[:, None, :] - closest) ** 2).sum(axis=2)
    dist = np.sqrt(d2.min(axis=1))
    # even-odd crossing test for containment
    x, y = points[:, 0][:, None], points[:, 1][:, None]
    ya, yb = a[None, :, 1], b[None, :, 1]
    xa, xb = a[None, :, 0], b[None, :, 0]
    cond = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = xa + (y - ya) * (xb - xa) / (yb - ya)
    crossing = cond & (x < xint)
    inside = (crossing.sum(axis=1) % 2) == 1
    return np.where(inside, -dist, dist)


def _polygon_sdist_loop(points, poly):
    n = points.shape[0]
    m = poly.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        px = points[i, 0]
        py = points[i, 1]
        best = 1e300
        inside = False
        for j in range(m):
            ax = poly[j, 0]
            ay = poly[j, 1]
            k = j + 1 if j + 1 < m else 0
            bx = poly[k, 0]
            by = poly[k, 1]
            abx = bx - ax
            aby = by - ay
            denom = abx * abx + aby * aby
            if denom < 1e-300:
                denom = 1e-300
            t = ((px - ax) * abx + (py - ay) * aby) / denom
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            dx = px - (ax + t * abx)
            dy = py - (ay + t * aby)
            d2 = dx * dx + dy * dy
            if d2 < best:
                best = d2
            if (ay > py) != (by > py):
                xint = ax + (py - ay) * (bx - ax) / (by - ay)
                if px < xint:
                    inside = not inside
        d = np.sqrt(best)
        out[i] = -d if inside else d
    return out


polygon_sdist_numba = _njit(_polygon_sdist_loop)


# ---------------------------------------------------------------------------
# spring-force scatter for the mesh relaxation loop


def bar_forces_numpy(points, bars, force):
    out = np.zeros_like(points)
    np.add.at(out, bars[:, 0], force)
    np.add.at(out, bars[:, 1], -force)
    return out


def _bar_forces_loop(points, bars, force):
    out = np.zeros_like(points)
    for i in range(bars.shape[0]):
        a = bars[i, 0]
        b = bars[i, 1]
        out[a, 0] += force[i, 0]
        out[a, 1] += force[i, 1]
        out[b, 0] -= force[i, 0]
        out[b, 1] -= force[i, 1]
    return out


bar_forces_numba = _njit(_bar_forces_loop)


# ---------------------------------------------------------------------------
# convection matrix data for quadratic triangle elements
#
# Computes entries c[i,j] = sum_q w_q * area * N_i(q) * (w(q) . grad N_j(q))
# per element and scatters them into a preallocated CSR data array through
# the element-to-slot map. ``shape`` holds N_i at the quadrature points,
# ``lam`` the barycentric coordinates of the points, ``glam`` the constant
# barycentric gradients per element.


def convection_data_numpy(tri6, glam, area, wx, wy, lam, wq, shape, slots, nnz):
    nt = tri6.shape[0]
    nq = lam.shape[0]
    # grad N at quadrature points: (T, Q, 6, 2)
    gN = np.empty((nt, nq, 6, 2))
    for q in range(nq):
        l0, l1, l2 = lam[q]
        gN[:, q, 0, :] = (4.0 * l0 - 1.0) * glam[:, 0, :]
        gN[:, q, 1, :] = (4.0 * l1 - 1.0) * glam[:, 1, :]
        gN[:, q, 2, :] = (4.0 * l2 - 1.0) * glam[:, 2, :]
        gN[:, q, 3, :] = 4.0 * (l1 * glam[:, 0, :] + l0 * glam[:, 1, :])
        gN[:, q, 4, :] = 4.0 * (l2 * glam[:, 1, :] + l1 * glam[:, 2, :])
        gN[:, q, 5, :] = 4.0 * (l0 * glam[:, 2, :] + l2 * glam[:, 0, :])
    wloc_x = wx[tri6]  # (T, 6)
    wloc_y = wy[tri6]
    wqx = wloc_x @ shape.T  # (T, Q)
    wqy = wloc_y @ shape.T
    conv = wqx[:, :, None] * gN[:, :, :, 0] + wqy[:, :, None] * gN[:, :, :, 1]
    cell = np.einsum("q,tqi,tqj->tij", wq, np.broadcast_to(shape, (nt, nq, 6)), conv)
    cell *= area[:, None, None]
    data = np.zeros(nnz)
    np.add.at(data, slots.ravel(), cell.ravel())
    return data


def _convection_data_loop(tri6, glam, area, wx, wy, lam, wq, shape, slots, nnz):
    data = np.zeros(nnz)
    nt = tri6.shape[0]
    nq = lam.shape[0]
    gN = np.empty((6, 2))
    for t in range(nt):
        a = area[t]
        g00 = glam[t, 0, 0]
        g01 = glam[t, 0, 1]
        g10 = glam[t, 1, 0]
        g11 = glam[t, 1, 1]
        g20 = glam[t, 2, 0]
        g21 = glam[t, 2, 1]
        for q in range(nq):
            l0 = lam[q, 0]
            l1 = lam[q, 1]
            l2 = lam[q, 2]
            gN[0, 0] = (4.0 * l0 - 1.0) * g00
            gN[0, 1] = (4.0 * l0 - 1.0) * g01
            gN[1, 0] = (4.0 * l1 - 1.0) * g10
            gN[1, 1] = (4.0 * l1 - 1.0) * g11
            gN[2, 0] = (4.0 * l2 - 1.0) * g20
            gN[2, 1] = (4.0 * l2 - 1.0) * g21
            gN[3, 0] = 4.0 * (l1 * g00 + l0 * g10)
            gN[3, 1] = 4.0 * (l1 * g01 + l0 * g11)
            gN[4, 0] = 4.0 * (l2 * g10 + l1 * g20)
            gN[4, 1] = 4.0 * (l2 * g11 + l1 * g21)
            gN[5, 0] = 4.0 * (l0 * g20 + l2 * g00)
            gN[5, 1] = 4.0 * (l0 * g21 + l2 * g01)
            ux = 0.0
            uy = 0.0
            for j in range(6):
                ux += shape[q, j] * wx[tri6[t, j]]
                uy += shape[q, j] * wy[tri6[t, j]]
            coef = wq[q] * a
            for i in range(6):
                ni = coef * shape[q, i]
                for j in range(6):
                    data[slots[t, i, j]] += ni * (ux * gN[j, 0] + uy * gN[j, 1])
    return data


convection_data_numba = _njit(_convection_data_loop)


KERNEL_VARIANTS = {
    "segment_sum": (segment_sum_numpy, segment_sum_numba),
    "polygon_sdist": (polygon_sdist_numpy, polygon_sdist_numba),
    "bar_forces": (bar_forces_numpy, bar_forces_numba),
    "convection_data": (convection_data_numpy, convection_data_numba),
}

if USE_NUMBA:
    segment_sum = segment_sum_numba
    polygon_sdist = polygon_sdist_numba
    bar_forces = bar_forces_numba
    convection_data = convection_data_numba
else:
    segment_sum = segment_sum_numpy
    polygon_sdist = polygon_sdist_numpy
    bar_forces = bar_forces_numpy
    convection_data = convection_data_numpy
