# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""

import math

import numpy as np
from libc.math cimport exp, sqrt, pow, ceil, log, fabs
from libc.stdlib cimport malloc, free

GL_ORDER = 64
_glx, _glw = np.polynomial.legendre.leggauss(GL_ORDER)
cdef double[::1] _U = np.ascontiguousarray(0.5 * (_glx + 1.0))
cdef double[::1] _UW = np.ascontiguousarray(0.5 * _glw)


def sphere_area(int n):
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


cdef inline double _bump(double t) nogil:
    if fabs(t) >= 1.0:
        return 0.0
    return exp(1.0 - 1.0 / (1.0 - t * t))


def bump(t):
    cdef double[::1] tv = np.ascontiguousarray(np.atleast_1d(np.asarray(t, dtype=float)).ravel())
    out = np.empty(tv.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(tv.shape[0]):
        o[i] = _bump(tv[i])
    return out.reshape(np.shape(t)) if np.ndim(t) else out


cdef double _mass(int n) nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(_U.shape[0]):
        s += _UW[i] * _bump(_U[i]) * pow(_U[i], n - 1)
    return s


def bump_mass(int n):
    return sphere_area(n) * _mass(n)


cdef inline double _profile(double t, int n, double area, double mass) nogil:
    cdef double inner = 0.0, outer = 0.0, a, b
    cdef Py_ssize_t i
    if t >= 1.0:
        return mass * pow(t, 2 - n)
    for i in range(_U.shape[0]):
        a = t * _U[i]
        inner += _UW[i] * _bump(a) * pow(a, n - 1)
        b = t + (1.0 - t) * _U[i]
        outer += _UW[i] * _bump(b) * b
    inner *= t
    outer *= 1.0 - t
    if t > 0.0:
        return area * (inner / pow(t, n - 2) + outer)
    return area * outer


def radial_profile(t, int n):
    cdef double[::1] tv = np.ascontiguousarray(np.atleast_1d(np.asarray(t, dtype=float)).ravel())
    out = np.empty(tv.shape[0])
    cdef double[::1] o = out
    cdef double area = sphere_area(n)
    cdef double mass = area * _mass(n)
    cdef Py_ssize_t i
    with nogil:
        for i in range(tv.shape[0]):
            o[i] = _profile(tv[i], n, area, mass)
    return out


TABLE_SIZE = 8192
_TABLES = {}


def profile_table(int n):
    """Values and t-derivatives of the profile potential on TABLE_SIZE+1 nodes of [0, 1]."""
    if n in _TABLES:
        return _TABLES[n]
    vals = np.empty(TABLE_SIZE + 1)
    der = np.empty(TABLE_SIZE + 1)
    cdef double[::1] V = vals
    cdef double[::1] Dv = der
    cdef double area = sphere_area(n)
    cdef double mass = area * _mass(n)
    cdef Py_ssize_t k, i
    cdef double t, a, inner
    for k in range(TABLE_SIZE + 1):
        t = k / <double>TABLE_SIZE
        V[k] = _profile(t, n, area, mass)
        inner = 0.0
        for i in range(_U.shape[0]):
            a = t * _U[i]
            inner += _UW[i] * _bump(a) * pow(a, n - 1)
        Dv[k] = (2 - n) * area * inner * t / pow(t, n - 1) if t > 0 else 0.0
    _TABLES[n] = (vals, der)
    return _TABLES[n]


cdef inline double _profile_fast(double t, int n, double mass, double[::1] V,
                                 double[::1] Dv, Py_ssize_t size) nogil:
    cdef double tn, u, u2, u3, h
    cdef Py_ssize_t i
    if t >= 1.0:
        return mass * pow(t, 2 - n)
    tn = t * size
    i = <Py_ssize_t>tn
    if i > size - 1:
        i = size - 1
    u = tn - i
    h = 1.0 / size
    u2 = u * u
    u3 = u2 * u
    return ((2 * u3 - 3 * u2 + 1) * V[i] + (u3 - 2 * u2 + u) * h * Dv[i]
            + (-2 * u3 + 3 * u2) * V[i + 1] + (u3 - u2) * h * Dv[i + 1])


def family_potential(points, centers, radii, amps, int n):
    cdef double[:, ::1] P = np.ascontiguousarray(points, dtype=float)
    cdef double[:, ::1] C = np.ascontiguousarray(np.reshape(centers, (-1, P.shape[1])), dtype=float)
    cdef double[::1] R = np.ascontiguousarray(radii, dtype=float)
    cdef double[::1] A = np.ascontiguousarray(amps, dtype=float)
    vals, der = profile_table(n)
    cdef double[::1] V = vals
    cdef double[::1] Dv = der
    cdef Py_ssize_t size = TABLE_SIZE
    out = np.zeros(P.shape[0])
    cdef double[::1] o = out
    cdef double mass = sphere_area(n) * _mass(n)
    cdef Py_ssize_t i, j, k
    cdef double d2, diff
    with nogil:
        for i in range(P.shape[0]):
            for j in range(C.shape[0]):
                d2 = 0.0
                for k in range(P.shape[1]):
                    diff = P[i, k] - C[j, k]
                    d2 += diff * diff
                o[i] += A[j] * _profile_fast(sqrt(d2) / R[j], n, mass, V, Dv, size)
    return out


def family_source(points, centers, radii, amps):
    cdef double[:, ::1] P = np.ascontiguousarray(points, dtype=float)
    cdef double[:, ::1] C = np.ascontiguousarray(np.reshape(centers, (-1, P.shape[1])), dtype=float)
    cdef double[::1] R = np.ascontiguousarray(radii, dtype=float)
    cdef double[::1] A = np.ascontiguousarray(amps, dtype=float)
    out = np.zeros(P.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double d2, diff
    with nogil:
        for i in range(P.shape[0]):
            for j in range(C.shape[0]):
                d2 = 0.0
                for k in range(P.shape[1]):
                    diff = P[i, k] - C[j, k]
                    d2 += diff * diff
                o[i] += A[j] * _bump(sqrt(d2) / R[j])
    return out


cdef inline int _chord(double[::1] x, double[:, ::1] dirs, Py_ssize_t r,
                       double[::1] c, double radius, double* lo, double* hi) nogil:
    cdef double b = 0.0, dd = 0.0, d, disc, s
    cdef Py_ssize_t k
    for k in range(x.shape[0]):
        d = x[k] - c[k]
        b += d * dirs[r, k]
        dd += d * d
    disc = b * b - (dd - radius * radius)
    if disc <= 0.0:
        return 0
    s = sqrt(disc)
    lo[0] = -b - s
    hi[0] = -b + s
    return 1


def ray_nodes(x, dirs, dir_w, dom_c, double dom_r, hole_c, hole_r, double rho_min,
              double ratio, glx, glw, double kexp):
    cdef double[::1] X = np.ascontiguousarray(x, dtype=float)
    cdef Py_ssize_t n = X.shape[0]
    cdef double[:, ::1] D = np.ascontiguousarray(dirs, dtype=float)
    cdef double[::1] DW = np.ascontiguousarray(dir_w, dtype=float)
    cdef double[::1] DC = np.ascontiguousarray(dom_c, dtype=float)
    cdef double[:, ::1] HC = np.ascontiguousarray(np.reshape(hole_c, (-1, n)), dtype=float)
    cdef double[::1] HR = np.ascontiguousarray(hole_r, dtype=float)
    cdef double[::1] GX = np.ascontiguousarray(glx, dtype=float)
    cdef double[::1] GW = np.ascontiguousarray(glw, dtype=float)
    cdef Py_ssize_t H = HR.shape[0], q = GX.shape[0], ndir = D.shape[0]
    cdef double reach = 0.0
    cdef Py_ssize_t k
    for k in range(n):
        reach += (X[k] - DC[k]) * (X[k] - DC[k])
    reach = sqrt(reach) + dom_r
    cdef Py_ssize_t nrings = <Py_ssize_t>ceil(log(max(reach / rho_min, 1.0)) / log(ratio)) + 2
    cdef Py_ssize_t maxcuts = nrings + 2 * H + 2
    cap = ndir * maxcuts * q
    pts = np.empty((cap, n))
    wts = np.empty(cap)
    cdef double[:, ::1] P = pts
    cdef double[::1] W = wts
    cdef double* cuts = <double*>malloc(maxcuts * sizeof(double))
    cdef double* h0 = <double*>malloc((H + 1) * sizeof(double))
    cdef double* h1 = <double*>malloc((H + 1) * sizeof(double))
    cdef Py_ssize_t r, h, nc, nh, i, j, m = 0
    cdef double lo, hi, a, b, mid, wa, wb, wn, rho, tmp, rr
    cdef int skip
    try:
        with nogil:
            for r in range(ndir):
                if not _chord(X, D, r, DC, dom_r, &lo, &hi):
                    continue
                if lo < 0.0:
                    lo = 0.0
                if hi <= lo:
                    continue
                nc = 0
                cuts[nc] = lo; nc += 1
                cuts[nc] = hi; nc += 1
                nh = 0
                for h in range(H):
                    if not _chord(X, D, r, HC[h], HR[h], &a, &b):
                        continue
                    if b <= lo or a >= hi:
                        continue
                    h0[nh] = a; h1[nh] = b; nh += 1
                    if lo < a < hi:
                        cuts[nc] = a; nc += 1
                    if lo < b < hi:
                        cuts[nc] = b; nc += 1
                rr = rho_min
                while rr < hi and nc < maxcuts:
                    if rr > lo:
                        cuts[nc] = rr; nc += 1
                    rr *= ratio
                # insertion sort, nc is small
                for i in range(1, nc):
                    tmp = cuts[i]
                    j = i - 1
                    while j >= 0 and cuts[j] > tmp:
                        cuts[j + 1] = cuts[j]
                        j -= 1
                    cuts[j + 1] = tmp
                for i in range(nc - 1):
                    a = cuts[i]
                    b = cuts[i + 1]
                    if b <= a:
                        continue
                    mid = 0.5 * (a + b)
                    skip = 0
                    for h in range(nh):
                        if h0[h] < mid < h1[h]:
                            skip = 1
                            break
                    if skip:
                        continue
                    wa = pow(a, kexp)
                    wb = pow(b, kexp)
                    for j in range(q):
                        wn = wa + (wb - wa) * 0.5 * (GX[j] + 1.0)
                        rho = pow(wn, 1.0 / kexp)
                        for k in range(n):
                            P[m, k] = X[k] + rho * D[r, k]
                        W[m] = DW[r] * 0.5 * (wb - wa) * GW[j] / kexp
                        m += 1
    finally:
        free(cuts)
        free(h0)
        free(h1)
    return pts[:m].copy(), wts[:m].copy()


def ball_nodes(center, double radius, double core, dirs, dir_w, double ratio, glx, glw,
               x, double alpha, int n):
    cdef double[::1] C = np.ascontiguousarray(center, dtype=float)
    cdef double[::1] X = np.ascontiguousarray(x, dtype=float)
    cdef double[:, ::1] D = np.ascontiguousarray(dirs, dtype=float)
    cdef double[::1] DW = np.ascontiguousarray(dir_w, dtype=float)
    cdef double[::1] GX = np.ascontiguousarray(glx, dtype=float)
    cdef double[::1] GW = np.ascontiguousarray(glw, dtype=float)
    cuts_l = [radius]
    r0 = radius
    while r0 > core:
        r0 /= ratio
        cuts_l.append(r0)
    cuts_l.append(0.0)
    cdef double[::1] cuts = np.ascontiguousarray(cuts_l[::-1], dtype=float)
    cdef Py_ssize_t nseg = cuts.shape[0] - 1, q = GX.shape[0], ndir = D.shape[0], dim = C.shape[0]
    pts = np.empty((nseg * q * ndir, dim))
    wts = np.empty(nseg * q * ndir)
    cdef double[:, ::1] P = pts
    cdef double[::1] W = wts
    cdef Py_ssize_t s, j, r, k, m = 0
    cdef double a, b, rho, rw, d2, diff, y
    with nogil:
        for s in range(nseg):
            a = cuts[s]
            b = cuts[s + 1]
            for j in range(q):
                rho = a + (b - a) * 0.5 * (GX[j] + 1.0)
                rw = (b - a) * 0.5 * GW[j] * pow(rho, n - 1)
                for r in range(ndir):
                    d2 = 0.0
                    for k in range(dim):
                        y = C[k] + rho * D[r, k]
                        P[m, k] = y
                        diff = y - X[k]
                        d2 += diff * diff
                    W[m] = rw * DW[r] * pow(d2, -0.5 * alpha)
                    m += 1
    return pts, wts
