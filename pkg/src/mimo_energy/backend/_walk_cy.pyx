# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementation of the random-walk hot kernels.

Mirrors ``_walk_np`` exactly; the per-row loops avoid the temporary arrays of
the vectorized fallback.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow

DEF MAX_BOUNCES = 16


def advance_billiard(double[:, ::1] pos, double[:, ::1] steps, double radius):
    cdef Py_ssize_t i, n = pos.shape[0]
    cdef int bounce
    cdef double r2 = radius * radius
    cdef double px, py, qx, qy, dx, dy, a, b, c, disc, t
    cdef double hx, hy, nx, ny, rx, ry, dot, norm, scale
    for i in range(n):
        px = pos[i, 0]
        py = pos[i, 1]
        qx = px + steps[i, 0]
        qy = py + steps[i, 1]
        bounce = 0
        while qx * qx + qy * qy > r2 and bounce < MAX_BOUNCES:
            dx = qx - px
            dy = qy - py
            a = dx * dx + dy * dy
            b = px * dx + py * dy
            c = px * px + py * py - r2
            disc = b * b - a * c
            if disc < 0.0:
                disc = 0.0
            t = (-b + sqrt(disc)) / a
            hx = px + t * dx
            hy = py + t * dy
            nx = hx / radius
            ny = hy / radius
            rx = qx - hx
            ry = qy - hy
            dot = rx * nx + ry * ny
            qx = hx + rx - 2.0 * dot * nx
            qy = hy + ry - 2.0 * dot * ny
            px = hx
            py = hy
            bounce += 1
        norm = sqrt(qx * qx + qy * qy)
        if norm > radius:
            scale = radius / norm
            qx *= scale
            qy *= scale
        pos[i, 0] = qx
        pos[i, 1] = qy


def weighted_inv_pathloss_sums(double[:, ::1] pos, double[::1] weights,
                               Py_ssize_t group, double beta, double xbar_m,
                               double l_xbar, double[::1] out):
    cdef Py_ssize_t i, n = pos.shape[0]
    cdef double r2, rb
    cdef double xbar_b = pow(xbar_m, beta)
    cdef double inv_two_l = 1.0 / (2.0 * l_xbar)
    cdef int kind = 0
    if beta == 4.0:
        kind = 4
    elif beta == 6.0:
        kind = 6
    elif beta == 2.0:
        kind = 2
    cdef double acc = 0.0
    cdef Py_ssize_t g = 0, in_group = 0
    for i in range(n):
        r2 = pos[i, 0] * pos[i, 0] + pos[i, 1] * pos[i, 1]
        if kind == 4:
            rb = r2 * r2
        elif kind == 6:
            rb = r2 * r2 * r2
        elif kind == 2:
            rb = r2
        else:
            rb = pow(r2, beta / 2.0)
        acc += weights[i] * (1.0 + rb / xbar_b) * inv_two_l
        in_group += 1
        if in_group == group:
            out[g] += acc
            acc = 0.0
            in_group = 0
            g += 1
