"""NumPy implementation of the random-walk hot kernels.

Semantics must match ``_walk_cy`` exactly; only the execution strategy
(vectorized masks here, per-row C loops there) differs.
"""

from __future__ import annotations

import numpy as np

_MAX_BOUNCES = 16


def advance_billiard(pos: np.ndarray, steps: np.ndarray, radius: float) -> None:
    """Advance positions by ``steps`` inside the disc, folding the path
    specularly at the boundary (possibly repeatedly). In-place on ``pos``.
    """
    r2 = radius * radius
    p = pos
    q = pos + steps
    for _ in range(_MAX_BOUNCES):
        out = np.einsum("ij,ij->i", q, q) > r2
        if not out.any():
            break
        po = p[out]
        d = q[out] - po
        a = np.einsum("ij,ij->i", d, d)
        b = np.einsum("ij,ij->i", po, d)
        c = np.einsum("ij,ij->i", po, po) - r2
        # first crossing of the chord with the circle (c <= 0 inside)
        t = (-b + np.sqrt(np.maximum(b * b - a * c, 0.0))) / a
        hit = po + t[:, None] * d
        normal = hit / radius
        rem = q[out] - hit
        dot = np.einsum("ij,ij->i", rem, normal)
        q_out = hit + rem - 2.0 * dot[:, None] * normal
        if p is pos:
            p = pos.copy()
        p[out] = hit
        q[out] = q_out
    norm = np.sqrt(np.einsum("ij,ij->i", q, q))
    over = norm > radius
    if over.any():
        q[over] *= (radius / norm[over])[:, None]
    pos[:] = q


def weighted_inv_pathloss_sums(pos: np.ndarray, weights: np.ndarray,
                               group: int, beta: float, xbar_m: float,
                               l_xbar: float, out: np.ndarray) -> None:
    """Accumulate per-group sums of w_i / l(x_i) into ``out``.

    Rows of ``pos`` are grouped in consecutive blocks of ``group`` (one block
    per trial); ``out`` has one slot per block and is added to in place.
    """
    r2 = pos[:, 0] ** 2 + pos[:, 1] ** 2
    if beta == 4.0:
        rb = r2 * r2
    elif beta == 6.0:
        rb = r2 * r2 * r2
    elif beta == 2.0:
        rb = r2
    else:
        rb = r2 ** (beta / 2.0)
    inv_l = (1.0 + rb / xbar_m**beta) / (2.0 * l_xbar)
    out += (weights * inv_l).reshape(-1, group).sum(axis=1)
