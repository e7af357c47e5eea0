"""Numba kernel for forward/backward raster sweeps of the geodesic transform."""

from __future__ import annotations

import numba
import numpy as np


def causal_offsets(neighborhood: int, spacing) -> tuple[np.ndarray, np.ndarray]:
    """Scan-order-preceding neighbor offsets and their squared physical lengths.

    Offsets are lexicographically negative in (x, y, z); the backward sweep
    uses their negation. 6-neighborhood yields 3 offsets, 26 yields 13.
    """
    sx, sy, sz = spacing
    offs = []
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                if (dx, dy, dz) == (0, 0, 0):
                    continue
                if neighborhood == 6 and abs(dx) + abs(dy) + abs(dz) != 1:
                    continue
                if dx < 0 or (dx == 0 and dy < 0) or (dx == 0 and dy == 0 and dz < 0):
                    offs.append((dx, dy, dz))
    offs_arr = np.asarray(offs, dtype=np.int64)
    spat2 = (
        (offs_arr[:, 0] * sx) ** 2 + (offs_arr[:, 1] * sy) ** 2 + (offs_arr[:, 2] * sz) ** 2
    ).astype(np.float64)
    return offs_arr, spat2


@numba.njit(cache=True)
def sweep(dist, image, offs, spat2, lam2, x0, x1, y0, y1, z0, z1, forward):
    """One raster sweep over the box [x0,x1)×[y0,y1)×[z0,z1).

    Relaxes each voxel against its already-visited neighbors; never increases
    any distance. Returns the number of voxels visited.
    """
    k_count = offs.shape[0]
    visits = 0
    if forward:
        xs, xe, ys, ye, zs, ze, step = x0, x1, y0, y1, z0, z1, 1
    else:
        xs, xe, ys, ye, zs, ze, step = x1 - 1, x0 - 1, y1 - 1, y0 - 1, z1 - 1, z0 - 1, -1
    for x in range(xs, xe, step):
        for y in range(ys, ye, step):
            for z in range(zs, ze, step):
                visits += 1
                best = dist[x, y, z]
                val = image[x, y, z]
                for k in range(k_count):
                    ux = x + offs[k, 0]
                    uy = y + offs[k, 1]
                    uz = z + offs[k, 2]
                    if ux < x0 or ux >= x1 or uy < y0 or uy >= y1 or uz < z0 or uz >= z1:
                        continue
                    di = val - image[ux, uy, uz]
                    cand = dist[ux, uy, uz] + np.sqrt(spat2[k] + lam2 * di * di)
                    if cand < best:
                        best = cand
                dist[x, y, z] = best
    return visits
