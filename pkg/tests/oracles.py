"""Independent reference implementations used by several test modules.

Nothing here imports the matching core; the oracles are written as plain
loops so that they can be read against the recurrences directly.
"""

import numpy as np

# predecessor offsets (dx, dy) of the four causal paths
PATH_OFFSETS = {0: (-1, 0), 45: (-1, -1), 90: (0, -1), 135: (1, -1)}

INF = float("inf")


def oracle_direction(cost, img, p1, p2base, dx, dy):
    """Walk every 1-D path line of one direction with scalar dynamic programming.

    A line starts at each pixel whose predecessor (x + dx, y + dy) is outside
    the image and advances by (-dx, -dy).
    """
    h, w, dmax = cost.shape
    out = np.full(cost.shape, -1, dtype=np.int64)
    for y0 in range(h):
        for x0 in range(w):
            if 0 <= x0 + dx < w and 0 <= y0 + dy < h:
                continue
            x, y = x0, y0
            prev = None
            prev_i = None
            while 0 <= x < w and 0 <= y < h:
                c = [int(v) for v in cost[y, x]]
                if prev is None:
                    cur = c
                else:
                    g = abs(int(img[y, x]) - prev_i)
                    p2 = p2base if g == 0 else max(p1, p2base // g)
                    m = min(prev)
                    cur = []
                    for d in range(dmax):
                        lo = prev[d - 1] + p1 if d > 0 else INF
                        hi = prev[d + 1] + p1 if d < dmax - 1 else INF
                        cur.append(int(c[d] + min(prev[d], lo, hi, m + p2) - m))
                out[y, x] = cur
                prev, prev_i = cur, int(img[y, x])
                x, y = x - dx, y - dy
    assert (out >= 0).all()
    return out


def oracle_aggregate(cost, img, pen):
    return sum(oracle_direction(cost, img, pen.p1, pen.p2_base, *PATH_OFFSETS[r])
               for r in (0, 45, 90, 135))


def window_rank_costs(wl, wr):
    """(C_RT, C_RSAD, C_R) of two equally sized windows, centre at the middle."""
    wl, wr = np.asarray(wl).ravel().tolist(), np.asarray(wr).ravel().tolist()
    cl, cr = wl[len(wl) // 2], wr[len(wr) // 2]
    bl = [int(v < cl) for v in wl]
    br = [int(v < cr) for v in wr]
    rt = abs(sum(bl) - sum(br))
    rsad = sum(abs(a - b) for a, b in zip(bl, br))
    return rt, rsad, rt + rsad
