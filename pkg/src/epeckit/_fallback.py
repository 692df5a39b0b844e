"""Pure-NumPy kernels, used when the compiled extension is unavailable.

Must match epeckit._speedups semantics bit-for-bit on well-scaled inputs.
"""

import numpy as np

_CHUNK = 65536


def eval_point(coeffs, exps, point):
    if coeffs.shape[0] == 0:
        return 0.0
    monos = np.prod(np.asarray(point)[None, :] ** exps, axis=1)
    return float(monos @ coeffs)


def eval_batch(coeffs, exps, points, out):
    n = points.shape[0]
    if coeffs.shape[0] == 0:
        out[:] = 0.0
        return
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        monos = np.prod(points[lo:hi, None, :] ** exps[None, :, :], axis=2)
        out[lo:hi] = monos @ coeffs


def eval_grad(coeffs, exps, point, out):
    out[:] = 0.0
    if coeffs.shape[0] == 0:
        return
    point = np.asarray(point)
    for v in range(exps.shape[1]):
        ev = exps[:, v]
        mask = ev >= 1
        if not mask.any():
            continue
        de = exps[mask].copy()
        de[:, v] -= 1
        monos = np.prod(point[None, :] ** de, axis=1)
        out[v] = float((coeffs[mask] * ev[mask]) @ monos)
