"""Small numerical kernels: stencils, quadrature, spectral helpers.

Everything in here works on plain numpy arrays.  Sampled-curve code calls
these on uniform parameter grids; closed (periodic) data gets wrap-around
stencils and trigonometric machinery, open data gets one-sided stencils.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def is_uniform(params, rel_tol=1e-9):
    """True when the parameter grid is uniformly spaced."""
    gaps = np.diff(params)
    h = gaps.mean()
    return h > 0 and np.max(np.abs(gaps - h)) <= rel_tol * h


def wrap_angle(theta):
    """Map an angle to the interval (-pi, pi]."""
    out = np.remainder(theta + np.pi, TWO_PI) - np.pi
    if np.isscalar(out) or out.ndim == 0:
        return float(TWO_PI + out) if out <= -np.pi else float(out)
    out[out <= -np.pi] += TWO_PI
    return out


def bbox_diameter(points):
    """Diagonal of the axis-aligned bounding box of a point set."""
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    return float(np.linalg.norm(hi - lo))


def fd_weights(x, x0, m):
    """Finite-difference weights on arbitrary nodes (Fornberg's recursion).

    Parameters
    ----------
    x : array of node locations.
    x0 : evaluation point.
    m : highest derivative order needed.

    Returns
    -------
    (m+1, len(x)) array; row k holds the weights of the k-th derivative.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    w = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - x0
    w[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    w[k, i] = c1 * (k * w[k - 1, i - 1] - c5 * w[k, i - 1]) / c2
                w[0, i] = -c1 * c5 * w[0, i - 1] / c2
            for k in range(mn, 0, -1):
                w[k, j] = ((x[i] - x0) * w[k, j] - k * w[k - 1, j]) / c3
            w[0, j] = (x[i] - x0) * w[0, j] / c3
        c1 = c2
    return w


# 4th-order central stencils on uniform grids, offsets are symmetric.
_D1 = (np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0, 2)
_D2 = (np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0, 2)
_D3 = (np.array([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0]) / 8.0, 3)


def _apply_periodic(values, coeffs, reach, h, order):
    out = np.zeros_like(values, dtype=float)
    for k, c in zip(range(-reach, reach + 1), coeffs):
        if c != 0.0:
            out += c * np.roll(values, -k, axis=0)
    return out / h**order


def fd_derivatives_periodic(values, h, orders=(1, 2, 3)):
    """4th-order accurate derivatives of periodic samples on a uniform grid.

    `values` has shape (N, ...) with axis 0 the periodic parameter axis.
    Returns a tuple with one array per requested order.
    """
    table = {1: _D1, 2: _D2, 3: _D3}
    out = []
    for order in orders:
        coeffs, reach = table[order]
        out.append(_apply_periodic(values, coeffs, reach, h, order))
    return tuple(out)


def fd_derivatives_open(values, h, orders=(1, 2, 3)):
    """4th-order derivatives of non-periodic uniform samples.

    Central stencils in the interior, Fornberg one-sided stencils near the
    ends.  Needs at least 7 samples.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    table = {1: _D1, 2: _D2, 3: _D3}
    width = max(orders) + 4  # nodes needed by the one-sided stencils
    if n < width:
        raise ValueError("too few samples for 4th-order open stencils")
    out = []
    for order in orders:
        coeffs, reach = table[order]
        res = np.zeros_like(values, dtype=float)
        acc = np.zeros_like(values[reach : n - reach], dtype=float)
        for k, c in zip(range(-reach, reach + 1), coeffs):
            if c != 0.0:
                acc += c * values[reach + k : n - reach + k]
        res[reach : n - reach] = acc / h**order
        nodes = np.arange(width) * h
        for i in range(reach):
            w = fd_weights(nodes, i * h, order)[order]
            res[i] = np.tensordot(w, values[:width], axes=(0, 0))
            wb = fd_weights(nodes, (width - 1 - i) * h, order)[order]
            res[n - 1 - i] = np.tensordot(wb, values[n - width :], axes=(0, 0))
        out.append(res)
    return tuple(out)


def periodic_trapezoid(values, period):
    """Integral of periodic samples over one period (exact for band-limited data)."""
    values = np.asarray(values, dtype=float)
    out = np.mean(values, axis=0) * period
    return float(out) if values.ndim == 1 else out


def _wavenumbers(n, period):
    return TWO_PI * np.fft.rfftfreq(n, d=period / n)


def spectral_derivatives(values, period, orders=(1,)):
    """Fourier differentiation of periodic samples on a uniform grid."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    coeffs = np.fft.rfft(values, axis=0)
    k = _wavenumbers(n, period)
    shape = (len(k),) + (1,) * (values.ndim - 1)
    ik = (1j * k).reshape(shape)
    out = []
    for order in orders:
        c = coeffs * ik**order
        if n % 2 == 0 and order % 2 == 1:
            c[-1] = 0.0  # Nyquist mode has no odd derivative
        out.append(np.fft.irfft(c, n=n, axis=0))
    return tuple(out)


def spectral_antiderivative(values, period):
    """Cumulative integral F with F(0) = 0 of periodic samples.

    Splits off the mean (secular part) and integrates the oscillatory part in
    Fourier space, so interior values are spectrally accurate and
    F(t_j) - mean * t_j is periodic.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    mean = values.mean(axis=0)
    coeffs = np.fft.rfft(values - mean, axis=0)
    k = _wavenumbers(n, period)
    shape = (len(k),) + (1,) * (values.ndim - 1)
    divisor = (1j * k).reshape(shape)
    divisor[0] = 1.0  # mean already removed
    prim = coeffs / divisor
    prim[0] = 0.0
    if n % 2 == 0:
        prim[-1] = 0.0
    osc = np.fft.irfft(prim, n=n, axis=0)
    t = (np.arange(n) * (period / n)).reshape((n,) + (1,) * (values.ndim - 1))
    out = osc - osc[0] + mean * t
    return out


def spectral_interpolate(values, period, t, t0=0.0):
    """Evaluate the trigonometric interpolant of periodic uniform samples.

    `values` has shape (n, ...) sampled at t0 + j * period / n; the result
    holds the interpolant at the arbitrary parameters `t` and is exact for
    band-limited data.  Evaluation is chunked to bound the phase matrix.
    """
    values = np.asarray(values, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = values.shape[0]
    coeffs = np.fft.rfft(values, axis=0)
    k = _wavenumbers(n, period)
    weights = np.full(len(k), 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0  # the real Nyquist mode appears once
    flat = (weights[:, None] * coeffs.reshape(len(k), -1)) / n
    out = np.empty((t.shape[0], flat.shape[1]))
    for lo in range(0, t.shape[0], 4096):
        chunk = t[lo:lo + 4096] - t0
        out[lo:lo + 4096] = (np.exp(1j * np.outer(chunk, k)) @ flat).real
    return out.reshape(t.shape + values.shape[1:])


def spectral_resample(values, n_new):
    """Resample periodic uniform samples onto a finer/coarser uniform grid."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n_new == n:
        return values.copy()
    coeffs = np.fft.rfft(values, axis=0)
    n_half = n_new // 2 + 1
    new_coeffs = np.zeros((n_half,) + values.shape[1:], dtype=complex)
    m = min(n_half, coeffs.shape[0])
    new_coeffs[:m] = coeffs[:m]
    if n % 2 == 0 and m == coeffs.shape[0] and n_new > n:
        new_coeffs[m - 1] *= 0.5  # split the Nyquist mode symmetrically
    return np.fft.irfft(new_coeffs, n=n_new, axis=0) * (n_new / n)


def orthonormalize_frame(m):
    """Nearest rotation matrix (polar factor) to a 3x3 matrix."""
    u, _, vt = np.linalg.svd(m)
    r = u @ vt
    if np.linalg.det(r) < 0:
        u[:, -1] = -u[:, -1]
        r = u @ vt
    return r


def unit(v, eps=0.0):
    """Normalize the rows of v (or a single vector)."""
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        n = np.linalg.norm(v)
        if n <= eps:
            raise ZeroDivisionError("zero vector in unit()")
        return v / n
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / n


def rotation_about_axis(axis, angle):
    """Rotation matrix about a unit axis (Rodrigues)."""
    a = unit(np.asarray(axis, dtype=float))
    k = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def cumulative_gauss(speed, grid, order=5):
    """Cumulative integral of a positive callable between grid nodes.

    Uses fixed-order Gauss-Legendre on every interval; `speed` must accept a
    vector of parameters.  Returns an array aligned with `grid`, starting at 0.
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    a = grid[:-1]
    b = grid[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = speed(pts.ravel()).reshape(pts.shape)
    seg = half * (vals @ weights)
    out = np.empty(len(grid))
    out[0] = 0.0
    np.cumsum(seg, out=out[1:])
    return out
