"""Pure-numpy implementations of the two hot kernels.

These are the reference implementations; spinbath._kernels_c provides
compiled twins with identical signatures and semantics. Everything here is
vectorised but allocation-heavy, which is what the compiled path avoids.
"""
from __future__ import annotations

import numpy as np

__all__ = ["uniaxial_log_factors", "window_filter", "semiclassical_matrices"]


def uniaxial_log_factors(A, N, p, t_M, t_I):
    """Log-domain per-dot products of cluster factors for the uniaxial model.

    For each flattened grid point (t_M[i], t_I[i]) this evaluates the two
    single-spin matrix elements a' and a'' per cluster, forms the binomial
    cluster factor z = p*a + (1-p)*conj(a), and accumulates

        L = sum_j N_j log|z_j|,   phi = sum_j N_j arg(z_j)

    so the dot product S = exp(L + i phi) never underflows for populations
    in the 1e6 range.

    Parameters
    ----------
    A, N : (nc,) float arrays, cluster couplings (rad/s) and populations
    p : spin-up probability of the initial bath distribution
    t_M, t_I : (npts,) float arrays (same length)

    Returns
    -------
    (L1, phi1, L2, phi2) : four (npts,) float arrays for the primed and
    double-primed products.
    """
    A = np.asarray(A, dtype=float)
    N = np.asarray(N, dtype=float)
    t_M = np.asarray(t_M, dtype=float)
    t_I = np.asarray(t_I, dtype=float)

    x = 0.5 * t_M[:, None] * A[None, :]
    c2 = np.cos(0.25 * t_I[:, None] * A[None, :]) ** 2
    bracket = -2j * np.sin(x) * c2 + np.exp(1j * x)
    a1 = np.exp(-1j * x) * bracket
    a2 = np.exp(1j * x) * bracket

    out = []
    for a in (a1, a2):
        z = p * a + (1.0 - p) * np.conj(a)
        mag = np.abs(z)
        with np.errstate(divide="ignore"):
            L = N[None, :] * np.log(mag)
        L = np.where(mag == 0.0, -np.inf, L).sum(axis=1)
        phi = (N[None, :] * np.angle(z)).sum(axis=1)
        out.extend((L, phi))
    return out[0], out[1], out[2], out[3]


def window_filter(u, starts, ends, signs, moments):
    """integral over the window of c(t) exp(i u t) dt, vectorised over u.

    starts/ends/signs describe the piecewise-constant switching function;
    moments = (m0, m1, m2) are integrals of c(t) t^k dt used for the series
    branch near u = 0 (the integrand is analytic there).
    """
    u = np.asarray(u, dtype=float)
    duration = ends[-1] if len(ends) else 0.0
    out = np.zeros(u.shape, dtype=complex)
    small = np.abs(u) * duration < 1e-8
    safe_u = np.where(small, 1.0, u)
    for a, b, s in zip(starts, ends, signs):
        out += s * (np.exp(1j * safe_u * b) - np.exp(1j * safe_u * a)) / (1j * safe_u)
    m0, m1, m2 = moments
    series = m0 + 1j * u * m1 - 0.5 * u * u * m2
    return np.where(small, series, out)


def semiclassical_matrices(b_rms, omega, A, domega, coupling_scale,
                           t_M, t_I, sigma_flip, starts, ends, signs, moments):
    """Hermitian window matrices for a batch of frequency-offset samples.

    Entry (k, l) carries the relative-precession filter of the outer window
    at u_kl = (omega_k + domega_k) - (omega_l + domega_l), weighted by the
    component amplitudes, times 1 + s * exp(i theta) with

        theta = u_kl (t_M + t_I) + sigma * (A_k - A_l) * sigma_flip

    where sigma_flip is the switching-function integral accumulated between
    the starts of the two windows (zero for an intermediate spin echo).

    Parameters
    ----------
    b_rms, omega, A : (n,) per-component arrays
    domega : (ns, n) per-sample frequency offsets
    coupling_scale : |g| mu_B / (hbar B_ext)
    starts, ends, signs, moments : outer-window switching description

    Returns
    -------
    H : (ns, 2, 2, n, n) complex; axis 1 is the sign s in (+1, -1), axis 2
    the electron spin sigma in (+1/2, -1/2).
    """
    b_rms = np.asarray(b_rms, dtype=float)
    omega = np.asarray(omega, dtype=float)
    A = np.asarray(A, dtype=float)
    domega = np.atleast_2d(np.asarray(domega, dtype=float))
    ns, n = domega.shape

    freq = omega[None, :] + domega
    u = freq[:, :, None] - freq[:, None, :]
    W = window_filter(u, starts, ends, signs, moments)
    K = coupling_scale * np.outer(b_rms, b_rms)[None, :, :] * W

    A_kl = A[:, None] - A[None, :]
    E = np.exp(1j * u * (t_M + t_I))
    F = np.exp(0.5j * A_kl * sigma_flip)[None, :, :]

    H = np.empty((ns, 2, 2, n, n), dtype=complex)
    for i_s, s in enumerate((1.0, -1.0)):
        H[:, i_s, 0] = K * (1.0 + s * E * F)
        H[:, i_s, 1] = K * (1.0 + s * E * np.conj(F))
    return H
