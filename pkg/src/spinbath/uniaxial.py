"""Closed-form autocorrelation for the switched uniaxial coupling scheme.

The qubit couples to every bath spin along z during the two measurement
windows (duration t_M, opposite sign for the two qubit states) and along x
during the intermediate window (duration t_I). Everything factorises into
single-spin matrix elements, so the correlation of the two readouts reduces
to products of binomially averaged cluster factors:

    S' = prod_j (p a'_j + (1-p) conj(a'_j))^(N_j)      (first readout branch)
    S'' = same with a''                                 (second branch)

with C = (|S'|^2 + |S''|^2) / 2 for symmetric double dots, and
C = Re(S' + S'') / 2 for a single dot. Products are accumulated in
log-magnitude/phase form: cos(x)^2000 underflows long before it stops
mattering.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bath import CouplingCluster, DotGeometry, NuclearSpecies, build_clusters

__all__ = [
    "UniaxialConfig",
    "element_up_prime",
    "element_up_doubleprime",
    "cluster_factor",
    "correlation_uniaxial",
    "correlation_uniaxial_grid",
    "scaling_contour",
    "fit_scaling_exponent",
    "ScalingPoint",
    "CONTOUR_LEVEL",
]

# contour level of the scaling study: C = e^-1 / 2
CONTOUR_LEVEL = 0.5 * math.exp(-1.0)


def element_up_prime(A, t_M, t_I):
    """Spin-up matrix element of the first-branch single-spin operator.

    The spin-down element is the complex conjugate; |element| <= 1.
    """
    x = 0.5 * np.asarray(A) * t_M
    bracket = -2j * np.sin(x) * np.cos(0.25 * np.asarray(A) * t_I) ** 2 + np.exp(1j * x)
    return np.exp(-1j * x) * bracket


def element_up_doubleprime(A, t_M, t_I):
    """Spin-up matrix element of the second-branch operator (opposite outer phase)."""
    x = 0.5 * np.asarray(A) * t_M
    bracket = -2j * np.sin(x) * np.cos(0.25 * np.asarray(A) * t_I) ** 2 + np.exp(1j * x)
    return np.exp(1j * x) * bracket


def cluster_factor(element: complex, N: int, p: float = 0.5) -> complex:
    """Binomial average (p a + (1-p) conj(a))^N over a cluster of N spins.

    Evaluated as exp(N log z) so that large-N powers neither under- nor
    overflow; for p = 1/2 this is (Re a)^N.
    """
    if abs(element) > 1 + 1e-9:
        raise ValueError("matrix element magnitude exceeds 1")
    if N < 1 or N != int(N):
        raise ValueError("N must be a positive integer")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    z = p * element + (1.0 - p) * np.conj(element)
    mag = abs(z)
    if mag == 0.0:
        return 0.0 + 0.0j
    return complex(np.exp(N * (math.log(mag) + 1j * np.angle(z))))


@dataclass(frozen=True)
class UniaxialConfig:
    """One evaluation point of the uniaxial model.

    symmetric_dots=True squares the per-dot factor (two identical dots);
    with symmetric_dots=False and clusters_right=None the single-electron
    correlation is returned; supplying clusters_right gives two distinct
    dots.
    """

    clusters: tuple[CouplingCluster, ...]
    t_M: float
    t_I: float
    polarization_p: float = 0.5
    symmetric_dots: bool = True
    clusters_right: tuple[CouplingCluster, ...] | None = None

    def __post_init__(self):
        if self.t_M < 0 or self.t_I < 0:
            raise ValueError("t_M and t_I must be >= 0")
        if not 0.0 <= self.polarization_p <= 1.0:
            raise ValueError("polarization_p must lie in [0, 1]")
        if self.symmetric_dots and self.clusters_right is not None:
            raise ValueError("clusters_right only applies to asymmetric dots")
        object.__setattr__(self, "clusters", tuple(self.clusters))
        if self.clusters_right is not None:
            object.__setattr__(self, "clusters_right", tuple(self.clusters_right))


def _cluster_arrays(clusters):
    A = np.array([c.A for c in clusters], dtype=float)
    N = np.array([c.N for c in clusters], dtype=float)
    return A, N


def correlation_uniaxial_grid(clusters, t_M, t_I, p: float = 0.5,
                              symmetric_dots: bool = True,
                              clusters_right=None) -> np.ndarray:
    """Vectorised correlation over flattened arrays of (t_M, t_I) pairs."""
    t_M = np.asarray(t_M, dtype=float)
    t_I = np.asarray(t_I, dtype=float)
    A, N = _cluster_arrays(clusters)
    L1, P1, L2, P2 = kernels.uniaxial_log_factors(A, N, p, t_M.ravel(), t_I.ravel())
    if symmetric_dots:
        C = 0.5 * np.exp(2 * L1) + 0.5 * np.exp(2 * L2)
    elif clusters_right is None:
        C = 0.5 * (np.exp(L1) * np.cos(P1) + np.exp(L2) * np.cos(P2))
    else:
        Ar, Nr = _cluster_arrays(clusters_right)
        M1, Q1, M2, Q2 = kernels.uniaxial_log_factors(Ar, Nr, p, t_M.ravel(), t_I.ravel())
        C = 0.5 * (np.exp(L1 + M1) * np.cos(P1 - Q1)
                   + np.exp(L2 + M2) * np.cos(P2 - Q2))
    return C.reshape(t_M.shape)


def correlation_uniaxial(config: UniaxialConfig) -> float:
    """Autocorrelation of the two qubit readouts for one (t_M, t_I) point."""
    return float(correlation_uniaxial_grid(
        config.clusters, np.array([config.t_M]), np.array([config.t_I]),
        p=config.polarization_p, symmetric_dots=config.symmetric_dots,
        clusters_right=config.clusters_right)[0])


@dataclass(frozen=True)
class ScalingPoint:
    N: int
    t_star: float  # diagonal time where C first crosses the contour level
    product: float  # t_star^2, i.e. t_M * t_I on the diagonal
    found: bool


def _homogeneous_clusters(species: NuclearSpecies, N: int):
    return (CouplingCluster(species=species, A=species.total_hyperfine / N, N=N),)


def scaling_contour(N_values, species: NuclearSpecies,
                    geometry: DotGeometry | None = None, *,
                    n_clusters: int = 1, symmetric_dots: bool = True,
                    scan_decades=(1e-3, 1e3), scan_points: int = 2000) -> list[ScalingPoint]:
    """Locate the C = e^-1/2 crossing along the diagonal t_M = t_I per bath size.

    For each N the diagonal is scanned geometrically in t (in units of the
    inverse mean coupling) until the correlation first drops below the
    contour level; the crossing is then refined by bisection. The products
    t_star^2 across N follow the 3/2 power law of the bath size.

    With geometry=None each bath is a single homogeneous cluster; otherwise
    the dot coupling profile is rebuilt for each N.
    """
    from scipy.optimize import brentq

    N_values = [int(n) for n in N_values]
    if len(N_values) < 2:
        raise ValueError("need at least two bath sizes")
    out = []
    for N in N_values:
        if geometry is None:
            clusters = _homogeneous_clusters(species, N)
        else:
            geo = DotGeometry(z0=geometry.z0, L=geometry.L, nu0=geometry.nu0, N_total=N)
            clusters = tuple(build_clusters(geo, [species], n_clusters))
        A_bar = species.total_hyperfine / N

        def C_diag(t):
            return correlation_uniaxial_grid(
                clusters, np.array([t]), np.array([t]),
                symmetric_dots=symmetric_dots)[0]

        ts = np.geomspace(scan_decades[0], scan_decades[1], scan_points) / A_bar
        cs = correlation_uniaxial_grid(clusters, ts, ts, symmetric_dots=symmetric_dots)
        below = np.nonzero(cs < CONTOUR_LEVEL)[0]
        if below.size == 0 or below[0] == 0:
            out.append(ScalingPoint(N=N, t_star=math.nan, product=math.nan, found=False))
            continue
        i = below[0]
        t_star = brentq(lambda t: C_diag(t) - CONTOUR_LEVEL, ts[i - 1], ts[i],
                        xtol=1e-18, rtol=1e-13)
        out.append(ScalingPoint(N=N, t_star=t_star, product=t_star * t_star, found=True))
    return out


def fit_scaling_exponent(points) -> float:
    """Log-log slope of t_M * t_I against N over the found contour points."""
    pts = [p for p in points if p.found]
    if len(pts) < 2:
        raise ValueError("need at least two located crossings to fit")
    logN = np.log([p.N for p in pts])
    logP = np.log([p.product for p in pts])
    return float(np.polyfit(logN, logP, 1)[0])
