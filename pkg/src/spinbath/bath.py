"""Physical configuration of the qubit-bath system.

Defines the nuclear species, dot geometry, hyperfine coupling clusters and
the per-component quantities (rms Overhauser amplitudes, Larmor frequencies)
that the correlation models consume.

The coupling of nucleus i at position r is A_i = A_total * w(r), where w is
the per-site probability weight of the confined electron (a cosine profile
across the well thickness times a Gaussian in the plane). Instead of
enumerating ~1e6 lattice sites, nuclei are grouped into clusters of equal
population binned by coupling strength, using the continuum site density
1/nu0. Cluster couplings are normalised so that the per-species sum rule
sum_i N_i * A_i = abundance * A_total holds exactly.

All numeric defaults for GaAs (gyromagnetic ratios, hyperfine constants,
g factor, isotope abundances) are external literature inputs, not outputs
of this package; they live in GAAS_SPECIES / default_constants() and in the
shipped presets so they can be edited without touching the math.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

__all__ = [
    "PhysicalConstants",
    "NuclearSpecies",
    "DotGeometry",
    "CouplingCluster",
    "BathComponent",
    "default_constants",
    "GAAS_SPECIES",
    "gaas_geometry",
    "wavefunction_weight",
    "build_clusters",
    "larmor_frequencies",
    "bath_components",
    "mean_coupling",
]

# 1 ueV expressed as an angular frequency (rad/s): e * 1e-6 / hbar
_UEV_TO_RAD_S = 1.602176634e-25 / 1.054571817e-34


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants appearing in the coupling prefactors."""

    hbar: float = 1.054571817e-34  # J s
    mu_B: float = 9.2740100783e-24  # J/T
    g_electron: float = -0.44  # GaAs conduction-band g factor (signed)

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if not self.mu_B > 0:
            raise ValueError("mu_B must be positive")
        if self.g_electron == 0 or not math.isfinite(self.g_electron):
            raise ValueError("g_electron must be nonzero and finite")


def default_constants() -> PhysicalConstants:
    return PhysicalConstants()


@dataclass(frozen=True)
class NuclearSpecies:
    """One isotope of the bath.

    gamma            nuclear gyromagnetic ratio, rad s^-1 T^-1
    total_hyperfine  species hyperfine constant expressed as an angular
                     frequency (rad/s); the per-nucleus coupling is this
                     constant weighted by the electron density
    abundance        fraction of lattice sites occupied by this isotope
    spin             nuclear spin quantum number (half-integer)
    """

    name: str
    gamma: float
    total_hyperfine: float
    abundance: float
    spin: float = 0.5

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise ValueError(f"{self.name}: gamma must be finite")
        if self.total_hyperfine < 0:
            raise ValueError(f"{self.name}: total_hyperfine must be >= 0")
        if not 0.0 <= self.abundance <= 1.0:
            raise ValueError(f"{self.name}: abundance must lie in [0, 1]")
        if self.spin <= 0 or round(2 * self.spin) != 2 * self.spin:
            raise ValueError(f"{self.name}: spin must be a positive half-integer")


# Literature defaults for GaAs (gyromagnetic ratios in MHz/T from standard
# NMR tables; hyperfine constants 74 / 94 / 86 ueV; site abundances for the
# two Ga isotopes and As on a per-nucleus basis).
GAAS_SPECIES: tuple[NuclearSpecies, ...] = (
    NuclearSpecies("69Ga", gamma=2 * math.pi * 10.2478e6,
                   total_hyperfine=74.0 * _UEV_TO_RAD_S, abundance=0.301, spin=1.5),
    NuclearSpecies("71Ga", gamma=2 * math.pi * 13.0208e6,
                   total_hyperfine=94.0 * _UEV_TO_RAD_S, abundance=0.199, spin=1.5),
    NuclearSpecies("75As", gamma=2 * math.pi * 7.3150e6,
                   total_hyperfine=86.0 * _UEV_TO_RAD_S, abundance=0.500, spin=1.5),
)


@dataclass(frozen=True)
class DotGeometry:
    """Quantum-dot confinement parameters.

    z0       well (dot) thickness, m
    L        in-plane confinement radius, m
    nu0      volume per nucleus, m^3
    N_total  number of nuclei assigned to the dot
    """

    z0: float
    L: float
    nu0: float
    N_total: int

    def __post_init__(self):
        for name in ("z0", "L", "nu0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.N_total < 1:
            raise ValueError("N_total must be >= 1")

    @property
    def site_scale(self) -> float:
        """z0 * L^2 / nu0, the natural site-count scale of the profile."""
        return self.z0 * self.L ** 2 / self.nu0


def gaas_geometry(N_total: int = 1_000_000) -> DotGeometry:
    """Default gated-dot geometry: 7.5 nm well, 25 nm radius, GaAs site volume."""
    return DotGeometry(z0=7.5e-9, L=25e-9, nu0=2.258e-29, N_total=N_total)


@dataclass(frozen=True)
class CouplingCluster:
    """A group of N nuclei of one species sharing the coupling A (rad/s)."""

    species: NuclearSpecies
    A: float
    N: int

    def __post_init__(self):
        if self.A < 0:
            raise ValueError("cluster coupling must be >= 0")
        if self.N < 1:
            raise ValueError("cluster population must be >= 1")


@dataclass(frozen=True)
class BathComponent:
    """One Overhauser-field component of the semiclassical model.

    b_rms is the rms transverse field amplitude of the component,
    hbar * A_k * sqrt(5 N_k) / (2 |g| mu_B); omega_k its Larmor frequency.
    """

    species: NuclearSpecies
    A_k: float
    N_k: int
    b_rms: float
    omega_k: float

    @classmethod
    def from_cluster(cls, cluster: CouplingCluster, B_ext: float,
                     constants: PhysicalConstants) -> "BathComponent":
        b = (constants.hbar * cluster.A /
             (2 * abs(constants.g_electron) * constants.mu_B)) * math.sqrt(5 * cluster.N)
        return cls(species=cluster.species, A_k=cluster.A, N_k=cluster.N,
                   b_rms=b, omega_k=cluster.species.gamma * B_ext)


def wavefunction_weight(r, geometry: DotGeometry) -> float:
    """Per-site probability weight of the electron at position r = (x, y, z).

    This is nu0 times the electron density: a cos^2 across the well times a
    Gaussian envelope in the plane. Summed over a lattice of one site per
    nu0 it adds up to 1.
    """
    x, y, z = (float(v) for v in r)
    if abs(z) > geometry.z0 / 2:
        raise ValueError("position outside the well: |z| > z0/2")
    norm = 2 * geometry.nu0 / (geometry.z0 * math.pi * geometry.L ** 2)
    return norm * math.cos(math.pi * z / geometry.z0) ** 2 * math.exp(
        -(x * x + y * y) / geometry.L ** 2)


# --- continuum coupling distribution -------------------------------------
#
# With the weight profile above, the number of sites whose coupling exceeds
# w * A_max and their summed coupling have closed / one-dimensional forms in
# w (A_max is the weight at the origin). Both are monotone in w, which makes
# equal-population quantile binning a pair of one-dimensional root solves.

def _site_count(w: float, scale: float) -> float:
    """Number of sites with weight >= w * w_max (w in (0, 1])."""
    if w >= 1.0:
        return 0.0
    zeta_w = math.acos(math.sqrt(w))
    val, _ = quad(lambda z: 2.0 * math.log(math.cos(z)) - math.log(w), 0.0, zeta_w)
    return scale * 2.0 * val


def _coupling_sum(w: float, scale: float) -> float:
    """Sum of weights (units of w_max) over sites with weight >= w * w_max."""
    if w >= 1.0:
        return 0.0
    zeta_w = math.acos(math.sqrt(w))
    return scale * 2.0 * ((zeta_w / 2 + math.sin(2 * zeta_w) / 4) - w * zeta_w)


def _quantile_edges(n_clusters: int, geometry: DotGeometry) -> np.ndarray:
    """Weight levels w_j with j/n of N_total sites above w_j, j = 1..n."""
    scale = geometry.site_scale
    edges = [1.0]
    lo = 1e-12
    for j in range(1, n_clusters + 1):
        target = j / n_clusters * geometry.N_total
        while _site_count(lo, scale) < target:
            lo *= 1e-3
            if lo < 1e-290:
                raise ValueError("geometry cannot host N_total nuclei")
        edges.append(brentq(lambda w: _site_count(w, scale) - target,
                            lo, 1.0 - 1e-15, xtol=1e-16, rtol=1e-14))
    return np.asarray(edges)


def _largest_remainder(total: int, fractions: np.ndarray) -> np.ndarray:
    """Integer apportionment of `total` by `fractions`, conserving the sum."""
    raw = fractions * total
    counts = np.floor(raw).astype(int)
    short = total - counts.sum()
    order = np.argsort(-(raw - counts))
    counts[order[:short]] += 1
    return counts


def build_clusters(geometry: DotGeometry, species, n_clusters: int,
                   profile: str = "dot") -> list[CouplingCluster]:
    """Partition each species' nuclei into equal-population coupling clusters.

    profile "dot" bins the continuum coupling distribution of the confined
    electron into quantiles; "uniform" assigns every nucleus the mean
    coupling (homogeneous bath). Cluster couplings are scaled so that
    sum N_j A_j = abundance * total_hyperfine exactly for each species.
    """
    species = list(species)
    if n_clusters < 1:
        raise ValueError("n_clusters must be >= 1")
    abundance_sum = sum(s.abundance for s in species)
    if abs(abundance_sum - 1.0) > 1e-12:
        raise ValueError(f"species abundances sum to {abundance_sum!r}, expected 1")

    if profile == "dot":
        edges = _quantile_edges(n_clusters, geometry)
        scale = geometry.site_scale
        sums = np.array([_coupling_sum(w, scale) for w in edges])
        shares = np.diff(sums)
        shares = shares / shares.sum()
    elif profile == "uniform":
        shares = None
    else:
        raise ValueError(f"unknown coupling profile {profile!r}")

    clusters: list[CouplingCluster] = []
    for s in species:
        n_species = round(s.abundance * geometry.N_total)
        if n_clusters > n_species:
            raise ValueError(
                f"{s.name}: n_clusters={n_clusters} exceeds nucleus count {n_species}")
        counts = _largest_remainder(n_species, np.full(n_clusters, 1.0 / n_clusters))
        if shares is None:
            couplings = np.full(n_clusters, s.abundance * s.total_hyperfine / n_species)
        else:
            couplings = s.abundance * s.total_hyperfine * shares / counts
        for A_j, N_j in zip(couplings, counts):
            clusters.append(CouplingCluster(species=s, A=float(A_j), N=int(N_j)))
    return clusters


def larmor_frequencies(species, B_ext: float) -> np.ndarray:
    """omega_k = gamma_k * B_ext for each species, rad/s."""
    if B_ext < 0:
        raise ValueError("B_ext must be >= 0")
    return np.array([s.gamma * B_ext for s in species])


def bath_components(species, geometry: DotGeometry, n_clusters: int, B_ext: float,
                    constants: PhysicalConstants | None = None,
                    profile: str = "dot") -> list[BathComponent]:
    """One Overhauser component per (species, coupling cluster) pair."""
    constants = constants or default_constants()
    clusters = build_clusters(geometry, species, n_clusters, profile=profile)
    return [BathComponent.from_cluster(c, B_ext, constants) for c in clusters]


def mean_coupling(species, geometry: DotGeometry) -> float:
    """Mean per-nucleus coupling sum_s abundance_s * A_total_s / N_total.

    Used only to normalise time axes (t * A); the models use the per-cluster
    couplings.
    """
    return sum(s.abundance * s.total_hyperfine for s in species) / geometry.N_total
