"""Semiclassical autocorrelation for isotropic coupling under pulse sequences.

The bath enters through complex transverse Overhauser components, one per
(species, coupling cluster) pair. Each spin-echo readout accumulates a phase
quadratic in those components; averaging the initial Gaussian components
turns the correlation into determinants of window matrices:

    C = 1/2 Re sum_{s=+,-} 1 / ( det(I + i T^{s,up}) * det(I - i T^{s,dn}) )

for symmetric dots (the two electron branches of the double dot carry
opposite spin, hence the conjugate pairing). T^{s,sigma} is Hermitian: entry
(k, l) is the outer-window filter at the relative precession frequency
u_kl = omega_k - omega_l + delta-field offsets, weighted by the component
amplitudes, with the intermediate window entering through the propagation
phase u_kl (t_M + t_I) + sigma (A_k - A_l) * flip_integral(intermediate).
An intermediate spin echo zeroes that flip integral, which removes every
sigma dependence: that sequence is the backaction-free control.

Nuclear dephasing is modelled by Gaussian per-species field offsets delta_B
redrawn each Monte Carlo sample; sampling is counter-seeded per
(seed, grid index, sample index) so results do not depend on evaluation
order or thread count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bath import BathComponent, PhysicalConstants, default_constants
from .protocols import ExperimentSequence, flip_integral, segments
from .results import CorrelationResult

__all__ = [
    "SemiclassicalConfig",
    "DeltaFieldSample",
    "TMatrix",
    "DegenerateSampleError",
    "build_tmatrix",
    "correlation_value",
    "correlation_semiclassical",
]

# exclusion threshold on |det|: poles of the determinant formula
_DEGENERATE_LOG_DET = math.log(1e-300)
# exclusion budget before the whole evaluation is rejected
_DEGENERATE_FRACTION = 0.01


class DegenerateSampleError(RuntimeError):
    """A sample produced a numerically singular window determinant."""


@dataclass(frozen=True)
class SemiclassicalConfig:
    """Inputs of one semiclassical evaluation point."""

    components: tuple[BathComponent, ...]
    B_ext: float
    delta_B_rms: float
    t_M: float
    t_I: float
    sequence: ExperimentSequence
    mc_samples: int
    seed: int
    symmetric_dots: bool = True
    components_right: tuple[BathComponent, ...] | None = None
    delta_B_correlated: bool = False
    constants: PhysicalConstants | None = None

    def __post_init__(self):
        if not self.B_ext > 0:
            raise ValueError("B_ext must be positive")
        if self.delta_B_rms < 0:
            raise ValueError("delta_B_rms must be >= 0")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.t_M < 0 or self.t_I < 0:
            raise ValueError("t_M and t_I must be >= 0")
        if self.sequence.outer.duration != self.t_M:
            raise ValueError("outer protocol duration must equal t_M")
        if self.sequence.intermediate.duration != self.t_I:
            raise ValueError("intermediate protocol duration must equal t_I")
        if self.symmetric_dots and self.components_right is not None:
            raise ValueError("components_right only applies to asymmetric dots")
        object.__setattr__(self, "components", tuple(self.components))
        if self.components_right is not None:
            object.__setattr__(self, "components_right", tuple(self.components_right))
        if self.constants is None:
            object.__setattr__(self, "constants", default_constants())

    def species_names(self, dot: str = "L") -> list[str]:
        comps = self.components if dot == "L" else (self.components_right or self.components)
        names: list[str] = []
        for c in comps:
            if c.species.name not in names:
                names.append(c.species.name)
        return names


@dataclass(frozen=True)
class DeltaFieldSample:
    """Per-component Larmor offsets delta_omega = gamma * delta_B for both dots."""

    delta_omega_left: np.ndarray
    delta_omega_right: np.ndarray
    index: int


def draw_delta_sample(config: SemiclassicalConfig, grid_index: int,
                      sample_index: int) -> DeltaFieldSample:
    """Deterministic per-sample field offsets from (seed, grid, sample) counters.

    One Gaussian delta_B per species per dot: components of the same species
    within a dot share the offset, so same-species relative frequencies stay
    exactly zero.
    """
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=[config.seed, grid_index, sample_index]))

    def _one_dot(components, dB_by_species):
        gammas = np.array([c.species.gamma for c in components])
        names = [c.species.name for c in components]
        return gammas * np.array([dB_by_species[n] for n in names])

    names_L = config.species_names("L")
    dB_L = dict(zip(names_L, rng.normal(0.0, config.delta_B_rms, size=len(names_L))))
    if config.delta_B_correlated:
        dB_R = dB_L
    else:
        names_R = config.species_names("R")
        dB_R = dict(zip(names_R, rng.normal(0.0, config.delta_B_rms, size=len(names_R))))
    right = config.components_right or config.components
    return DeltaFieldSample(
        delta_omega_left=_one_dot(config.components, dB_L),
        delta_omega_right=_one_dot(right, dB_R),
        index=sample_index)


@dataclass(frozen=True)
class TMatrix:
    """Window matrix for one (sign, electron spin, dot) combination."""

    entries: np.ndarray
    sign: int  # +1 or -1
    sigma: float  # +0.5 or -0.5
    dot: str  # "L" or "R"

    def __post_init__(self):
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.sigma not in (+0.5, -0.5):
            raise ValueError("sigma must be +0.5 or -0.5")
        if self.dot not in ("L", "R"):
            raise ValueError("dot must be 'L' or 'R'")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("matrix entries must be finite")


def _component_arrays(components):
    b = np.array([c.b_rms for c in components])
    w = np.array([c.omega_k for c in components])
    A = np.array([c.A_k for c in components])
    return b, w, A


def _window_description(config: SemiclassicalConfig):
    """Switching segments and moments of the outer window, plus the
    sigma-coupled flip integral accumulated up to the start of window two."""
    segs = segments(config.sequence.outer)
    starts = np.array([s[0] for s in segs])
    ends = np.array([s[1] for s in segs])
    signs = np.array([float(s[2]) for s in segs])
    m0 = sum(s * (b - a) for a, b, s in segs)
    m1 = sum(s * (b * b - a * a) / 2 for a, b, s in segs)
    m2 = sum(s * (b ** 3 - a ** 3) / 3 for a, b, s in segs)
    sigma_flip = (flip_integral(config.sequence.outer, config.t_M)
                  + flip_integral(config.sequence.intermediate, config.t_I))
    return starts, ends, signs, (m0, m1, m2), sigma_flip


def _matrices_for_samples(config: SemiclassicalConfig, domega: np.ndarray,
                          components) -> np.ndarray:
    b, w, A = _component_arrays(components)
    starts, ends, signs, moments, sigma_flip = _window_description(config)
    scale = (abs(config.constants.g_electron) * config.constants.mu_B
             / (config.constants.hbar * config.B_ext))
    return kernels.semiclassical_matrices(
        b, w, A, domega, scale, config.t_M, config.t_I, sigma_flip,
        starts, ends, signs, moments)


_SIGN_INDEX = {+1: 0, -1: 1}
_SIGMA_INDEX = {+0.5: 0, -0.5: 1}


def build_tmatrix(config: SemiclassicalConfig, sign: int, sigma: float,
                  sample: DeltaFieldSample, dot: str = "L") -> TMatrix:
    """Window matrix for one sample and one (sign, sigma, dot) combination.

    Entries vanish on the diagonal and between same-species components (the
    echo filter removes relative precession at zero frequency difference);
    the matrix is Hermitian and goes to zero with t_M.
    """
    if dot == "L":
        comps, dom = config.components, sample.delta_omega_left
    elif dot == "R":
        comps = config.components_right or config.components
        dom = sample.delta_omega_right
    else:
        raise ValueError("dot must be 'L' or 'R'")
    H = _matrices_for_samples(config, np.asarray(dom)[None, :], comps)
    entries = H[0, _SIGN_INDEX[sign], _SIGMA_INDEX[sigma]]
    return TMatrix(entries=entries, sign=sign, sigma=sigma, dot=dot)


def _log_det_plus_i(matrices: np.ndarray):
    """(sign, logabs) of det(I + i M) for a stacked array of square matrices."""
    n = matrices.shape[-1]
    eye = np.eye(n)
    sign, logabs = np.linalg.slogdet(eye + 1j * matrices)
    return sign, logabs


def _combine_dets(d_up_sign, d_up_log, d_dn_sign, d_dn_log):
    """1 / (det_up * conj(det_dn)) from slogdet pieces."""
    return np.exp(-(d_up_log + d_dn_log)) * (np.conj(d_up_sign) * d_dn_sign)


def correlation_value(tmatrices) -> float:
    """Correlation of one sample from its window matrices.

    Expects the four (sign, sigma) matrices of the left dot for symmetric
    dots, or all eight (sign, sigma, dot) combinations for distinct dots.
    The product over eigenvalues is evaluated as a determinant.
    """
    by_key = {(t.sign, t.sigma, t.dot): t for t in tmatrices}
    if len(by_key) != len(list(tmatrices)):
        raise ValueError("duplicate (sign, sigma, dot) combinations")
    symmetric = not any(k[2] == "R" for k in by_key)

    def det_pm(sign, sigma, dot, plus: bool):
        t = by_key.get((sign, sigma, dot))
        if t is None:
            raise ValueError(f"missing T matrix for sign={sign}, sigma={sigma}, dot={dot}")
        n = t.entries.shape[0]
        s, la = np.linalg.slogdet(np.eye(n) + (1j if plus else -1j) * t.entries)
        if s == 0 or la < _DEGENERATE_LOG_DET:
            raise DegenerateSampleError("singular window determinant")
        return s * np.exp(la)

    total = 0.0 + 0.0j
    if symmetric:
        for sign in (+1, -1):
            total += 1.0 / (det_pm(sign, +0.5, "L", True) * det_pm(sign, -0.5, "L", False))
        return float(0.5 * total.real)
    for sign in (+1, -1):
        total += 0.5 / (det_pm(sign, +0.5, "L", True) * det_pm(sign, -0.5, "R", False))
        total += 0.5 / (det_pm(sign, -0.5, "L", True) * det_pm(sign, +0.5, "R", False))
    return float(0.5 * total.real)


def _sample_values(config: SemiclassicalConfig, grid_index: int, n_samples: int):
    """Per-sample correlation values plus the degenerate-sample count."""
    samples = [draw_delta_sample(config, grid_index, i) for i in range(n_samples)]
    dom_L = np.stack([s.delta_omega_left for s in samples])
    H_L = _matrices_for_samples(config, dom_L, config.components)
    s_L, la_L = _log_det_plus_i(H_L)  # (ns, 2, 2)

    if config.symmetric_dots:
        s_R, la_R = s_L, la_L
    else:
        right = config.components_right or config.components
        dom_R = np.stack([s.delta_omega_right for s in samples])
        H_R = _matrices_for_samples(config, dom_R, right)
        s_R, la_R = _log_det_plus_i(H_R)

    # det(I - iM) = conj(det(I + iM)) for Hermitian M, so the down-spin
    # factors come from conjugated slogdet pieces of the same stacks.
    degenerate = ((s_L == 0).any(axis=(1, 2)) | (s_R == 0).any(axis=(1, 2))
                  | (la_L < _DEGENERATE_LOG_DET).any(axis=(1, 2))
                  | (la_R < _DEGENERATE_LOG_DET).any(axis=(1, 2)))

    vals = np.zeros(len(samples))
    for i_s in range(2):  # sign s = +1, -1
        if config.symmetric_dots:
            branch = _combine_dets(s_L[:, i_s, 0], la_L[:, i_s, 0],
                                   s_L[:, i_s, 1], la_L[:, i_s, 1])
            vals += 0.5 * branch.real
        else:
            b1 = _combine_dets(s_L[:, i_s, 0], la_L[:, i_s, 0],
                               s_R[:, i_s, 1], la_R[:, i_s, 1])
            b2 = _combine_dets(s_L[:, i_s, 1], la_L[:, i_s, 1],
                               s_R[:, i_s, 0], la_R[:, i_s, 0])
            vals += 0.25 * (b1.real + b2.real)
    return vals[~degenerate], int(degenerate.sum())


def correlation_semiclassical(config: SemiclassicalConfig,
                              grid_index: int = 0) -> CorrelationResult:
    """Monte Carlo average of the correlation over delta-field samples.

    With delta_B_rms = 0 a single deterministic sample is evaluated. The
    result is reproducible from (seed, config) alone; more than 1% of
    degenerate samples aborts the evaluation, and so does losing every
    sample.
    """
    n_samples = 1 if config.delta_B_rms == 0.0 else config.mc_samples
    vals, n_degenerate = _sample_values(config, grid_index, n_samples)
    if vals.size == 0:
        raise DegenerateSampleError("all Monte Carlo samples were degenerate")
    if n_degenerate > _DEGENERATE_FRACTION * n_samples:
        raise DegenerateSampleError(
            f"{n_degenerate}/{n_samples} degenerate samples exceeds the "
            f"{_DEGENERATE_FRACTION:.0%} budget")
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    return CorrelationResult(t_M=config.t_M, t_I=config.t_I, C=mean,
                             stderr=stderr, n_samples=int(vals.size),
                             n_degenerate=n_degenerate)
