"""Independent brute-force reference implementations.

Three oracles, each deliberately built on a different route than the module
it checks:

* protocol_oracle: exact state-vector simulation of the full
  initialize-evolve-measure-evolve-measure cycle on a small Hilbert space,
  with Born-rule branching, next to the closed two-term readout-correlation
  expression evaluated as printed. Verifies the uniaxial cluster formulas.
* gaussian_identity_check: Monte Carlo average of a Gaussian quadratic-form
  exponential against the determinant closed form. Verifies the linear
  algebra step of the semiclassical model.
* classical_vector_mc: direct sampling of classical Overhauser components,
  quadrature of the readout phases, and explicit propagation of the
  intermediate backaction imprint. Verifies the assembled window matrices.

These run at desk scale only; none of them is a performance path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bath import PhysicalConstants, default_constants
from .protocols import ExperimentSequence, flip_integral, flip_integral_nodes, segments

__all__ = [
    "SmallBath",
    "OracleResult",
    "GaussianCheck",
    "OracleMC",
    "protocol_oracle",
    "gaussian_identity_check",
    "classical_vector_mc",
]

_MAX_SPINS = 12
_MAX_ENUMERATION = 8


@dataclass(frozen=True)
class SmallBath:
    """A directly simulable bath: one coupling per spin, at most 12 spins.

    intermediate_axis "x" is the switched-axis scheme (noncommuting);
    "z" keeps the intermediate evolution commuting with the readout windows,
    which must make the correlation independent of t_I.
    """

    couplings: tuple[float, ...]
    intermediate_axis: str = "x"

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(float(a) for a in self.couplings))
        if len(self.couplings) == 0:
            raise ValueError("need at least one spin")
        if len(self.couplings) > _MAX_SPINS:
            raise ValueError(f"refusing {len(self.couplings)} spins; limit is {_MAX_SPINS}")
        if self.intermediate_axis not in ("x", "z"):
            raise ValueError("intermediate_axis must be 'x' or 'z'")


@dataclass(frozen=True)
class OracleResult:
    C_exact: float
    C_eq5: float
    stderr_exact: float
    stderr_eq5: float
    enumerated: bool
    n_states: int
    imag_magnitude: float  # |Im| of the averaged two-term expression


def _apply_single_spin(state: np.ndarray, op: np.ndarray, site: int,
                       n_spins: int) -> np.ndarray:
    """Apply a 2x2 operator to one spin of a 2^n state vector."""
    tensor = state.reshape((2,) * n_spins)
    tensor = np.tensordot(op, tensor, axes=(1, site))
    tensor = np.moveaxis(tensor, 0, site)
    return tensor.reshape(-1)


def _intermediate_ops(bath: SmallBath, t_I: float) -> list[np.ndarray]:
    ops = []
    for A in bath.couplings:
        g = 0.25 * A * t_I
        if bath.intermediate_axis == "x":
            ops.append(np.array([[np.cos(g), -1j * np.sin(g)],
                                 [-1j * np.sin(g), np.cos(g)]], dtype=complex))
        else:
            ops.append(np.diag([np.exp(-1j * g), np.exp(1j * g)]).astype(complex))
    return ops


def _apply_intermediate(state, ops, n_spins, dagger=False):
    for site, op in enumerate(ops):
        state = _apply_single_spin(state, op.conj().T if dagger else op, site, n_spins)
    return state


def _zeeman_phase_sums(couplings: np.ndarray) -> np.ndarray:
    """sum_i A_i m_i over all 2^n basis states (bit set = spin down)."""
    n = len(couplings)
    idx = np.arange(2 ** n)
    total = np.zeros(2 ** n)
    for i, A in enumerate(couplings):
        bit = (idx >> (n - 1 - i)) & 1
        total += A * (0.5 - bit)
    return total


def _exact_cycle(basis_index: int, u0_diag, u1_diag, ops_I, n_spins) -> float:
    """Literal two-cycle protocol from one bath basis state.

    Qubit prepared along +x, entangling window, projective +-x readout with
    Born probabilities, exactly normalised conditional bath state,
    intermediate evolution, second cycle. Returns sum over outcome pairs of
    M1*M2*P.
    """
    state = np.zeros(u0_diag.shape, dtype=complex)
    state[basis_index] = 1.0

    def split(bath_state):
        psi0 = u0_diag * bath_state
        psi1 = u1_diag * bath_state
        plus = 0.5 * (psi0 + psi1)
        minus = 0.5 * (psi0 - psi1)
        p_plus = float(np.vdot(plus, plus).real)
        p_minus = float(np.vdot(minus, minus).real)
        if abs(p_plus + p_minus - 1.0) > 1e-12:
            raise RuntimeError("branch probabilities do not sum to 1")
        return (plus, p_plus), (minus, p_minus)

    corr = 0.0
    for m1, (branch, prob) in zip((+1, -1), split(state)):
        if prob < 1e-300:
            continue
        conditional = branch / math.sqrt(prob)
        evolved = _apply_intermediate(conditional, ops_I, n_spins)
        (_, q_plus), (_, q_minus) = split(evolved)
        corr += m1 * prob * (q_plus - q_minus)
    return corr


def _eq5_cycle(basis_index: int, u0_diag, u1_diag, ops_I, n_spins) -> complex:
    """The printed two-term readout-correlation expression for one basis state."""
    e = np.zeros(u0_diag.shape, dtype=complex)
    e[basis_index] = 1.0

    v = u1_diag * e
    v = _apply_intermediate(v, ops_I, n_spins)
    v = u1_diag * v
    v = np.conj(u0_diag) * v
    v = _apply_intermediate(v, ops_I, n_spins, dagger=True)
    v = np.conj(u0_diag) * v
    term1 = v[basis_index]

    v = u0_diag * e
    v = _apply_intermediate(v, ops_I, n_spins)
    v = u1_diag * v
    v = np.conj(u0_diag) * v
    v = _apply_intermediate(v, ops_I, n_spins, dagger=True)
    v = np.conj(u1_diag) * v
    term2 = v[basis_index]
    return 0.5 * (term1 + term2)


def protocol_oracle(bath: SmallBath, t_M: float, t_I: float, *,
                    n_state_samples: int = 256, seed: int = 0,
                    enumerate_up_to: int = _MAX_ENUMERATION) -> OracleResult:
    """Exact protocol correlation and the printed expression, averaged over
    the infinite-temperature bath mixture.

    All 2^n basis states are enumerated up to enumerate_up_to spins
    (default 8); beyond that the mixture is sampled uniformly and standard
    errors are reported.
    """
    n = len(bath.couplings)
    A = np.asarray(bath.couplings)
    phase = 0.5 * t_M * _zeeman_phase_sums(A)
    u0_diag = np.exp(-1j * phase)
    u1_diag = np.exp(1j * phase)
    ops_I = _intermediate_ops(bath, t_I)

    enumerated = n <= min(enumerate_up_to, _MAX_SPINS)
    if enumerated:
        indices = np.arange(2 ** n)
    else:
        rng = np.random.default_rng(seed)
        indices = rng.integers(0, 2 ** n, size=n_state_samples)

    exact_vals = np.array([_exact_cycle(j, u0_diag, u1_diag, ops_I, n) for j in indices])
    eq5_vals = np.array([_eq5_cycle(j, u0_diag, u1_diag, ops_I, n) for j in indices])

    if enumerated:
        se_exact = se_eq5 = 0.0
    else:
        se_exact = float(exact_vals.std(ddof=1) / math.sqrt(len(indices)))
        se_eq5 = float(eq5_vals.real.std(ddof=1) / math.sqrt(len(indices)))
    return OracleResult(
        C_exact=float(exact_vals.mean()),
        C_eq5=float(eq5_vals.mean().real),
        stderr_exact=se_exact,
        stderr_eq5=se_eq5,
        enumerated=enumerated,
        n_states=len(indices),
        imag_magnitude=abs(float(eq5_vals.mean().imag)),
    )


@dataclass(frozen=True)
class GaussianCheck:
    mc_mean: complex
    closed_form: complex
    stderr: float
    n_samples: int

    @property
    def z_score(self) -> float:
        return abs(self.mc_mean - self.closed_form) / self.stderr


def gaussian_identity_check(T: np.ndarray, n_samples: int, seed: int = 0) -> GaussianCheck:
    """Monte Carlo check of <exp(-i/2 sum T_kl z_k conj(z_l))> = 1/det(I + iT).

    z are complex Gaussians with unit variance per real component. Valid for
    matrices whose quadratic form keeps the integrand Gaussian-integrable
    (small spectral radius is always safe).
    """
    T = np.asarray(T, dtype=complex)
    n = T.shape[0]
    if T.shape != (n, n) or n > 8:
        raise ValueError("T must be square with dimension <= 8")
    if n_samples < 1000:
        raise ValueError("need at least 1e3 samples")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_samples, n)) + 1j * rng.standard_normal((n_samples, n))
    quad = np.einsum("kl,sk,sl->s", T, z, np.conj(z))
    vals = np.exp(-0.5j * quad)
    mc = complex(vals.mean())
    stderr = float(np.sqrt(np.mean(np.abs(vals - mc) ** 2) / n_samples))
    closed = complex(1.0 / np.linalg.det(np.eye(n) + 1j * T))
    return GaussianCheck(mc_mean=mc, closed_form=closed, stderr=stderr,
                         n_samples=n_samples)


@dataclass(frozen=True)
class OracleMC:
    mean: float
    stderr: float
    n_samples: int


def _phase_matrix(components, sequence: ExperimentSequence, sigma: float,
                  t_M: float) -> np.ndarray:
    """Window quadratic-form matrix V_kl = integral c(t) exp(i(u_kl t +
    sigma A_kl chat(t))) dt over the outer window, by composite quadrature.

    The step resolves the fastest relative precession: at most
    min(2 pi / (20 max|u_kl|), t_M / 200).
    """
    omega = np.array([c.omega_k for c in components])
    A = np.array([c.A_k for c in components])
    u_kl = omega[:, None] - omega[None, :]
    A_kl = A[:, None] - A[None, :]
    max_u = np.max(np.abs(u_kl))
    step = t_M / 200
    if max_u > 0:
        step = min(step, 2 * math.pi / (20 * max_u))

    V = np.zeros(u_kl.shape, dtype=complex)
    for a, b, sign in segments(sequence.outer):
        if b <= a:
            continue
        m = max(2, int(math.ceil((b - a) / step)))
        if m % 2:
            m += 1
        ts = np.linspace(a, b, m + 1)
        chat = flip_integral_nodes(sequence.outer, ts)
        phases = np.exp(1j * (u_kl[None, :, :] * ts[:, None, None]
                              + sigma * A_kl[None, :, :] * chat[:, None, None]))
        weights = np.ones(m + 1)
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        weights *= (b - a) / m / 3.0
        V += sign * np.einsum("t,tkl->kl", weights, phases)
    return V


def classical_vector_mc(components, sequence: ExperimentSequence, t_M: float,
                        t_I: float, n_samples: int, seed: int, *,
                        B_ext: float, constants: PhysicalConstants | None = None,
                        symmetric_dots: bool = True,
                        include_window_backaction: bool = True,
                        zero_intermediate_backaction: bool = False,
                        return_samples: bool = False):
    """Direct phase-simulation estimate of the readout correlation.

    Initial complex Overhauser components are drawn with rms b_rms; the
    readout phases are quadratic forms of the components through the window
    quadrature matrix; between the windows each component picks up its
    Larmor phase over t_M + t_I plus the electron-spin dependent backaction
    imprint sigma A_k * (window + intermediate flip integrals). The two
    electron branches of the double dot enter with sigma = +-1/2 and
    conjugate phase weights.

    zero_intermediate_backaction drops the intermediate imprint (diagnostic:
    must reproduce an intermediate spin echo sample for sample);
    include_window_backaction=False drops the backaction phase inside the
    readout window itself, which is the approximation the window-matrix
    model makes.
    """
    components = tuple(components)
    if len(components) > 8:
        raise ValueError("classical_vector_mc is limited to 8 components")
    if not symmetric_dots:
        raise ValueError("only symmetric dots are implemented")
    constants = constants or default_constants()
    kappa = abs(constants.g_electron) * constants.mu_B / (2 * constants.hbar * B_ext)

    b_rms = np.array([c.b_rms for c in components])
    omega = np.array([c.omega_k for c in components])
    A = np.array([c.A_k for c in components])

    V = {}
    for sigma in (+0.5, -0.5):
        V[sigma] = _phase_matrix(components, sequence,
                                 sigma if include_window_backaction else 0.0, t_M)

    imprint = flip_integral(sequence.outer, t_M) + flip_integral(
        sequence.intermediate, t_I)
    if zero_intermediate_backaction:
        imprint = flip_integral(sequence.outer, t_M)
    chi = {sigma: omega * (t_M + t_I) + sigma * A * imprint for sigma in (+0.5, -0.5)}

    rng = np.random.default_rng(seed)
    z_L = rng.standard_normal((n_samples, len(components))) * b_rms \
        + 1j * rng.standard_normal((n_samples, len(components))) * b_rms
    z_R = rng.standard_normal((n_samples, len(components))) * b_rms \
        + 1j * rng.standard_normal((n_samples, len(components))) * b_rms

    def phases(b, sigma):
        phi1 = kappa * np.einsum("sk,sl,kl->s", b, np.conj(b), V[sigma])
        b2 = b * np.exp(1j * chi[sigma])[None, :]
        phi2 = kappa * np.einsum("sk,sl,kl->s", b2, np.conj(b2), V[sigma])
        drift = max(np.max(np.abs(phi1.imag)), np.max(np.abs(phi2.imag)))
        if drift > 1e-8 * max(1.0, np.max(np.abs(phi1.real))):
            raise RuntimeError("readout phases acquired an imaginary part")
        return phi1.real, phi2.real

    acc = np.zeros(n_samples, dtype=complex)
    for sig_L, sig_R in ((+0.5, -0.5), (-0.5, +0.5)):
        p1L, p2L = phases(z_L, sig_L)
        p1R, p2R = phases(z_R, sig_R)
        for s in (+1, -1):
            acc += 0.25 * np.exp(1j * (p1L + s * p2L)) * np.exp(-1j * (p1R + s * p2R))
    vals = acc.real
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(n_samples))
    result = OracleMC(mean=mean, stderr=stderr, n_samples=n_samples)
    if return_samples:
        return result, vals
    return result
