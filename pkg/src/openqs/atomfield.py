"""Two-level atoms coupled to a thermal massless scalar field.

Single atom: H_S = (omega/2) n.sigma, dissipator with Kossakowski matrix
(against bare Pauli matrices) C_ij = A delta_ij - i B eps_ijk n_k + C n_i n_j.

Two atoms in the same field at the same point: dissipator
D[rho] = sum_ij A_ij (Sigma_j rho Sigma_i - 1/2 {Sigma_i Sigma_j, rho}) with
Sigma_i = sigma_i (x) 1 + 1 (x) sigma_i and the single-atom matrix A_ij. Lamb-type
Hamiltonian corrections are not included.

Two-atom states are stored as real components of
rho = (1/4) [1 + sum v1_i 1 (x) sigma_i + sum v2_i sigma_i (x) 1 + sum M_ij sigma_i (x) sigma_j].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg
import scipy.special
from scipy.integrate import solve_ivp

from .entanglement import concurrence
from .errors import (
    BlochOutOfBall,
    InputNotPure,
    IntegrationToleranceExceeded,
    NegativeTime,
    OutOfDomain,
    TauOutOfRange,
    ValidationError,
)
from .lindblad import LindbladGenerator, generator_from_operators, levi_civita, superoperator, unvec, vec
from .markov import derivative_field_spectrum
from .states import PAULI, PAULI4, SIGMA_0, SIGMA_3, TOL, as_matrix

EPS3 = levi_civita()


@dataclass(frozen=True)
class AtomParams:
    """Level splitting omega, unit axis n, inverse temperature beta (inf allowed)."""

    omega: float
    n: tuple[float, float, float]
    beta: float

    def __post_init__(self):
        nv = np.asarray(self.n, dtype=float)
        if nv.shape != (3,) or abs(np.linalg.norm(nv) - 1.0) > 1e-12:
            raise ValidationError(f"n must be a unit 3-vector, got norm {np.linalg.norm(nv):.15g}")
        if not self.omega > 0:
            raise ValidationError(f"omega must be positive, got {self.omega}")
        if not self.beta > 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")

    @property
    def axis(self) -> np.ndarray:
        return np.asarray(self.n, dtype=float)


class SingleAtomCoeffs(NamedTuple):
    A: float
    B: float
    C: float
    R: float


def wightman_fourier(zeta, beta: float, d: int = 4):
    """Fourier transform of the thermal Wightman function of a massless scalar
    field in d spacetime dimensions, evaluated at the atom position:

    G(zeta) = [2 |zeta|^{d-2} / ((4 pi)^{(d-1)/2} Gamma((d-1)/2))] (pi/zeta) / (1 - e^{-beta zeta}).

    At zeta = 0 the finite limit is returned for d >= 4 (1/(2 pi beta) for d = 4,
    0 for d > 4); for d <= 3 the limit diverges and OutOfDomain is raised.
    """
    if int(d) != d or d < 2:
        raise ValidationError(f"d must be an integer >= 2, got {d}")
    zeta = np.asarray(zeta, dtype=float)
    pref = 2.0 * math.pi / ((4 * math.pi) ** ((d - 1) / 2) * scipy.special.gamma((d - 1) / 2))
    if np.any(zeta == 0) and d <= 3:
        raise OutOfDomain(f"G(0) diverges for d = {d}")
    z = np.where(zeta == 0, 1.0, zeta)
    # |z|^{d-2} / z / (1 - e^{-beta z}) = |z|^{d-3} sign(z) / (1 - e^{-beta z})
    if math.isinf(beta):
        planck = np.where(z > 0, 1.0, 0.0)
    else:
        # 1 / (1 - e^{-beta z}), written so that neither branch overflows
        a = beta * np.abs(z)
        planck = np.where(z > 0, 1.0 / -np.expm1(-a), -np.exp(-a) / -np.expm1(-a))
    val = pref * np.abs(z) ** (d - 3) * np.sign(z) * planck
    if d == 4:
        zero = 0.0 if math.isinf(beta) else pref / beta
    else:
        zero = 0.0
    out = np.where(zeta == 0, zero, val)
    return out if out.ndim else float(out)


def single_atom_coeffs(p: AtomParams) -> SingleAtomCoeffs:
    """Closed forms: A = (w/4pi)(1+x)/(1-x), B = w/4pi, C = (w/4pi)[2/(beta w) - (1+x)/(1-x)],
    R = B/A = (1-x)/(1+x) with x = e^{-beta w}."""
    w = p.omega
    k = w / (4 * math.pi)
    if math.isinf(p.beta):
        return SingleAtomCoeffs(k, k, -k, 1.0)
    bw = p.beta * w
    coth = 1.0 / math.tanh(bw / 2)  # (1+x)/(1-x)
    return SingleAtomCoeffs(k * coth, k, k * (2 / bw - coth), math.tanh(bw / 2))


def _psi_tensors(n: np.ndarray) -> dict[str, np.ndarray]:
    """psi^(0) = n n^T and psi^(+-) = (1 - n n^T +- i eps.n)/2, the projections of
    sigma_i(xi) onto Pauli matrices for the three Bohr frequencies xi = 0, +-."""
    nn = np.outer(n, n)
    en = np.einsum("ijk,k->ij", EPS3, n)
    return {"0": nn, "+": 0.5 * (np.eye(3) - nn + 1j * en), "-": 0.5 * (np.eye(3) - nn - 1j * en)}


def kossakowski_from_spectrum(n: Sequence[float], omega: float, h) -> np.ndarray:
    """C_ij = sum_xi sum_kl h_kl(xi omega) psi^(xi)_ki psi^(-xi)_lj.

    ``h`` maps a frequency to the 3x3 spectral matrix of the field components
    coupled to sigma_1..3.
    """
    psi = _psi_tensors(np.asarray(n, dtype=float))
    out = np.zeros((3, 3), dtype=complex)
    for xi, sgn, opp in (("0", 0, "0"), ("+", 1, "-"), ("-", -1, "+")):
        out += psi[xi].T @ np.asarray(h(sgn * omega), dtype=complex) @ psi[opp]
    return out


def single_atom_kossakowski(p: AtomParams) -> np.ndarray:
    """C_ij built from G_beta(0), G_beta(+-omega) (d = 4) via the psi tensors."""
    return kossakowski_from_spectrum(p.axis, p.omega,
                                     lambda z: wightman_fourier(z, p.beta, 4) * np.eye(3))


def single_atom_generator(p: AtomParams) -> LindbladGenerator:
    H = 0.5 * p.omega * sum(nk * s for nk, s in zip(p.axis, PAULI))
    return LindbladGenerator.from_pauli(H, single_atom_kossakowski(p))


def dephasing_markov_generator(Omega: float, beta: float, coupling: float) -> LindbladGenerator:
    """Weak-coupling generator for H_S = (Omega/2) sigma3 coupled through
    coupling * sigma3 to the time derivative of a 1+1 dimensional thermal field.
    Only C_33 = coupling^2 / beta survives, so coherences decay at rate 2 coupling^2 / beta."""
    n = (0.0, 0.0, 1.0)
    e33 = np.zeros((3, 3))
    e33[2, 2] = 1.0
    C = kossakowski_from_spectrum(n, Omega,
                                  lambda z: coupling**2 * derivative_field_spectrum(z, beta) * e33)
    return LindbladGenerator.from_pauli(0.5 * Omega * SIGMA_3, C)


def stationary_bloch(p: AtomParams) -> np.ndarray:
    return -single_atom_coeffs(p).R * p.axis


def transition_probability(p: AtomParams, r_i: Sequence[float], r_f: Sequence[float], t: float) -> float:
    """Tr[rho_f gamma_t(rho_i)] for pure initial/final states with Bloch vectors r_i, r_f.

    Uses the closed form with decay rates 4A (along n) and 2(2A + C) (transverse)
    and precession at the bare frequency omega.
    """
    if t < 0:
        raise NegativeTime(f"t must be >= 0, got {t}")
    ri, rf = np.asarray(r_i, dtype=float), np.asarray(r_f, dtype=float)
    for name, r in (("initial", ri), ("final", rf)):
        if np.linalg.norm(r) > 1 + TOL:
            raise BlochOutOfBall(f"{name} Bloch vector has norm {np.linalg.norm(r):.12g} > 1")
    k = single_atom_coeffs(p)
    n = p.axis
    e_par = math.exp(-4 * k.A * t)
    e_perp = math.exp(-2 * (2 * k.A + k.C) * t)
    fi, ff = ri @ n, rf @ n
    wt = p.omega * t
    val = 0.5 * (1 - ff * (1 - e_par) * k.R + e_par * fi * ff
                 + e_perp * ((ri @ rf - fi * ff) * math.cos(wt) + n @ np.cross(ri, rf) * math.sin(wt)))
    return float(val)


def excitation_probability(p: AtomParams, t: float) -> float:
    """Ground to excited: (1 - e^{-4At}) / (1 + e^{beta omega})."""
    k = single_atom_coeffs(p)
    boltz = 0.0 if math.isinf(p.beta) else 1.0 / (1.0 + math.exp(p.beta * p.omega))
    return boltz * (1 - math.exp(-4 * k.A * t))


def excitation_rate(p: AtomParams) -> float:
    """(omega/pi) / (e^{beta omega} - 1), the t = 0 slope of the excitation probability."""
    if math.isinf(p.beta):
        return 0.0
    return p.omega / math.pi / math.expm1(p.beta * p.omega)


# ----------------------------------------------------------------------------
# two atoms

SIGMA_TOTAL = tuple(np.kron(s, SIGMA_0) + np.kron(SIGMA_0, s) for s in PAULI)
S_TOTAL = 2 * sum(np.kron(s, s) for s in PAULI)


def singlet_projector() -> np.ndarray:
    """P = (1 - S/2)/4 with S = 2 sum_i sigma_i (x) sigma_i; the (|01> - |10>)/sqrt2 projector."""
    return 0.25 * (np.eye(4) - S_TOTAL / 2)


@dataclass(frozen=True, eq=False)
class TwoAtomState:
    v1: np.ndarray  # rho_0i, coefficients of 1 (x) sigma_i
    v2: np.ndarray  # rho_i0, coefficients of sigma_i (x) 1
    M: np.ndarray  # rho_ij, coefficients of sigma_i (x) sigma_j

    @property
    def tau(self) -> float:
        return float(np.trace(self.M))

    def to_matrix(self, identity: float = 1.0) -> np.ndarray:
        """4x4 matrix; pass identity=0 for derivatives, which carry no trace."""
        m = identity * np.eye(4, dtype=complex)
        for i, s in enumerate(PAULI):
            m += self.v1[i] * np.kron(SIGMA_0, s) + self.v2[i] * np.kron(s, SIGMA_0)
            for j, t in enumerate(PAULI):
                m += self.M[i, j] * np.kron(s, t)
        return m / 4

    @classmethod
    def from_matrix(cls, rho) -> "TwoAtomState":
        m = as_matrix(rho)
        comp = np.array([[np.trace(m @ np.kron(a, b)).real for b in PAULI4] for a in PAULI4])
        return cls(comp[0, 1:].copy(), comp[1:, 0].copy(), comp[1:, 1:].copy())

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.v1, self.v2, self.M.ravel()])

    @classmethod
    def from_vector(cls, y) -> "TwoAtomState":
        y = np.asarray(y, dtype=float)
        return cls(y[:3].copy(), y[3:6].copy(), y[6:].reshape(3, 3).copy())

    @classmethod
    def product(cls, x: Sequence[float], y: Sequence[float]) -> "TwoAtomState":
        """(1 + x.sigma)/2 (x) (1 + y.sigma)/2."""
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return cls(y.copy(), x.copy(), np.outer(x, y))


def two_atom_rhs(p: AtomParams, s: TwoAtomState) -> TwoAtomState:
    """Time derivative of the components under the two-atom dissipator."""
    k = single_atom_coeffs(p)
    A, B, C = k.A, k.B, k.C
    n = p.axis
    nn = np.outer(n, n)
    eye = np.eye(3)
    tau = s.tau
    M = s.M
    K = (2 * A + C) * eye - C * nn
    d1 = -2 * (K @ s.v1 - B * M @ n) - 2 * B * (2 + tau) * n
    d2 = -2 * (K @ s.v2 - B * M.T @ n) - 2 * B * (2 + tau) * n
    mix = (B * eye * (n @ (s.v1 + s.v2))
           + C * nn @ (M + 2 * M.T)
           + C * (M + 2 * M.T) @ nn)
    dM = (-4 * ((2 * A + C) * M + (A + C) * M.T - ((A + C) * eye - C * nn) * tau)
          - 4 * B * (np.outer(n, s.v1) + np.outer(s.v2, n))
          - 2 * B * (np.outer(n, s.v2) + np.outer(s.v1, n))
          + 2 * mix
          - 4 * C * eye * (n @ M @ n))
    return TwoAtomState(d1, d2, dM)


def two_atom_generator(p: AtomParams) -> LindbladGenerator:
    """The 4-level generator sum A_ij (Sigma_j rho Sigma_i - 1/2 {Sigma_i Sigma_j, rho}), no Hamiltonian."""
    return generator_from_operators(np.zeros((4, 4)), SIGMA_TOTAL, single_atom_kossakowski(p))


def two_atom_dissipator(p: AtomParams, rho) -> np.ndarray:
    """Direct operator-sum evaluation of the two-atom dissipator."""
    a = single_atom_kossakowski(p)
    m = as_matrix(rho)
    out = np.zeros((4, 4), dtype=complex)
    for i, si in enumerate(SIGMA_TOTAL):
        for j, sj in enumerate(SIGMA_TOTAL):
            prod = si @ sj
            out += a[i, j] * (sj @ m @ si - 0.5 * (prod @ m + m @ prod))
    return out


class TwoAtomTrajectory(NamedTuple):
    times: np.ndarray
    states: list[TwoAtomState]
    converged: bool  # rhs norm at the last sample below 1e-10


def evolve_two_atom(p: AtomParams, s0: TwoAtomState, times: Sequence[float],
                    rtol: float = 1e-10, atol: float = 1e-13, check_tol: float = 1e-7) -> TwoAtomTrajectory:
    """Integrate the 15 component equations with DOP853.

    The final state is compared with the dense exponential of the 16 x 16
    superoperator; a discrepancy above ``check_tol`` raises
    IntegrationToleranceExceeded.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise NegativeTime("sample times must be >= 0")

    def f(_t, y):
        return two_atom_rhs(p, TwoAtomState.from_vector(y)).to_vector()

    sol = solve_ivp(f, (0.0, float(times.max())), s0.to_vector(), method="DOP853",
                    t_eval=times, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationToleranceExceeded(f"two-atom integration failed: {sol.message}")
    states = [TwoAtomState.from_vector(sol.y[:, k]) for k in range(len(times))]
    tend = float(times.max())
    ref = unvec(scipy.linalg.expm(tend * superoperator(two_atom_generator(p))) @ vec(s0.to_matrix()), 4)
    last = states[int(np.argmax(times))].to_matrix()
    gap = float(np.max(np.abs(last - ref)))
    if gap > check_tol:
        raise IntegrationToleranceExceeded(
            f"integrated state differs from exact exponential by {gap:.3e} (> {check_tol:.1e})")
    rhs = two_atom_rhs(p, states[-1]).to_vector()
    return TwoAtomTrajectory(times, states, bool(np.linalg.norm(rhs) < 1e-10))


def _check_tau(tau: float):
    if not -3 - TOL <= tau <= 1 + TOL:
        raise TauOutOfRange(f"tau = {tau} outside [-3, 1]")


def asymptotic_state(tau: float, R: float, n: Sequence[float] = (0.0, 0.0, 1.0)) -> TwoAtomState:
    """Stationary state reached from any initial state with Tr M = tau.

    Components: v1_i = v2_i = -R (tau + 3) n_i / (3 + R^2),
    M_ij = [(tau - R^2) delta_ij + R^2 (tau + 3) n_i n_j] / (3 + R^2).
    """
    _check_tau(tau)
    if not -TOL <= R <= 1 + TOL:
        raise ValidationError(f"R = {R} outside [0, 1]")
    n = np.asarray(n, dtype=float)
    v = -R * (tau + 3) * n / (3 + R * R)
    M = ((tau - R * R) * np.eye(3) + R * R * (tau + 3) * np.outer(n, n)) / (3 + R * R)
    return TwoAtomState(v.copy(), v.copy(), M)


def asymptotic_concurrence(tau: float, R: float) -> float:
    """max{ (3 - R^2)/(2(3 + R^2)) [ (5R^2 - 3)/(3 - R^2) - tau ], 0 }."""
    _check_tau(tau)
    val = (3 - R * R) / (2 * (3 + R * R)) * ((5 * R * R - 3) / (3 - R * R) - tau)
    return max(val, 0.0)


def asymptotic_from_projectors(p: AtomParams, rho0) -> np.ndarray:
    """Asymptote built from the singlet projector P, Q = 1 - P and the product
    stationary state rho_0 = [(1 - R n.sigma)/2]^{(x)2}."""
    R = single_atom_coeffs(p).R
    one = 0.5 * (SIGMA_0 - R * sum(nk * s for nk, s in zip(p.axis, PAULI)))
    r0 = np.kron(one, one)
    P = singlet_projector()
    Q = np.eye(4) - P
    m = as_matrix(rho0)
    out = np.zeros((4, 4), dtype=complex)
    for proj in (P, Q):
        block = proj @ r0 @ proj
        out += block / np.trace(block).real * np.trace(proj @ m).real
    return out


def epsilon_family(eps: float) -> TwoAtomState:
    """rho(0) = (eps/4) 1 + (1 - eps) P, a singlet mixed with white noise."""
    if not 0 <= eps <= 1:
        raise ValidationError(f"eps must lie in [0, 1], got {eps}")
    return TwoAtomState.from_matrix(eps / 4 * np.eye(4) + (1 - eps) * singlet_projector())


# ----------------------------------------------------------------------------
# entanglement generation test


class EntanglementTest(NamedTuple):
    fires: bool
    lhs: float
    rhs: float

    @property
    def statistic(self) -> float:
        return self.rhs - self.lhs


def _pure_vector(phi) -> np.ndarray:
    v = np.asarray(phi, dtype=complex)
    if v.shape == (2, 2):
        w, vecs = np.linalg.eigh(0.5 * (v + v.conj().T))
        if abs(w[-1] - 1) > TOL or abs(w[0]) > TOL:
            raise InputNotPure(f"state is not pure: eigenvalues {w}")
        return vecs[:, -1]
    if v.shape != (2,):
        raise InputNotPure(f"expected a 2-vector or 2x2 projector, got shape {v.shape}")
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise InputNotPure("zero vector")
    return v / nrm


def _orthogonal(v: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(v[1]), np.conj(v[0])])


def entanglement_generation_test(p: AtomParams, phi, psi, H12: np.ndarray | None = None,
                                 tol: float = 1e-14) -> EntanglementTest:
    """Check <u|A|u><v|C^T|v> < |<u|(Re B + i H12)|v>|^2 with A = B = C the
    single-atom Kossakowski matrix.

    u_i = <phi~|sigma_i|phi>, v_i = <psi|sigma_i|psi~>, where phi~ and psi~ are
    the orthogonal complements; both vectors are normalized (the inequality is
    homogeneous of degree 4 in each, so its verdict is unchanged). H12 defaults
    to zero.
    """
    a = single_atom_kossakowski(p)
    f = _pure_vector(phi)
    g = _pure_vector(psi)
    u = np.array([_orthogonal(f).conj() @ s @ f for s in PAULI])
    v = np.array([g.conj() @ s @ _orthogonal(g) for s in PAULI])
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    h12 = np.zeros((3, 3)) if H12 is None else np.asarray(H12, dtype=complex)
    lhs = (u.conj() @ a @ u).real * (v.conj() @ a.T @ v).real
    rhs = abs(u.conj() @ (a.real + 1j * h12) @ v) ** 2
    return EntanglementTest(bool(rhs - lhs > tol), float(lhs), float(rhs))


def two_atom_concurrence(s: TwoAtomState) -> float:
    return concurrence(s.to_matrix())
