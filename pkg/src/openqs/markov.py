"""Markov-approximation generators for a qubit coupled to a bath.

Bath correlation functions G(t) enter through half-line Fourier integrals
int_0^inf e^{i zeta t} G(t) dt. Thermal baths carry their full-line transform
h(zeta) = int e^{i zeta t} G(t) dt as an independent closed form, which is used
for consistency checks (detailed balance) but never by the generators.

Delta convention: int_0^inf delta(t) f(t) dt = f(0) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
import scipy.special
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .errors import CovarianceNotPSD, IntegralNotConverged, NegativeTime, ValidationError
from .lindblad import BlochAffine, LindbladGenerator, levi_civita
from .states import PAULI, SIGMA_3, TOL_PSD

QUAD_TOL = 1e-8


def trigamma(z):
    """psi'(z) for complex z with Re z > 0 (recurrence plus asymptotic series)."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    shift = 12
    for k in range(shift):
        acc += 1.0 / (z + k) ** 2
    w = z + shift
    iw = 1.0 / w
    iw2 = iw * iw
    series = iw + 0.5 * iw2 + iw * iw2 * (1 / 6 + iw2 * (-1 / 30 + iw2 * (1 / 42 + iw2 * (-1 / 30 + iw2 * 5 / 66))))
    return acc + series


def derivative_field_spectrum(zeta, beta: float):
    """zeta / (1 - e^{-beta zeta}), the thermal spectrum of a time-derivative field
    in one spatial dimension; equals 1/beta at zeta = 0 and max(zeta, 0) at beta = inf."""
    zeta = np.asarray(zeta, dtype=float)
    if math.isinf(beta):
        return np.where(zeta > 0, zeta, 0.0)
    x = beta * zeta
    safe = np.where(x == 0, 1.0, x)
    # x / (1 - e^{-x}); for x < 0 use the equivalent x e^x / (e^x - 1), which cannot overflow
    pos = np.abs(safe) / -np.expm1(-np.abs(safe))
    neg = np.abs(safe) * np.exp(-np.abs(safe)) / -np.expm1(-np.abs(safe))
    out = np.where(x == 0, 1.0, np.where(x > 0, pos, neg)) / beta
    return out


@dataclass(frozen=True)
class BathCorrelation:
    """Stationary bath correlation G(t) = <B(t) B(0)> (coupling excluded).

    ``coupling`` is the prefactor lambda of the interaction lambda sigma (x) B;
    generators scale with lambda^2. ``evaluator`` is G(t) for real t of either
    sign. ``spectrum`` is the full-line transform h(zeta) when known.
    """

    kind: str
    evaluator: Callable[[np.ndarray], np.ndarray] | None
    coupling: float = 1.0
    beta: float = math.inf
    eps: float = 0.0
    params: dict = field(default_factory=dict)
    spectrum: Callable[[np.ndarray], np.ndarray] | None = None
    scale: float = 1.0

    def __call__(self, t):
        if self.evaluator is None:
            raise ValidationError(f"{self.kind} correlation has no pointwise values")
        return self.evaluator(np.asarray(t, dtype=float))


def thermal_scalar_derivative(beta: float, coupling: float = 1.0, eps: float = 0.05) -> BathCorrelation:
    """Time-derivative of a massless scalar field in one spatial dimension at
    inverse temperature beta, with spectral cutoff e^{-eps |zeta|}.

    h(zeta) = e^{-eps|zeta|} zeta / (1 - e^{-beta zeta}); in the time domain
    G(t) = 1 / (2 pi (eps + i t)^2) + Re psi'(1 + (eps + i t)/beta) / (pi beta^2).
    """
    if not beta > 0 or not eps > 0:
        raise ValidationError("beta and eps must be positive")

    def g(t):
        out = 1.0 / (2 * np.pi * (eps + 1j * t) ** 2)
        if not math.isinf(beta):
            out = out + trigamma(1 + (eps + 1j * np.abs(t)) / beta).real / (np.pi * beta**2)
        return out

    def h(zeta):
        zeta = np.asarray(zeta, dtype=float)
        return np.exp(-eps * np.abs(zeta)) * derivative_field_spectrum(zeta, beta)

    scale = max(eps, 1.0 if math.isinf(beta) else beta)
    return BathCorrelation("thermal_scalar_derivative", g, coupling, beta, eps, {}, h, scale)


def ohmic_cutoff(coupling: float = 1.0, eps: float = 0.05) -> BathCorrelation:
    """Zero-temperature limit of :func:`thermal_scalar_derivative` (ohmic
    spectrum zeta e^{-eps zeta} for zeta > 0)."""
    b = thermal_scalar_derivative(math.inf, coupling, eps)
    return BathCorrelation("ohmic_cutoff", b.evaluator, coupling, math.inf, eps, {}, b.spectrum, b.scale)


def white_noise(g: float, coupling: float = 1.0) -> BathCorrelation:
    """G(t) = g delta(t)."""
    return BathCorrelation("white_noise", None, coupling, params={"g": float(g)},
                           spectrum=lambda z: np.full_like(np.asarray(z, dtype=float), g))


def exponential_correlation(strength: float, decay: float, coupling: float = 1.0) -> BathCorrelation:
    """G(t) = B^2 e^{-decay |t|} with ``strength`` = B^2."""
    if not decay > 0:
        raise ValidationError("decay rate must be positive")

    def h(zeta):
        zeta = np.asarray(zeta, dtype=float)
        return 2 * strength * decay / (decay**2 + zeta**2)

    return BathCorrelation("exponential_single_axis", lambda t: strength * np.exp(-decay * np.abs(t)),
                           coupling, params={"strength": strength, "decay": decay}, spectrum=h,
                           scale=1.0 / decay)


def tabulated_correlation(times, values, eta: float, coupling: float = 1.0) -> BathCorrelation:
    """G(t) from samples on t >= 0 (G(-t) = conj G(t)), zero beyond the last sample.

    ``eta`` is the decay exponent in |G(t)| (1+t)^{1+eta} < const; baths with
    eta <= 0 are not integrable on the half line and are refused.
    """
    if not eta > 0:
        raise ValidationError(f"tabulated baths need a decay exponent eta > 0, got {eta}")
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=complex)
    if t[0] != 0 or np.any(np.diff(t) <= 0):
        raise ValidationError("sample times must start at 0 and increase")
    re, im = CubicSpline(t, v.real), CubicSpline(t, v.imag)
    tmax = t[-1]

    def g(x):
        a = np.abs(x)
        inside = a <= tmax
        val = np.where(inside, re(np.minimum(a, tmax)) + 1j * np.sign(x + 0.0) * im(np.minimum(a, tmax)), 0)
        # G(-t) = conj G(t); sign(0) = 0 keeps Im G(0) = 0 as hermiticity demands
        return val

    tail = abs(v[-1]) * (1 + tmax) / eta
    return BathCorrelation("custom_tabulated", g, coupling,
                           params={"eta": eta, "tmax": tmax, "tail_bound": tail}, scale=tmax)


def _oscillatory(f: Callable[[float], float], zeta: float, weight: str, scale: float,
                 tol: float, upper: float | None = None) -> tuple[float, float]:
    """int_0^inf f(t) w(zeta t) dt for w = cos or sin; returns (value, error)."""
    if weight == "sin" and zeta == 0:
        return 0.0, 0.0
    sign = 1.0
    if zeta < 0:
        zeta = -zeta
        sign = -1.0 if weight == "sin" else 1.0
    split = min(max(20.0 * scale, 1.0), 200.0) if upper is None else upper
    if zeta == 0:
        v1, e1 = quad(f, 0.0, split, limit=500, epsabs=tol / 10, epsrel=1e-12)
        v2, e2 = (0.0, 0.0) if upper is not None else quad(f, split, np.inf, limit=500, epsabs=tol / 10)
    else:
        v1, e1 = quad(f, 0.0, split, weight=weight, wvar=zeta, limit=500, epsabs=tol / 10, epsrel=1e-12)
        if upper is not None:
            v2, e2 = 0.0, 0.0
        else:
            v2, e2 = quad(f, split, np.inf, weight=weight, wvar=zeta, limlst=200, epsabs=tol / 10)
    return sign * (v1 + v2), e1 + e2


class HalfLine(NamedTuple):
    """Real pieces of int_0^inf e^{i zeta t} G(t) dt."""

    cos_re: float  # int cos(zeta t) Re G
    sin_re: float  # int sin(zeta t) Re G
    cos_im: float  # int cos(zeta t) Im G
    sin_im: float  # int sin(zeta t) Im G
    error: float

    @property
    def value(self) -> complex:
        return complex(self.cos_re - self.sin_im, self.sin_re + self.cos_im)


def half_line_parts(bath: BathCorrelation, zeta: float, tol: float = QUAD_TOL) -> HalfLine:
    if bath.kind == "white_noise":
        return HalfLine(bath.params["g"] / 2, 0.0, 0.0, 0.0, 0.0)
    upper = bath.params.get("tmax") if bath.kind == "custom_tabulated" else None

    def re(t):
        return float(np.real(bath(t)))

    def im(t):
        return float(np.imag(bath(t)))

    parts = []
    err = 0.0
    for f, w in ((re, "cos"), (re, "sin"), (im, "cos"), (im, "sin")):
        v, e = _oscillatory(f, zeta, w, bath.scale, tol, upper)
        parts.append(v)
        err += e
    if upper is not None:
        err += bath.params["tail_bound"]
    if not err <= tol:
        raise IntegralNotConverged(
            f"half-line transform of {bath.kind} at zeta={zeta}: error estimate {err:.3e} > {tol:.1e}")
    return HalfLine(*parts, err)


def halfline_fourier(bath: BathCorrelation, zeta: float, tol: float = QUAD_TOL) -> complex:
    """int_0^inf e^{i zeta t} G(t) dt = h(zeta)/2 + i s(zeta).

    The real part is half the spectral density; the imaginary part holds the
    Lamb-type term s(zeta), whose value depends on the cutoff.
    """
    return half_line_parts(bath, zeta, tol).value


class MarkovCoefficients(NamedTuple):
    alpha: float
    b: float
    d: float
    error: float


def markov_coefficients(omega: float, bath: BathCorrelation, tol: float = QUAD_TOL) -> MarkovCoefficients:
    """alpha, b, d for a qubit H_S = (omega/2) sigma3 coupled through lambda sigma1 (x) B.

    alpha = lambda^2 int_0^inf cos(omega s) (G(s) + G(-s)) ds,
    b     = lambda^2 int_0^inf sin(omega s) (G(s) + G(-s)) ds,
    d     = i lambda^2 int_0^inf sin(omega s) (G(s) - G(-s)) ds.
    """
    p = half_line_parts(bath, omega, tol)
    lam2 = bath.coupling**2
    return MarkovCoefficients(2 * lam2 * p.cos_re, 2 * lam2 * p.sin_re, -2 * lam2 * p.sin_im,
                              2 * lam2 * p.error)


def _free_drift(omega: float) -> np.ndarray:
    t = np.zeros((4, 4))
    t[1, 2], t[2, 1] = omega / 2, -omega / 2
    return t


def redfield_drift(omega: float, k: MarkovCoefficients) -> np.ndarray:
    """Raw drift (before the symmetric/antisymmetric split) of the second-order
    Markov equation without time averaging."""
    t = _free_drift(omega)
    t[1, 2] += k.b
    t[2, 2] += k.alpha
    t[3, 3] += k.alpha
    t[3, 0] += k.d
    return t


def redfield_generator(omega: float, bath: BathCorrelation, tol: float = QUAD_TOL) -> BlochAffine:
    return BlochAffine.from_raw(redfield_drift(omega, markov_coefficients(omega, bath, tol)))


def ergodic_average(T: np.ndarray, omega: float, samples: int = 64) -> np.ndarray:
    """Average of U_s T U_{-s} over one period of the free rotation about axis 3.

    The integrand is a trigonometric polynomial of degree 2 in omega s, so the
    periodic trapezoid rule with >= 5 nodes is exact.
    """
    if omega == 0:
        return np.asarray(T, dtype=float).copy()
    acc = np.zeros((4, 4))
    for s in np.arange(samples) * (2 * np.pi / omega / samples):
        c, sn = np.cos(omega * s), np.sin(omega * s)
        u = np.eye(4)
        u[1:3, 1:3] = [[c, -sn], [sn, c]]
        acc += u @ T @ u.T
    return acc / samples


def weak_coupling_drift(omega: float, k: MarkovCoefficients) -> np.ndarray:
    t = _free_drift(omega)
    t[1, 1] += k.alpha / 2
    t[2, 2] += k.alpha / 2
    t[1, 2] += k.b / 2
    t[2, 1] -= k.b / 2
    t[3, 3] += k.alpha
    t[3, 0] += k.d
    return t


def weak_coupling_generator(omega: float, bath: BathCorrelation, tol: float = QUAD_TOL) -> BlochAffine:
    """Redfield drift averaged over the free rotation. The antisymmetric b/2
    block survives the average as a Hamiltonian (Lamb-type) correction."""
    return BlochAffine.from_raw(weak_coupling_drift(omega, markov_coefficients(omega, bath, tol)))


def singular_coupling_generator(omega: float, bath: BathCorrelation, tol: float = QUAD_TOL) -> BlochAffine:
    """Delta-correlated limit: dissipation diag(0, alpha, alpha) with
    alpha = 2 lambda^2 Re int_0^inf G(t) dt and no b, d terms."""
    alpha = 2 * bath.coupling**2 * half_line_parts(bath, 0.0, tol).cos_re
    t = _free_drift(omega)
    t[2, 2] += alpha
    t[3, 3] += alpha
    return BlochAffine.from_raw(t)


def convolutionless_drift(omega: float, k: MarkovCoefficients) -> np.ndarray:
    t = _free_drift(omega)
    t[2, 1] += -k.b
    t[2, 2] += k.alpha
    t[3, 3] += k.alpha
    t[3, 0] += k.d
    return t


def convolutionless_generator(omega: float, bath: BathCorrelation, tol: float = QUAD_TOL) -> BlochAffine:
    return BlochAffine.from_raw(convolutionless_drift(omega, markov_coefficients(omega, bath, tol)))


# ----------------------------------------------------------------------------
# exactly solvable dephasing


@dataclass(frozen=True)
class SpinBosonDephasing:
    """Qubit (Omega/2) sigma3 coupled through lambda sigma3 to an ohmic boson bath."""

    coupling: float
    eps: float
    beta: float
    Omega: float = 1.0

    def __post_init__(self):
        if not (self.coupling > 0 and self.eps > 0 and self.beta > 0):
            raise ValidationError("coupling, eps and beta must be positive")


def dephasing_gamma(t, m: SpinBosonDephasing):
    """Closed-form decoherence exponent Gamma(t) = Gamma_0(t) + Gamma_beta(t).

    Gamma_0 = (lambda^2/pi) ln(1 + (t/eps)^2) (vacuum part),
    Gamma_beta = -(4 lambda^2/pi) ln(|Gamma(1 + eps/beta + i t/beta)| / Gamma(1 + eps/beta)).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise NegativeTime("Gamma(t) is defined for t >= 0")
    lam2 = m.coupling**2
    g0 = lam2 / np.pi * np.log1p((t / m.eps) ** 2)
    if math.isinf(m.beta):
        return g0
    x = 1 + m.eps / m.beta
    gb = -(4 * lam2 / np.pi) * (scipy.special.loggamma(x + 1j * t / m.beta).real - scipy.special.gammaln(x))
    return g0 + gb


def dephasing_gamma_quadrature(t: float, m: SpinBosonDephasing, tol: float = 1e-11) -> float:
    """Gamma(t) = (2 lambda^2/pi) int_0^inf (1 - cos wt)/w coth(beta w/2) e^{-eps w} dw by quadrature."""
    if t < 0:
        raise NegativeTime("Gamma(t) is defined for t >= 0")
    if t == 0:
        return 0.0
    beta, eps = m.beta, m.eps

    def f(w):
        th = 1.0 if math.isinf(beta) else 1.0 / math.tanh(beta * w / 2)
        return th * math.exp(-eps * w) / w

    def full(w):
        if w == 0:
            return 0.0 if math.isinf(beta) else t * t / beta
        return 2 * math.sin(w * t / 2) ** 2 * f(w)

    delta = min(1.0, 2 * np.pi / t)
    v1, e1 = quad(full, 0.0, delta, limit=200, epsabs=tol, epsrel=1e-13)
    v2, e2 = quad(f, delta, np.inf, limit=500, epsabs=tol, epsrel=1e-13)
    v3, e3 = quad(f, delta, np.inf, weight="cos", wvar=t, limlst=200, epsabs=tol)
    err = e1 + e2 + e3
    if err > 1e3 * tol:
        raise IntegralNotConverged(f"dephasing quadrature at t={t}: error estimate {err:.3e}")
    return 2 * m.coupling**2 / np.pi * (v1 + v2 - v3)


def coherence_decay(t, m: SpinBosonDephasing):
    """|rho_10(t)| / |rho_10(0)| = e^{-Gamma(t)}."""
    return np.exp(-dephasing_gamma(t, m))


# ----------------------------------------------------------------------------
# classical stochastic magnetic fields


@dataclass(frozen=True)
class WhiteNoiseCovariance:
    """<B_i(t) B_j(s)> = G_ij delta(t - s)."""

    G: np.ndarray


@dataclass(frozen=True)
class SingleAxisExponential:
    """Field along axis 1 with <B(t) B(s)> = strength e^{-decay |t - s|}."""

    strength: float
    decay: float


class StochasticFieldResult(NamedTuple):
    C: np.ndarray  # Kossakowski matrix against bare Pauli matrices
    kappa: np.ndarray
    H2: np.ndarray  # sum eps_ijk kappa_ij sigma_k
    generator: LindbladGenerator


def _rotation(s_cos: float, s_sin: float, s_one: float) -> np.ndarray:
    """Entrywise integral of U(s) against a scalar weight, given int cos, int sin, int 1."""
    return np.array([[s_cos, -s_sin, 0.0], [s_sin, s_cos, 0.0], [0.0, 0.0, s_one]])


def stochastic_field_generator(omega: float, cov, tol: float = QUAD_TOL) -> StochasticFieldResult:
    """Second-order generator for H(t) = (omega/2) sigma3 + B(t).sigma averaged over the noise.

    C_ij  = sum_k int_0^inf [G_ik(s) U_kj(-s) + U_ik(s) G_kj(-s)] ds,
    kappa_ij = 1/2 sum_k int_0^inf [G_ik(s) U_kj(-s) - U_ik(s) G_kj(-s)] ds,
    with U(s) the rotation of sigma_j under the free evolution.
    """
    if isinstance(cov, WhiteNoiseCovariance):
        g = np.asarray(cov.G, dtype=float)
        if g.shape != (3, 3) or np.max(np.abs(g - g.T)) > 1e-12:
            raise CovarianceNotPSD("white-noise covariance must be a symmetric 3x3 matrix")
        lo = np.linalg.eigvalsh(g)[0]
        if lo < -TOL_PSD:
            raise CovarianceNotPSD(f"white-noise covariance has eigenvalue {lo:.3e}")
        # delta convention: each half-line integral picks G U(0) / 2
        first = g / 2
        second = g / 2
    elif isinstance(cov, SingleAxisExponential):
        bath = exponential_correlation(cov.strength, cov.decay)
        p = half_line_parts(bath, omega, tol)
        p0 = half_line_parts(bath, 0.0, tol)
        # int G(s) U(-s) with G = strength e^{-decay s} on entry (1,1)
        u_neg = _rotation(p.cos_re, -p.sin_re, p0.cos_re)
        u_pos = _rotation(p.cos_re, p.sin_re, p0.cos_re)
        e11 = np.zeros((3, 3))
        e11[0, 0] = 1.0
        first = e11 @ u_neg
        second = u_pos @ e11
    else:
        raise ValidationError(f"unsupported covariance specification {type(cov).__name__}")
    C = first + second
    kappa = 0.5 * (first - second)
    eps = levi_civita()
    H2 = sum(np.einsum("ij,ij->", eps[:, :, k], kappa) * PAULI[k] for k in range(3))
    H = omega / 2 * SIGMA_3 + H2
    return StochasticFieldResult(C, kappa, H2, LindbladGenerator.from_pauli(H, C))
