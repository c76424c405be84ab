import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize

from openqs.errors import CovarianceNotPSD, IntegralNotConverged, NegativeTime, ValidationError
from openqs.lindblad import (
    BlochAffine,
    cp_ledger,
    determinant_rate,
    evolve,
    from_bloch_affine,
    is_cp_generator,
    positivity_witness,
    stationary_states,
    to_bloch_affine,
)
from openqs.markov import (
    SingleAxisExponential,
    SpinBosonDephasing,
    WhiteNoiseCovariance,
    coherence_decay,
    convolutionless_generator,
    dephasing_gamma,
    dephasing_gamma_quadrature,
    derivative_field_spectrum,
    ergodic_average,
    exponential_correlation,
    halfline_fourier,
    markov_coefficients,
    ohmic_cutoff,
    redfield_drift,
    redfield_generator,
    singular_coupling_generator,
    stochastic_field_generator,
    tabulated_correlation,
    thermal_scalar_derivative,
    trigamma,
    weak_coupling_drift,
    weak_coupling_generator,
    white_noise,
)


@pytest.fixture(scope="module")
def thermal():
    return thermal_scalar_derivative(1.0, coupling=1.0, eps=0.05)


@pytest.fixture(scope="module")
def coeffs(thermal):
    return markov_coefficients(1.0, thermal)


def test_trigamma_against_mpmath():
    mpmath = pytest.importorskip("mpmath")
    for z in (1.0, 0.3 + 2j, 1.05 + 0.01j, 2.5 - 7j, 1 + 40j, 0.01 + 0.5j):
        ref = complex(mpmath.psi(1, z))
        assert abs(trigamma(z) - ref) < 1e-13 * max(1, abs(ref))


def test_trigamma_recurrence():
    z = np.array([0.7 + 0.2j, 3.0 - 1j])
    assert np.abs(trigamma(z) - trigamma(z + 1) - 1 / z**2).max() < 1e-14


def test_spectrum_limits():
    assert derivative_field_spectrum(0.0, 2.0) == pytest.approx(0.5)
    assert derivative_field_spectrum(-1.0, math.inf) == 0
    z = np.array([0.3, 1.7])
    # detailed balance h(-z) = e^{-beta z} h(z)
    assert np.abs(derivative_field_spectrum(-z, 1.3) - np.exp(-1.3 * z) * derivative_field_spectrum(z, 1.3)).max() < 1e-15


def test_thermal_time_domain_matches_fourier_inversion(thermal):
    # G(t) = (1/2pi) int e^{-i zeta t} h(zeta) d zeta, integrated independently on each half line
    for t in (0.0, 0.4, 2.0):
        re = sum(quad(lambda z: thermal.spectrum(s * z) * math.cos(z * t), 0, np.inf, limit=400)[0] for s in (1, -1))
        im = sum(-s * quad(lambda z: thermal.spectrum(s * z) * math.sin(z * t), 0, np.inf, limit=400)[0]
                 for s in (1, -1))
        g = complex(thermal(t))
        assert abs(g - complex(re, im) / (2 * np.pi)) < 1e-7


def test_thermal_correlation_kms_and_hermiticity(thermal):
    t = np.array([0.3, 1.0, 4.0])
    assert np.abs(thermal(-t) - np.conj(thermal(t))).max() < 1e-15


def test_kms_and_spectrum_identity(coeffs, thermal):
    k = coeffs
    assert abs((k.alpha - k.d) - math.exp(-1.0) * (k.alpha + k.d)) < 1e-9
    assert abs((k.alpha + k.d) - thermal.spectrum(1.0)) < 1e-9
    assert abs(halfline_fourier(thermal, 1.0).real - thermal.spectrum(1.0) / 2) < 1e-9


def test_exponential_bath_closed_form():
    B2, kappa, lam, w = 0.8, 0.6, 0.5, 1.7
    k = markov_coefficients(w, exponential_correlation(B2, kappa, coupling=lam))
    assert abs(k.alpha - lam**2 * 2 * B2 * kappa / (kappa**2 + w**2)) < 1e-12
    assert abs(k.b - lam**2 * 2 * B2 * w / (kappa**2 + w**2)) < 1e-12
    assert abs(k.d) < 1e-15


def test_white_noise_delta_convention():
    k = markov_coefficients(2.0, white_noise(0.4, coupling=0.5))
    assert k.alpha == pytest.approx(0.25 * 0.4) and k.b == 0 and k.d == 0


def test_tabulated_bath_matches_analytic():
    t = np.linspace(0, 40, 8001)
    tab = tabulated_correlation(t, 0.8 * np.exp(-0.6 * t), eta=1.0)
    ref = markov_coefficients(1.2, exponential_correlation(0.8, 0.6))
    k = markov_coefficients(1.2, tab)
    assert abs(k.alpha - ref.alpha) < 1e-8 and abs(k.b - ref.b) < 1e-8
    with pytest.raises(ValidationError):
        tabulated_correlation(t, np.exp(-t), eta=0.0)


def test_tabulated_bath_heavy_tail_rejected():
    t = np.linspace(0, 10, 101)
    with pytest.raises(IntegralNotConverged):
        markov_coefficients(1.0, tabulated_correlation(t, 1 / (1 + t), eta=0.1))


def test_ergodic_average_gives_weak_coupling(coeffs):
    assert np.abs(ergodic_average(redfield_drift(1.0, coeffs), 1.0) - weak_coupling_drift(1.0, coeffs)).max() < 1e-14


def test_redfield_not_positive_witness_is_minimum(thermal, coeffs):
    ba = redfield_generator(1.0, thermal)
    led = cp_ledger(ba)
    assert not led.cp and not led.positive_necessary
    w = positivity_witness(ba)
    assert w is not None

    def f(x):
        r = np.array([np.sin(x[0]) * np.cos(x[1]), np.sin(x[0]) * np.sin(x[1]), np.cos(x[0])])
        return determinant_rate(ba, r)

    rng = np.random.default_rng(0)
    best = min(minimize(f, rng.uniform([0, 0], [np.pi, 2 * np.pi]), method="Nelder-Mead",
                        options={"xatol": 1e-12, "fatol": 1e-15}).fun for _ in range(30))
    assert abs(w.ddet - best) < 1e-9
    # at the closed-form candidate the rate is -d^2/(4 alpha)
    a, b, d = coeffs.alpha, coeffs.b, coeffs.d
    root = math.sqrt((4 * a * a - d * d) / (a * a + b * b))
    cand = np.array([0.5 * root, -b / (2 * a) * root, -d / (2 * a)])
    assert abs(determinant_rate(ba, cand) + d * d / (4 * a)) < 1e-12


def test_weak_coupling_gibbs(thermal):
    ba = weak_coupling_generator(1.0, thermal)
    assert cp_ledger(ba).cp
    st = stationary_states(from_bloch_affine(ba))
    r3 = np.trace(st[0] @ np.diag([1, -1])).real
    assert abs(r3 + math.tanh(0.5)) < 1e-9


def test_singular_and_convolutionless(thermal):
    sc = singular_coupling_generator(1.0, thermal)
    assert cp_ledger(sc).cp and np.abs(sc.uvw).max() == 0
    assert is_cp_generator(from_bloch_affine(sc)).completely_positive
    tcl = convolutionless_generator(1.0, thermal)
    assert not cp_ledger(tcl).cp


def test_zero_temperature_bath():
    b = ohmic_cutoff(coupling=1.0, eps=0.05)
    k = markov_coefficients(1.0, b)
    # no thermal excitation: alpha - d = h(-1) = 0
    assert abs(k.alpha - k.d) < 1e-9 and abs(k.alpha + k.d - math.exp(-0.05)) < 1e-9


def test_dephasing_closed_form_against_quadrature():
    for beta in (0.5, 2.0, math.inf):
        m = SpinBosonDephasing(coupling=0.4, eps=0.1, beta=beta)
        for t in (0.05, 1.0, 7.0):
            assert abs(dephasing_gamma(t, m) - dephasing_gamma_quadrature(t, m)) < 1e-9


def test_dephasing_regimes():
    vac = SpinBosonDephasing(coupling=0.3, eps=0.02, beta=math.inf)
    t = 1e-4
    assert dephasing_gamma(t, vac) == pytest.approx(0.09 / np.pi * (t / 0.02) ** 2, rel=1e-4)
    m = SpinBosonDephasing(coupling=0.3, eps=0.02, beta=1.0)
    t = np.array([50.0, 80.0])
    slope = (dephasing_gamma(t + 1e-3, m) - dephasing_gamma(t - 1e-3, m)) / 2e-3
    assert np.abs(slope / (2 * 0.09) - 1).max() < 1e-3
    assert coherence_decay(0.0, m) == 1.0
    with pytest.raises(NegativeTime):
        dephasing_gamma(-1.0, m)


def test_white_noise_field_generator():
    G = np.array([[1.0, 0.2, 0], [0.2, 0.5, 0.1], [0, 0.1, 0.3]])
    res = stochastic_field_generator(1.0, WhiteNoiseCovariance(G))
    assert np.abs(res.C - G).max() < 1e-15 and np.abs(res.H2).max() == 0
    assert cp_ledger(to_bloch_affine(res.generator)).cp
    with pytest.raises(CovarianceNotPSD):
        stochastic_field_generator(1.0, WhiteNoiseCovariance(np.diag([1.0, -0.1, 0])))


def test_white_noise_field_matches_averaged_unitaries():
    # isotropic white noise of strength g: Bloch vector decays as e^{-4 g t}
    g, t = 0.3, 0.8
    res = stochastic_field_generator(0.0, WhiteNoiseCovariance(g * np.eye(3)))
    rho = evolve(res.generator, np.array([[1, 0], [0, 0]]), t)
    assert abs((rho[0, 0] - rho[1, 1]).real - math.exp(-4 * g * t)) < 1e-14


def test_single_axis_field():
    B2, lam, w = 0.7, 0.5, 1.3
    res = stochastic_field_generator(w, SingleAxisExponential(B2, lam))
    ref = B2 / (lam**2 + w**2) * np.array([[2 * lam, w, 0], [w, 0, 0], [0, 0, 0]])
    assert np.abs(res.C - ref).max() < 1e-12
    assert not is_cp_generator(res.generator).completely_positive
    assert positivity_witness(to_bloch_affine(res.generator)) is not None
    # kappa is what is left after symmetrization; it generates the Hamiltonian correction
    assert np.abs(res.H2 - res.H2.conj().T).max() < 1e-15


def test_bath_parameter_validation():
    with pytest.raises(ValidationError):
        thermal_scalar_derivative(-1.0)
    with pytest.raises(ValidationError):
        exponential_correlation(1.0, 0.0)
    with pytest.raises(ValidationError):
        SpinBosonDephasing(coupling=0.1, eps=0.0, beta=1.0)
