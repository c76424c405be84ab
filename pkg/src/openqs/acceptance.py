"""Acceptance checks, one function per criterion.

Each check returns a list of :class:`Row`. A criterion passes when all of its
rows pass. The CLI ``repro`` suite and the test suite both run these.
"""

from __future__ import annotations

import math
import time
from typing import Callable, NamedTuple

import numpy as np

from . import atomfield as af
from .channels import apply, choi_of, from_linear_map, is_completely_positive, is_positive_map, tensor_channel, transposition
from .entanglement import concurrence, maximally_entangled, partial_transpose, werner_state
from .lindblad import (
    LindbladGenerator,
    cp_ledger,
    evolve,
    from_bloch_affine,
    is_cp_generator,
    orthonormal_basis,
    positivity_witness,
    stationary_states,
    to_bloch_affine,
    two_level_relaxation,
)
from .markov import (
    SingleAxisExponential,
    SpinBosonDephasing,
    WhiteNoiseCovariance,
    dephasing_gamma,
    dephasing_gamma_quadrature,
    markov_coefficients,
    redfield_generator,
    stochastic_field_generator,
    thermal_scalar_derivative,
    weak_coupling_generator,
)
from .states import bloch_to_density, random_density, random_unitary


class Row(NamedTuple):
    criterion: int
    name: str
    measured: float
    expected: float
    tol: float
    passed: bool


def _row(c: int, name: str, measured: float, expected: float, tol: float, passed: bool | None = None) -> Row:
    ok = abs(measured - expected) <= tol if passed is None else passed
    return Row(c, name, float(measured), float(expected), float(tol), bool(ok))


def _flag(c: int, name: str, value: bool, expected: bool = True) -> Row:
    return Row(c, name, float(value), float(expected), 0.0, bool(value) == bool(expected))


def _min_eig(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


def criterion_1() -> list[Row]:
    ch = transposition(2)
    ev = np.sort(np.linalg.eigvalsh(choi_of(ch)))
    gap = float(np.max(np.abs(ev - np.array([-0.5, 0.5, 0.5, 0.5]))))
    pos = is_positive_map(ch, trials=32, seed=0)
    return [
        _row(1, "choi eigenvalues {-1/2, 1/2, 1/2, 1/2}", gap, 0.0, 1e-12),
        _flag(1, "is_completely_positive", is_completely_positive(ch).completely_positive, False),
        _flag(1, "is_positive_map finds no witness (32 restarts)", pos.positive, True),
    ]


def criterion_2() -> list[Row]:
    grid = np.linspace(-1.0, 1.0, 41)
    conc_gap = min_gap = nondeg_gap = 0.0
    for F in grid:
        rho = werner_state(2, F).entries
        conc_gap = max(conc_gap, abs(concurrence(rho) - max(-F, 0.0)))
        pt = partial_transpose(rho, (2, 2))
        ev = np.linalg.eigvalsh(pt)
        min_gap = max(min_gap, abs(ev[0] - F / 2))
        # eigenvalue on the maximally entangled vector, the nondegenerate one
        p = maximally_entangled(2).entries
        nondeg_gap = max(nondeg_gap, abs(np.trace(p @ pt).real - F / 2))
    return [
        _row(2, "max |concurrence - max(-F, 0)|", conc_gap, 0.0, 1e-10),
        _row(2, "max |min PT eigenvalue - F/2|", min_gap, 0.0, 1e-10),
        _row(2, "max |nondegenerate PT eigenvalue - F/2| (diagnostic)", nondeg_gap, 0.0, 1e-10),
    ]


def criterion_3() -> list[Row]:
    cp_bad = pos_bad = 0
    for r in np.linspace(0.0, 2.0, 20):
        for p in np.linspace(0.0, 2.0, 20):
            led = cp_ledger(two_level_relaxation(1.0, p, p, r), tol=1e-12)
            cp_bad += led.cp != (r >= p - 1e-12)
    for r in np.linspace(-1.0, 2.0, 20):
        for p in np.linspace(-1.0, 2.0, 20):
            led = cp_ledger(two_level_relaxation(1.0, p, p, r), tol=1e-12)
            pos_bad += led.positive_necessary != (r >= -1e-12 and p >= -1e-12)
    return [
        _row(3, "cp_ledger passes iff r >= p (20x20, r,p in [0,2])", cp_bad, 0, 0),
        _row(3, "positivity conditions pass iff r,p >= 0 (20x20, [-1,2])", pos_bad, 0, 0),
    ]


def criterion_4() -> list[Row]:
    omega, beta = 1.0, 1.0
    bath = thermal_scalar_derivative(beta, coupling=1.0, eps=0.05)
    k = markov_coefficients(omega, bath)
    kms = abs((k.alpha - k.d) - math.exp(-beta * omega) * (k.alpha + k.d))
    ba = redfield_generator(omega, bath)
    w = positivity_witness(ba)
    printed = -k.alpha * (4 * k.b**2 + k.d**2) / (4 * (k.alpha**2 + k.b**2))
    rows = [
        _row(4, "KMS alpha-d = e^{-beta Omega}(alpha+d)", kms, 0.0, 1e-6),
        _flag(4, "positivity witness found", w is not None),
    ]
    if w is None:
        return rows
    rows.append(_row(4, "witness dDet/dt = -alpha(4b^2+d^2)/(4(alpha^2+b^2))", w.ddet, printed, 1e-8))
    g = from_bloch_affine(ba)
    rho0 = bloch_to_density(w.bloch).entries
    lowest = min(_min_eig(evolve(g, rho0, t)) for t in np.linspace(0.0, 2.0, 201)[1:])
    rows.append(_row(4, "evolved witness state min eigenvalue < -1e-6", lowest, -1e-6, 0.0,
                     passed=lowest < -1e-6))
    return rows


def criterion_5() -> list[Row]:
    omega, beta = 1.0, 1.0
    ba = weak_coupling_generator(omega, thermal_scalar_derivative(beta, coupling=1.0, eps=0.05))
    led = cp_ledger(ba)
    st = stationary_states(from_bloch_affine(ba))
    gibbs = np.diag([math.exp(-beta * omega / 2), math.exp(beta * omega / 2)])
    gibbs = gibbs / np.trace(gibbs)
    return [
        _flag(5, "cp_ledger passes", led.cp),
        _row(5, "stationary state is unique", len(st), 1, 0),
        _row(5, "stationary state = Gibbs", float(np.max(np.abs(st[0] - gibbs))), 0.0, 1e-8),
    ]


def criterion_6() -> list[Row]:
    lam, beta = 0.3, 1.0
    m = SpinBosonDephasing(coupling=lam, eps=0.05, beta=beta, Omega=1.0)
    worst = 0.0
    for t in (0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 30.0):
        q = math.exp(-dephasing_gamma_quadrature(t, m))
        c = math.exp(-float(dephasing_gamma(t, m)))
        worst = max(worst, abs(c - q) / q)
    target = 2 * lam**2 / beta
    h = 1e-3
    slope_gap = 0.0
    for t in np.linspace(20 * beta, 200 * beta, 19):
        s = float(dephasing_gamma(t + h, m) - dephasing_gamma(t - h, m)) / (2 * h)
        slope_gap = max(slope_gap, abs(s - target) / target)
    g = af.dephasing_markov_generator(1.0, beta, lam)
    rho0 = np.full((2, 2), 0.5, dtype=complex)
    rate = max(abs(-math.log(abs(evolve(g, rho0, t)[1, 0]) / 0.5) / t - target) for t in (0.5, 1.0, 5.0))
    return [
        _row(6, "coherence decay closed form vs quadrature (relative)", worst, 0.0, 1e-6),
        _row(6, "slope of Gamma = 2 lambda^2/beta for t >= 20 beta (relative)", slope_gap, 0.0, 0.01),
        _row(6, "weak-coupling dephasing rate = 2 lambda^2/beta", rate, 0.0, 1e-8),
    ]


def criterion_7() -> list[Row]:
    B2, decay, omega = 0.7, 0.5, 1.3
    res = stochastic_field_generator(omega, SingleAxisExponential(B2, decay))
    ref = B2 / (decay**2 + omega**2) * np.array([[2 * decay, omega, 0], [omega, 0, 0], [0, 0, 0]])
    ba = to_bloch_affine(res.generator)
    rng = np.random.default_rng(7)
    a = rng.normal(size=(3, 3))
    white = stochastic_field_generator(omega, WhiteNoiseCovariance(a @ a.T))
    return [
        _row(7, "C = (B^2/(lambda^2+Omega^2))[[2l,W,0],[W,0,0],[0,0,0]]",
             float(np.max(np.abs(res.C - ref))), 0.0, 1e-10),
        _flag(7, "not completely positive", is_cp_generator(res.generator).completely_positive, False),
        _flag(7, "positivity witness fires", positivity_witness(ba) is not None),
        _flag(7, "white noise with PSD covariance passes cp_ledger",
              cp_ledger(to_bloch_affine(white.generator)).cp),
    ]


def criterion_8() -> list[Row]:
    p = af.AtomParams(1.0, (0.0, 0.0, 1.0), 2.0)
    k = af.single_atom_coeffs(p)
    x = math.exp(-2.0)
    R = (1 - x) / (1 + x)
    stat = af.stationary_bloch(p)
    d3 = np.sort(np.linalg.eigvalsh(to_bloch_affine(af.single_atom_generator(p)).D3))
    ref = np.sort([2 * k.A, 2 * k.A + k.C, 2 * k.A + k.C])
    g = af.single_atom_generator(p)
    ground = np.diag([0.0, 1.0]).astype(complex)
    gap = 0.0
    for t in np.linspace(0.0, 20.0, 50):
        gap = max(gap, abs(evolve(g, ground, t)[0, 0].real - af.excitation_probability(p, t)))
    h = 1e-6
    fd = (evolve(g, ground, h)[0, 0].real - evolve(g, ground, 0.0)[0, 0].real) / h
    rate_ref = (1.0 / math.pi) / math.expm1(2.0)
    return [
        _row(8, "stationary Bloch vector = (0,0,-R)", float(np.max(np.abs(stat - [0, 0, -R]))), 0.0, 1e-9),
        _row(8, "D3 eigenvalues {2A, 2A+C, 2A+C}", float(np.max(np.abs(d3 - ref))), 0.0, 1e-10),
        _row(8, "excitation probability vs evolve (50 points)", gap, 0.0, 1e-9),
        _row(8, "excitation rate at t=0 = (w/pi)/(e^{bw}-1)", af.excitation_rate(p), rate_ref, 1e-8),
        _row(8, "finite-difference rate from evolve (h=1e-6)", fd, rate_ref, 1e-6),
    ]


def criterion_9() -> list[Row]:
    p = af.AtomParams(1.0, (0.0, 0.0, 1.0), 2.0)
    k = af.single_atom_coeffs(p)
    n = np.array(p.n)
    s0 = af.TwoAtomState.product(n, -n)
    times = np.linspace(0.0, 50.0 / k.A, 201)
    traj = af.evolve_two_atom(p, s0, times)
    tau_drift = max(abs(s.tau - s0.tau) for s in traj.states)
    asym = af.asymptotic_state(s0.tau, k.R, n)
    end_gap = float(np.max(np.abs(traj.states[-1].to_vector() - asym.to_vector())))
    c_end = af.two_atom_concurrence(traj.states[-1])
    c_ref = 2 * k.R**2 / (3 + k.R**2)

    pinf = af.AtomParams(1.0, (0.0, 0.0, 1.0), math.inf)
    kinf = af.single_atom_coeffs(pinf)
    tinf = af.evolve_two_atom(pinf, s0, np.linspace(0.0, 50.0 / kinf.A, 51))
    c_inf = af.two_atom_concurrence(tinf.states[-1])

    singlet = af.TwoAtomState.from_matrix(af.singlet_projector())
    fixed = float(np.linalg.norm(af.two_atom_rhs(p, singlet).to_vector()))

    gain_gap = 0.0
    for eps in (0.1, 0.3, 0.6):
        e0 = af.epsilon_family(eps)
        te = af.evolve_two_atom(p, e0, [0.0, 50.0 / k.A])
        gain = af.two_atom_concurrence(te.states[-1]) - af.two_atom_concurrence(e0)
        gain_gap = max(gain_gap, abs(gain - 3 * k.R**2 * eps / (3 + k.R**2)))
    return [
        _row(9, "tau conserved over [0, 50/A]", tau_drift, 0.0, 1e-9),
        _row(9, "trajectory endpoint = asymptotic state", end_gap, 0.0, 1e-6),
        _row(9, "antiparallel asymptotic concurrence = 2R^2/(3+R^2)", c_end, c_ref, 1e-7),
        _row(9, "closed-form asymptotic concurrence", af.asymptotic_concurrence(s0.tau, k.R), c_ref, 1e-12),
        _row(9, "asymptotic concurrence at beta=inf", c_inf, 0.5, 1e-7),
        _row(9, "singlet is a fixed point (rhs norm)", fixed, 0.0, 1e-12),
        _row(9, "epsilon family concurrence gain = 3R^2 eps/(3+R^2)", gain_gap, 0.0, 1e-7),
    ]


def criterion_10() -> list[Row]:
    # |+> and |-> are the sigma3 eigenstates here, so u = (1, -i, 0) up to phase
    plus = np.array([1.0, 0.0])
    minus = np.array([0.0, 1.0])
    axes = [(0, 0, 1), (1, 0, 0), (0.6, 0, 0.8), (1 / math.sqrt(3),) * 3, (0, -0.28, 0.96)]
    worst = 0.0
    for omega in (0.3, 1.0, 2.5):
        for beta in (0.5, 2.0, math.inf):
            for n in axes:
                n = np.asarray(n, dtype=float)
                n = n / np.linalg.norm(n)
                p = af.AtomParams(omega, tuple(n), beta)
                res = af.entanglement_generation_test(p, minus, plus)
                ref = (af.single_atom_coeffs(p).B * n[2]) ** 2
                worst = max(worst, abs(res.statistic - ref))
    return [_row(10, "test statistic = (B n3)^2 on a (w, beta, n) grid", worst, 0.0, 1e-10)]


def _random_generator(n: int, rng: np.random.Generator) -> LindbladGenerator:
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    k = n * n - 1
    c = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    basis = orthonormal_basis(n)
    return LindbladGenerator(n, 0.5 * (h + h.conj().T), 0.5 * (c + c.conj().T) / k, basis, "orthonormal")


def criterion_11(samples: int = 1000, seed: int = 11) -> list[Row]:
    rng = np.random.default_rng(seed)
    herm = trace = semi = 0.0
    for i in range(samples):
        n = 2 + i % 3
        g = _random_generator(n, rng)
        rho = random_density(n, rng).entries
        t, s = rng.uniform(0, 2), rng.uniform(0, 2)
        out = evolve(g, rho, t)
        herm = max(herm, float(np.max(np.abs(out - out.conj().T))))
        trace = max(trace, abs(np.trace(out) - 1))
        semi = max(semi, float(np.max(np.abs(evolve(g, evolve(g, rho, s), t) - evolve(g, rho, t + s)))))

    mismatch = 0
    n_cp = 0
    for _ in range(samples):
        # real symmetric C^P with a spread of lowest eigenvalues around zero
        q = np.linalg.qr(rng.normal(size=(3, 3)))[0]
        lam = rng.uniform(-0.3, 1.0, size=3)
        cp = q @ np.diag(lam) @ q.T
        g = LindbladGenerator.from_pauli(np.zeros((2, 2)), cp)
        psd = np.linalg.eigvalsh(cp)[0] >= -1e-12
        n_cp += psd
        mismatch += cp_ledger(to_bloch_affine(g)).cp != psd

    p_plus = maximally_entangled(2).entries
    ts = np.linspace(0.0, 0.5, 51)[1:]
    gpos = from_bloch_affine(two_level_relaxation(1.0, 1.0, 1.0, 0.2))
    pos_single = min(min(np.linalg.eigvalsh(evolve(gpos, random_density(2, rng).entries, t))[0]
                         for t in ts) for _ in range(20))
    nocp_low = min(_min_eig(_doubled(gpos, t, p_plus)) for t in ts)
    cp_low = np.inf
    for _ in range(20):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        u = random_unitary(2, rng)
        gcp = LindbladGenerator.from_pauli(0.5 * (u + u.conj().T), a @ a.conj().T / 3)
        cp_low = min(cp_low, min(_min_eig(_doubled(gcp, t, p_plus)) for t in ts))
    return [
        _row(11, "hermiticity preserved (1000 pairs)", herm, 0.0, 1e-9),
        _row(11, "trace preserved (1000 pairs)", trace, 0.0, 1e-9),
        _row(11, "semigroup law e^{tL}e^{sL} = e^{(t+s)L}", semi, 0.0, 1e-8),
        _row(11, "cp_ledger <=> Kossakowski PSD (1000 dissipators)", mismatch, 0, 0),
        _flag(11, "dissipator sample contains both CP and non-CP cases", 0 < n_cp < samples),
        _row(11, "positive non-CP sample keeps single-qubit states PSD", pos_single, 0.0, 0.0,
             passed=pos_single >= -1e-10),
        _row(11, "positive non-CP: gamma_t (x) gamma_t [P+] min eigenvalue < -1e-8", nocp_low, -1e-8, 0.0,
             passed=nocp_low < -1e-8),
        _row(11, "CP samples: gamma_t (x) gamma_t [P+] min eigenvalue >= -1e-8", cp_low, -1e-8, 0.0,
             passed=cp_low >= -1e-8),
    ]


def _doubled(g: LindbladGenerator, t: float, rho: np.ndarray) -> np.ndarray:
    ch = from_linear_map(lambda x: evolve(g, x, t), 2)
    return apply(tensor_channel(ch, ch), rho)


CRITERIA: dict[int, tuple[str, Callable[[], list[Row]]]] = {
    1: ("qubit transposition Choi matrix", criterion_1),
    2: ("Werner family concurrence and PPT", criterion_2),
    3: ("two-level relaxation CP and positivity grids", criterion_3),
    4: ("Redfield thermal model", criterion_4),
    5: ("weak-coupling generator", criterion_5),
    6: ("spin-boson dephasing", criterion_6),
    7: ("stochastic single-axis field", criterion_7),
    8: ("single atom in a thermal field", criterion_8),
    9: ("two atoms in a thermal field", criterion_9),
    10: ("entanglement generation test", criterion_10),
    11: ("property suites", criterion_11),
}


def run_criterion(c: int) -> tuple[list[Row], float]:
    start = time.perf_counter()
    rows = CRITERIA[c][1]()
    return rows, time.perf_counter() - start


def repro_suite(only: list[int] | None = None) -> list[Row]:
    rows: list[Row] = []
    for c in sorted(CRITERIA) if only is None else only:
        rows.extend(CRITERIA[c][1]())
    return rows
