import numpy as np
import pytest

from openqs.errors import BlochOutOfBall, DimensionMismatch, NotHermitian, NotPSD, NotUnitTrace
from openqs.states import (
    PAULI,
    bloch_to_density,
    coherence_vector,
    density_to_bloch,
    is_pure,
    make_density,
    matrix_from_json,
    matrix_to_json,
    maximally_mixed,
    partial_trace,
    pure_state,
    random_density,
    random_unitary,
    tensor,
    von_neumann_entropy,
)


def test_pauli_algebra():
    s1, s2, s3 = PAULI
    assert np.abs(s1 @ s2 - 1j * s3).max() < 1e-15
    for s in PAULI:
        assert np.abs(s @ s - np.eye(2)).max() < 1e-15


def test_make_density_rejects_invalid():
    with pytest.raises(NotHermitian):
        make_density(np.array([[0.5, 1.0], [0.0, 0.5]]))
    with pytest.raises(NotUnitTrace):
        make_density(np.eye(2))
    with pytest.raises(NotPSD):
        make_density(np.diag([1.5, -0.5]))
    with pytest.raises(DimensionMismatch):
        make_density(np.ones((2, 3)))


def test_sanitize_clips_roundoff_only():
    m = np.diag([1.0 + 5e-11, -5e-11]).astype(complex)
    with pytest.raises(NotPSD):
        make_density(np.diag([1.0 + 1e-6, -1e-6]), sanitize=True)
    rho = make_density(m, sanitize=True)
    assert rho.eigenvalues()[0] >= 0
    assert abs(np.trace(rho.entries) - 1) < 1e-15


def test_entries_are_read_only():
    rho = maximally_mixed(2)
    with pytest.raises(ValueError):
        rho.entries[0, 0] = 1.0


def test_entropy_values():
    assert abs(von_neumann_entropy(maximally_mixed(4)) - np.log(4)) < 1e-12
    assert von_neumann_entropy(pure_state([1, 1j])) < 1e-12
    assert abs(von_neumann_entropy(np.diag([0.25, 0.75])) - (-0.25 * np.log(0.25) - 0.75 * np.log(0.75))) < 1e-14


def test_partial_trace_of_product():
    rng = np.random.default_rng(0)
    a, b = random_density(2, rng), random_density(3, rng)
    ab = tensor(a, b)
    assert np.abs(partial_trace(ab, (2, 3), keep="A").entries - a.entries).max() < 1e-14
    assert np.abs(partial_trace(ab, (2, 3), keep="B").entries - b.entries).max() < 1e-14
    with pytest.raises(DimensionMismatch):
        partial_trace(ab, (2, 2))


def test_partial_trace_of_bell_state_is_mixed():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    red = partial_trace(pure_state(psi), (2, 2))
    assert np.abs(red.entries - np.eye(2) / 2).max() < 1e-15


def test_bloch_round_trip_and_purity():
    r = np.array([0.3, -0.4, 0.5])
    rho = bloch_to_density(r)
    assert np.abs(density_to_bloch(rho) - r).max() < 1e-15
    assert np.abs(coherence_vector(rho) - np.r_[1.0, r]).max() < 1e-15
    assert is_pure(bloch_to_density([0, 0.6, 0.8]))
    assert not is_pure(rho)
    with pytest.raises(BlochOutOfBall):
        bloch_to_density([1.0, 0.1, 0.0])


def test_random_state_and_unitary():
    rng = np.random.default_rng(1)
    rho = random_density(5, rng, rank=2)
    w = rho.eigenvalues()
    assert np.sum(w > 1e-12) == 2
    u = random_unitary(4, rng)
    assert np.abs(u @ u.conj().T - np.eye(4)).max() < 1e-14


def test_json_round_trip():
    rng = np.random.default_rng(2)
    m = random_density(3, rng).entries
    assert np.abs(matrix_from_json(matrix_to_json(m)) - m).max() == 0
    with pytest.raises(DimensionMismatch):
        matrix_from_json({"dim": 3, "re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]]})
