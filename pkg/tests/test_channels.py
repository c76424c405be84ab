import numpy as np
import pytest

from openqs.channels import (
    PauliFormMap,
    apply,
    channel_from_json,
    channel_to_json,
    choi_of,
    compose,
    diagonal_projection,
    from_choi,
    from_kraus,
    from_linear_map,
    identity_channel,
    is_completely_positive,
    is_positive_map,
    kraus_from_choi,
    pauli_form_to_channel,
    tensor_channel,
    transposition,
)
from openqs.errors import ChoiNotPSD, DimensionMismatch
from openqs.states import PAULI, random_density, random_unitary


def _random_kraus(n, k, rng):
    g = rng.normal(size=(k * n, n)) + 1j * rng.normal(size=(k * n, n))
    q, _ = np.linalg.qr(g)  # isometry, so sum K^dag K = 1
    return [q[i * n:(i + 1) * n] for i in range(k)]


def _units(n):
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1
            yield e


def test_transposition_choi_spectrum():
    ev = np.linalg.eigvalsh(choi_of(transposition(2)))
    assert np.abs(ev - [-0.5, 0.5, 0.5, 0.5]).max() < 1e-15
    # Choi of transposition is V/n
    ev3 = np.linalg.eigvalsh(choi_of(transposition(3)))
    assert np.abs(ev3 - np.r_[[-1 / 3] * 3, [1 / 3] * 6]).max() < 1e-14


def test_choi_normalization_and_trace_preservation():
    rng = np.random.default_rng(0)
    ch = from_kraus(_random_kraus(3, 2, rng))
    assert ch.trace_preserving
    assert abs(np.trace(choi_of(ch)) - 1) < 1e-12
    assert from_choi(choi_of(ch)).trace_preserving


def test_kraus_choi_kraus_round_trip():
    rng = np.random.default_rng(1)
    ch = from_kraus(_random_kraus(3, 3, rng))
    back = from_kraus(kraus_from_choi(choi_of(ch)))
    for e in _units(3):
        assert np.abs(apply(ch, e) - apply(back, e)).max() < 1e-9


def test_kraus_from_choi_rejects_negative():
    with pytest.raises(ChoiNotPSD):
        kraus_from_choi(choi_of(transposition(2)))
    # roundoff-level negatives are clipped
    j = choi_of(identity_channel(2)) - 1e-12 * np.eye(4)
    assert len(kraus_from_choi(j)) == 1


def test_apply_via_choi_matches_kraus():
    rng = np.random.default_rng(2)
    ch = from_kraus(_random_kraus(2, 2, rng))
    via_choi = from_choi(choi_of(ch))
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.abs(apply(ch, x) - apply(via_choi, x)).max() < 1e-13


def test_cp_verdicts():
    rng = np.random.default_rng(3)
    assert is_completely_positive(from_kraus(_random_kraus(2, 3, rng))).completely_positive
    v = is_completely_positive(transposition(2))
    assert not v.completely_positive and abs(v.min_choi_eigenvalue + 0.5) < 1e-15


def test_positivity_search():
    assert is_positive_map(transposition(3), trials=32).positive
    # reduction map X -> Tr(X) 1 - X: positive, not CP
    red = from_linear_map(lambda x: np.trace(x) * np.eye(2) - x, 2)
    assert is_positive_map(red).positive
    assert not is_completely_positive(red).completely_positive
    # X -> -X has a negative product witness
    v = is_positive_map(from_linear_map(lambda x: -x, 2))
    assert not v.positive and v.worst_value < -0.1
    x, y = v.witness
    j4 = choi_of(from_linear_map(lambda x: -x, 2)).reshape(2, 2, 2, 2)
    assert np.einsum("a,i,aibj,b,j->", x.conj(), y.conj(), j4, x, y).real < 0


def test_compose_and_tensor():
    rng = np.random.default_rng(4)
    a = from_kraus(_random_kraus(2, 2, rng))
    b = from_kraus(_random_kraus(2, 2, rng))
    rho = random_density(2, rng).entries
    assert np.abs(apply(compose(b, a), rho) - apply(b, apply(a, rho))).max() < 1e-14
    t = transposition(2)
    both = tensor_channel(a, t)
    r1, r2 = random_density(2, rng).entries, random_density(2, rng).entries
    assert np.abs(apply(both, np.kron(r1, r2)) - np.kron(apply(a, r1), r2.T)).max() < 1e-14
    with pytest.raises(DimensionMismatch):
        compose(identity_channel(2), identity_channel(3))


def test_transposition_tensor_identity_not_positive():
    # T (x) id applied to the maximally entangled projector has eigenvalue -1/2
    p = np.zeros((4, 4))
    p[np.ix_([0, 3], [0, 3])] = 0.5
    out = apply(tensor_channel(transposition(2), identity_channel(2)), p)
    assert abs(np.linalg.eigvalsh(out)[0] + 0.5) < 1e-15


def test_unitary_channel_and_diagonal_projection():
    rng = np.random.default_rng(5)
    u = random_unitary(3, rng)
    rho = random_density(3, rng).entries
    assert np.abs(apply(from_kraus([u]), rho) - u @ rho @ u.conj().T).max() < 1e-14
    d = apply(diagonal_projection(3), rho)
    assert np.abs(d - np.diag(np.diag(rho))).max() < 1e-15


def test_pauli_form_depolarizing():
    # (1/4) sum_a sigma_a X sigma_a = Tr(X) 1/2
    ch = pauli_form_to_channel(PauliFormMap(np.eye(4) / 4))
    rng = np.random.default_rng(6)
    rho = random_density(2, rng).entries
    assert np.abs(apply(ch, rho) - np.eye(2) / 2).max() < 1e-15
    flip = pauli_form_to_channel(PauliFormMap(np.diag([0, 1.0, 0, 0]).astype(complex)))
    assert np.abs(apply(flip, rho) - PAULI[0] @ rho @ PAULI[0]).max() < 1e-15


def test_json_round_trip():
    rng = np.random.default_rng(7)
    ch = from_kraus(_random_kraus(2, 2, rng))
    back = channel_from_json(channel_to_json(ch))
    t = channel_from_json(channel_to_json(transposition(2)))
    x = rng.normal(size=(2, 2))
    assert np.abs(apply(back, x) - apply(ch, x)).max() < 1e-15
    assert np.abs(apply(t, x) - x.T).max() < 1e-15
