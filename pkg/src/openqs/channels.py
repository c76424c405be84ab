"""Linear maps on matrix algebras: Kraus and Choi forms, positivity tests.

Choi convention: ``choi = (Lambda (x) id)[P_+]`` with P_+ the projector on
(1/sqrt n) sum_j |j>|j>. Row and column indices of the Choi matrix are the
pairs (a, i) with ``a`` the output index of Lambda and ``i`` the index of the
untouched copy, so ``choi[(a,i),(b,j)] = Lambda(|i><j|)[a,b] / n``.
A trace-preserving map has a Choi matrix of unit trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ChoiNotPSD, DimensionMismatch, ValidationError
from .states import PAULI4, TOL, TOL_PSD, as_matrix, matrix_from_json, matrix_to_json


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """A linear map X -> Lambda[X] on n x n matrices.

    ``kraus`` holds operators K with Lambda[X] = sum K X K^dag; ``choi`` holds
    the Choi matrix. At least one is present. Maps that are not completely
    positive (e.g. transposition) only have a Choi matrix.
    """

    dim: int
    kraus: tuple[np.ndarray, ...] | None = None
    choi: np.ndarray | None = None
    trace_preserving: bool = False

    def __post_init__(self):
        if self.kraus is None and self.choi is None:
            raise ValidationError("a channel needs Kraus operators or a Choi matrix")
        n = self.dim
        if self.kraus is not None:
            for k in self.kraus:
                if k.shape != (n, n):
                    raise DimensionMismatch(f"Kraus operator shape {k.shape} != ({n}, {n})")
            if self.trace_preserving:
                s = sum(k.conj().T @ k for k in self.kraus)
                err = float(np.max(np.abs(s - np.eye(n))))
                if err > TOL:
                    raise ValidationError(f"Kraus operators not trace preserving: defect {err:.3e}")
        if self.choi is not None:
            if self.choi.shape != (n * n, n * n):
                raise DimensionMismatch(f"Choi shape {self.choi.shape} != ({n * n}, {n * n})")
            err = float(np.max(np.abs(self.choi - self.choi.conj().T)))
            if err > TOL:
                raise ValidationError(f"Choi matrix not hermitian: defect {err:.3e}")


@dataclass(frozen=True, eq=False)
class PauliFormMap:
    """Qubit map X -> sum_{a,b} C[a,b] sigma_a X sigma_b with sigma_0 = 1."""

    C: np.ndarray

    def __post_init__(self):
        if self.C.shape != (4, 4):
            raise DimensionMismatch(f"Pauli-form coefficients must be 4x4, got {self.C.shape}")
        err = float(np.max(np.abs(self.C - self.C.conj().T)))
        if err > TOL:
            raise ValidationError(f"Pauli-form coefficients not hermitian: defect {err:.3e}")


class CPVerdict(NamedTuple):
    completely_positive: bool
    min_choi_eigenvalue: float


class PositivityVerdict(NamedTuple):
    positive: bool
    worst_value: float
    witness: tuple[np.ndarray, np.ndarray] | None


def from_kraus(kraus: Sequence, trace_preserving: bool | None = None) -> QuantumChannel:
    ops = tuple(np.asarray(k, dtype=complex) for k in kraus)
    if not ops:
        raise ValidationError("empty Kraus list")
    n = ops[0].shape[0]
    if trace_preserving is None:
        s = sum(k.conj().T @ k for k in ops)
        trace_preserving = bool(np.max(np.abs(s - np.eye(n))) <= TOL)
    return QuantumChannel(n, kraus=ops, trace_preserving=trace_preserving)


def from_choi(choi, trace_preserving: bool | None = None) -> QuantumChannel:
    j = np.asarray(choi, dtype=complex)
    n = int(round(np.sqrt(j.shape[0])))
    if n * n != j.shape[0]:
        raise DimensionMismatch(f"Choi size {j.shape[0]} is not a perfect square")
    if trace_preserving is None:
        red = n * np.einsum("aiaj->ij", j.reshape(n, n, n, n))
        trace_preserving = bool(np.max(np.abs(red - np.eye(n))) <= TOL)
    return QuantumChannel(n, choi=j, trace_preserving=trace_preserving)


def from_linear_map(f: Callable[[np.ndarray], np.ndarray], n: int) -> QuantumChannel:
    """Channel from an arbitrary linear function by evaluating it on matrix units."""
    j = np.zeros((n, n, n, n), dtype=complex)
    for i in range(n):
        for k in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, k] = 1.0
            j[:, i, :, k] = f(e) / n
    return from_choi(j.reshape(n * n, n * n))


def identity_channel(n: int) -> QuantumChannel:
    return from_kraus([np.eye(n)], trace_preserving=True)


def transposition(n: int) -> QuantumChannel:
    """X -> X^T: positive but not completely positive."""
    return from_linear_map(lambda x: x.T, n)


def diagonal_projection(n: int) -> QuantumChannel:
    """X -> sum_i P_i X P_i with P_i = |i><i| (dephasing in the computational basis)."""
    ops = []
    for i in range(n):
        p = np.zeros((n, n), dtype=complex)
        p[i, i] = 1.0
        ops.append(p)
    return from_kraus(ops, trace_preserving=True)


def apply(ch: QuantumChannel, x) -> np.ndarray:
    m = as_matrix(x)
    n = ch.dim
    if m.shape != (n, n):
        raise DimensionMismatch(f"channel acts on {n}x{n} matrices, got {m.shape}")
    if ch.kraus is not None:
        return sum(k @ m @ k.conj().T for k in ch.kraus)
    j = ch.choi.reshape(n, n, n, n)
    return n * np.einsum("aibj,ij->ab", j, m)


def choi_of(ch: QuantumChannel) -> np.ndarray:
    if ch.choi is not None:
        return ch.choi
    n = ch.dim
    vecs = np.array([k.reshape(-1) for k in ch.kraus])
    return (vecs.T @ vecs.conj()) / n


def compose(second: QuantumChannel, first: QuantumChannel) -> QuantumChannel:
    """The map X -> second[first[X]]."""
    if second.dim != first.dim:
        raise DimensionMismatch(f"cannot compose dims {second.dim} and {first.dim}")
    if first.kraus is not None and second.kraus is not None:
        ops = [k2 @ k1 for k2 in second.kraus for k1 in first.kraus]
        return from_kraus(ops, trace_preserving=first.trace_preserving and second.trace_preserving)
    return from_linear_map(lambda x: apply(second, apply(first, x)), first.dim)


def tensor_channel(ch1: QuantumChannel, ch2: QuantumChannel) -> QuantumChannel:
    """Lambda_1 (x) Lambda_2 acting on the n1*n2 dimensional space."""
    n1, n2 = ch1.dim, ch2.dim
    if ch1.kraus is not None and ch2.kraus is not None:
        ops = [np.kron(a, b) for a in ch1.kraus for b in ch2.kraus]
        return from_kraus(ops)

    def f(x):
        t = x.reshape(n1, n2, n1, n2)
        out = np.zeros_like(t)
        # apply Lambda_1 on the first factor, blockwise over the second
        for b in range(n2):
            for d in range(n2):
                out[:, b, :, d] = apply(ch1, t[:, b, :, d])
        for a in range(n1):
            for c in range(n1):
                out[a, :, c, :] = apply(ch2, out[a, :, c, :])
        return out.reshape(n1 * n2, n1 * n2)

    return from_linear_map(f, n1 * n2)


def is_completely_positive(ch: QuantumChannel, tol: float = TOL_PSD) -> CPVerdict:
    w = np.linalg.eigvalsh(choi_of(ch))
    return CPVerdict(bool(w[0] >= -tol), float(w[0]))


def _product_value(j4: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    return float(np.einsum("a,i,aibj,b,j->", x.conj(), y.conj(), j4, x, y).real)


def is_positive_map(ch: QuantumChannel, trials: int = 32, seed: int = 0,
                    max_iter: int = 500, tol: float = TOL_PSD) -> PositivityVerdict:
    """Search for a product vector x (x) y with <x y|Choi|x y> < 0.

    Lambda is positive iff this form is nonnegative on all product vectors.
    The search alternates exact minimization over x (y fixed) and over y (x
    fixed), each a smallest-eigenvector problem, from ``trials`` random starts.
    A negative minimum is re-evaluated before being reported, so ``False`` is
    conclusive; ``True`` only means no witness was found.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    n = ch.dim
    j4 = choi_of(ch).reshape(n, n, n, n)
    rng = np.random.default_rng(seed)
    best = np.inf
    best_pair = None
    for _ in range(trials):
        y = rng.normal(size=n) + 1j * rng.normal(size=n)
        y /= np.linalg.norm(y)
        prev = np.inf
        for _ in range(max_iter):
            mx = np.einsum("i,aibj,j->ab", y.conj(), j4, y)
            wx, vx = np.linalg.eigh(0.5 * (mx + mx.conj().T))
            x = vx[:, 0]
            my = np.einsum("a,aibj,b->ij", x.conj(), j4, x)
            wy, vy = np.linalg.eigh(0.5 * (my + my.conj().T))
            y = vy[:, 0]
            val = wy[0]
            if prev - val < 1e-15:
                break
            prev = val
        val = _product_value(j4, x, y)
        if val < best:
            best, best_pair = val, (x, y)
    certified = best < -tol and _product_value(j4, *best_pair) < -tol
    return PositivityVerdict(not certified, float(best), best_pair if certified else None)


def kraus_from_choi(choi, tol_psd: float = TOL_PSD) -> list[np.ndarray]:
    """Kraus operators from the spectral decomposition of a PSD Choi matrix.

    Eigenvalues in [-tol_psd, 0) are treated as zero; anything more negative
    raises ChoiNotPSD.
    """
    j = np.asarray(choi, dtype=complex)
    n = int(round(np.sqrt(j.shape[0])))
    if n * n != j.shape[0]:
        raise DimensionMismatch(f"Choi size {j.shape[0]} is not a perfect square")
    w, v = np.linalg.eigh(0.5 * (j + j.conj().T))
    if w[0] < -tol_psd:
        raise ChoiNotPSD(f"Choi matrix has eigenvalue {w[0]:.3e} below -{tol_psd:g}")
    ops = []
    for k in range(len(w)):
        if w[k] > tol_psd:
            ops.append(np.sqrt(n * w[k]) * v[:, k].reshape(n, n))
    return ops


def pauli_form_to_channel(m: PauliFormMap) -> QuantumChannel:
    c = m.C

    def f(x):
        return sum(c[a, b] * PAULI4[a] @ x @ PAULI4[b] for a in range(4) for b in range(4))

    return from_linear_map(f, 2)


def channel_to_json(ch: QuantumChannel) -> dict:
    if ch.kraus is not None:
        return {"dim": ch.dim, "kraus": [matrix_to_json(k) for k in ch.kraus]}
    return {"dim": ch.dim, "choi": matrix_to_json(ch.choi)}


def channel_from_json(obj: dict) -> QuantumChannel:
    if "kraus" in obj:
        ch = from_kraus([matrix_from_json(k) for k in obj["kraus"]])
    elif "choi" in obj:
        ch = from_choi(matrix_from_json(obj["choi"]))
    else:
        raise ValidationError("channel JSON needs a 'kraus' list or a 'choi' matrix")
    if "dim" in obj and int(obj["dim"]) != ch.dim:
        raise DimensionMismatch(f"declared dim {obj['dim']} but operators have dim {ch.dim}")
    return ch
