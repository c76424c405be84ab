"""Partial transposition, PPT test, concurrence, Werner and Bell states."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, FOutOfRange, ValidationError
from .states import SIGMA_2, TOL, DensityMatrix, as_matrix, make_density

SIGMA_YY = np.kron(SIGMA_2, SIGMA_2)


class PPTVerdict(NamedTuple):
    min_pt_eigenvalue: float
    entangled: bool | None  # None: positive partial transpose, dims beyond 2x2 / 2x3
    verdict: str


@dataclass(frozen=True, eq=False)
class SeparableDecomposition:
    """Convex combination sum_k w_k rho1_k (x) rho2_k."""

    weights: tuple[float, ...]
    factors: tuple[tuple[DensityMatrix, DensityMatrix], ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.factors):
            raise ValidationError("one weight per factor pair is required")
        if np.any(w < -TOL) or abs(w.sum() - 1.0) > TOL:
            raise ValidationError(f"weights must form a probability vector, got sum {w.sum():.12g}")

    def to_density(self) -> DensityMatrix:
        m = sum(w * np.kron(a.entries, b.entries) for w, (a, b) in zip(self.weights, self.factors))
        return make_density(m)


def partial_transpose(rho, dims: tuple[int, int], which: str = "B") -> np.ndarray:
    m = as_matrix(rho)
    na, nb = int(dims[0]), int(dims[1])
    if na * nb != m.shape[0]:
        raise DimensionMismatch(f"dims {na}x{nb} do not match matrix size {m.shape[0]}")
    t = m.reshape(na, nb, na, nb)
    if which == "A":
        t = t.transpose(2, 1, 0, 3)
    elif which == "B":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValidationError(f"which must be 'A' or 'B', got {which!r}")
    return t.reshape(na * nb, na * nb)


def ppt_verdict(rho, dims: tuple[int, int], tol: float = TOL) -> PPTVerdict:
    """Negative partial transpose proves entanglement; for 2x2 and 2x3 a PSD
    partial transpose proves separability, otherwise it is inconclusive."""
    pt = partial_transpose(rho, dims, "B")
    lam = float(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0])
    if lam < -tol:
        return PPTVerdict(lam, True, "entangled")
    if sorted((int(dims[0]), int(dims[1]))) in ([2, 2], [2, 3]):
        return PPTVerdict(lam, False, "separable")
    return PPTVerdict(lam, None, "inconclusive")


def concurrence(rho) -> float:
    """Two-qubit concurrence max{R1 - R2 - R3 - R4, 0}.

    R_k are the square roots, in decreasing order, of the eigenvalues of
    rho (s2 s2) rho* (s2 s2). They are computed from the similar hermitian
    matrix sqrt(rho) (s2 s2) rho* (s2 s2) sqrt(rho).
    """
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise DimensionMismatch(f"concurrence needs a 4x4 state, got {m.shape}")
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    sq = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    h = sq @ SIGMA_YY @ m.conj() @ SIGMA_YY @ sq
    ev = np.linalg.eigvalsh(0.5 * (h + h.conj().T))
    ev = np.where(ev > -1e-10, np.clip(ev, 0.0, None), ev)
    r = np.sort(np.sqrt(np.clip(ev, 0.0, None)))[::-1]
    return float(min(max(r[0] - r[1] - r[2] - r[3], 0.0), 1.0))


def flip_operator(n: int) -> np.ndarray:
    """V |i>|j> = |j>|i> on C^n (x) C^n."""
    v = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            v[j * n + i, i * n + j] = 1.0
    return v


def maximally_entangled(n: int) -> DensityMatrix:
    """Projector on (1/sqrt n) sum_j |j>|j>."""
    psi = np.eye(n).reshape(-1) / np.sqrt(n)
    return make_density(np.outer(psi, psi).astype(complex))


def werner_state(n: int, F: float) -> DensityMatrix:
    """U (x) U invariant state with flip expectation Tr[rho V] = F."""
    if not -1.0 - TOL <= F <= 1.0 + TOL:
        raise FOutOfRange(f"F = {F} outside [-1, 1]")
    if n < 2:
        raise ValidationError("Werner states need n >= 2")
    norm = n * (n * n - 1)
    m = ((n - F) / norm) * np.eye(n * n) + ((n * F - 1) / norm) * flip_operator(n)
    return make_density(m.astype(complex))


def bell_basis() -> dict[str, DensityMatrix]:
    """Projectors on (|00> +- |11>)/sqrt2 ('P+', 'P-') and (|01> +- |10>)/sqrt2 ('Q+', 'Q-')."""
    s = 1 / np.sqrt(2)
    vecs = {
        "P+": [s, 0, 0, s],
        "P-": [s, 0, 0, -s],
        "Q+": [0, s, s, 0],
        "Q-": [0, s, -s, 0],
    }
    return {k: make_density(np.outer(v, v).astype(complex)) for k, v in vecs.items()}


def local_unitary(u1: np.ndarray, u2: np.ndarray, rho) -> np.ndarray:
    u = np.kron(u1, u2)
    return u @ as_matrix(rho) @ u.conj().T
