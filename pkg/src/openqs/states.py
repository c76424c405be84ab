"""Finite-dimensional density matrices and elementary state operations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    BlochOutOfBall,
    DimensionMismatch,
    NotHermitian,
    NotPSD,
    NotUnitTrace,
    ValidationError,
)

TOL = 1e-9
TOL_PSD = 1e-10

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_1, SIGMA_2, SIGMA_3)
PAULI4 = (SIGMA_0, SIGMA_1, SIGMA_2, SIGMA_3)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated state: hermitian, unit trace, positive semidefinite.

    Construct through :func:`make_density`; the stored array is read-only.
    """

    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def as_matrix(x) -> np.ndarray:
    """Return a complex square ndarray for a DensityMatrix or array-like."""
    if isinstance(x, DensityMatrix):
        return x.entries
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def make_density(entries, sanitize: bool = False) -> DensityMatrix:
    """Validate ``entries`` as a density matrix.

    With ``sanitize`` set, roundoff-level defects are repaired instead of
    rejected: the matrix is hermitized, eigenvalues above ``-TOL_PSD`` are
    clipped to zero and the trace renormalized. Larger defects still raise.
    """
    m = as_matrix(entries).copy()
    herm_err = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if herm_err > TOL:
        raise NotHermitian(f"hermiticity violated: max |rho - rho^dag| = {herm_err:.3e}")
    m = 0.5 * (m + m.conj().T)
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > TOL:
        raise NotUnitTrace(f"unit trace violated: |Tr(rho) - 1| = {abs(tr - 1.0):.3e}")
    w, v = np.linalg.eigh(m)
    if w[0] < -TOL_PSD:
        raise NotPSD(f"positivity violated: smallest eigenvalue {w[0]:.3e}")
    if sanitize:
        w = np.clip(w, 0.0, None)
        w = w / w.sum()
        m = (v * w) @ v.conj().T
    m.setflags(write=False)
    return DensityMatrix(m)


def pure_state(psi: Sequence[complex]) -> DensityMatrix:
    """Projector onto the normalized vector ``psi``."""
    v = np.asarray(psi, dtype=complex).ravel()
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValidationError("zero vector does not define a state")
    v = v / nrm
    return make_density(np.outer(v, v.conj()))


def maximally_mixed(n: int) -> DensityMatrix:
    return make_density(np.eye(n, dtype=complex) / n)


def _entropy_from_eigenvalues(w: np.ndarray) -> float:
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def von_neumann_entropy(rho) -> float:
    """S(rho) = -sum_j w_j log w_j in nats, with 0 log 0 = 0."""
    if not isinstance(rho, DensityMatrix):
        rho = make_density(rho)
    w = np.clip(rho.eigenvalues(), 0.0, None)
    return max(_entropy_from_eigenvalues(w), 0.0)


def _check_dims(m: np.ndarray, dims: tuple[int, int]) -> tuple[int, int]:
    na, nb = int(dims[0]), int(dims[1])
    if na * nb != m.shape[0]:
        raise DimensionMismatch(f"dims {na}x{nb} do not match matrix size {m.shape[0]}")
    return na, nb


def partial_trace(rho, dims: tuple[int, int], keep: str = "A") -> DensityMatrix | np.ndarray:
    """Trace out one factor of a bipartite operator on A (x) B.

    Returns a DensityMatrix when the input is one, otherwise a plain array.
    """
    m = as_matrix(rho)
    na, nb = _check_dims(m, dims)
    t = m.reshape(na, nb, na, nb)
    if keep == "A":
        out = np.einsum("ijkj->ik", t)
    elif keep == "B":
        out = np.einsum("ijil->jl", t)
    else:
        raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")
    return make_density(out) if isinstance(rho, DensityMatrix) else out


def tensor(rho1, rho2) -> DensityMatrix:
    """Kronecker product of two states."""
    return make_density(np.kron(as_matrix(rho1), as_matrix(rho2)))


def is_pure(rho, tol: float = TOL) -> bool:
    m = as_matrix(rho)
    return bool(np.linalg.norm(m @ m - m) <= tol)


def bloch_to_density(r: Sequence[float]) -> DensityMatrix:
    """Qubit state (1 + r.sigma)/2 for a Bloch vector with |r| <= 1."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise DimensionMismatch(f"Bloch vector must have 3 components, got {r.shape}")
    nrm = float(np.linalg.norm(r))
    if nrm > 1.0 + TOL:
        raise BlochOutOfBall(f"Bloch vector norm {nrm:.12g} exceeds 1")
    m = 0.5 * (SIGMA_0 + r[0] * SIGMA_1 + r[1] * SIGMA_2 + r[2] * SIGMA_3)
    return make_density(m)


def density_to_bloch(rho) -> np.ndarray:
    """Bloch vector r_i = Tr(rho sigma_i) of a qubit operator."""
    m = as_matrix(rho)
    if m.shape != (2, 2):
        raise DimensionMismatch(f"expected a 2x2 matrix, got {m.shape}")
    return np.array([np.trace(m @ s).real for s in PAULI])


def coherence_vector(rho) -> np.ndarray:
    """The 4-vector (Tr rho, r_1, r_2, r_3); the first entry is 1 for states."""
    m = as_matrix(rho)
    return np.array([np.trace(m @ s).real for s in PAULI4])


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random state from a Ginibre matrix of the given rank (full rank by default)."""
    k = n if rank is None else rank
    g = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    m = g @ g.conj().T
    return make_density(m / np.trace(m).real)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def matrix_to_json(m) -> dict:
    """Serialize a complex matrix as {dim, re, im} with row-major nested lists."""
    a = as_matrix(m)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"matrix JSON needs 're' and 'im' arrays: {exc}") from exc
    if re.shape != im.shape:
        raise DimensionMismatch(f"re shape {re.shape} differs from im shape {im.shape}")
    m = re + 1j * im
    dim = obj.get("dim")
    if m.ndim != 2 or m.shape[0] != m.shape[1] or (dim is not None and int(dim) != m.shape[0]):
        raise DimensionMismatch(f"declared dim {dim} does not match array shape {m.shape}")
    return m
