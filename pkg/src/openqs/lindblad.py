"""Kossakowski-Lindblad generators and the qubit Bloch-affine picture.

Generator convention::

    L[rho] = -i[H, rho] + sum_ij C[i,j] (F_j^dag rho F_i - 1/2 {F_i F_j^dag, rho})

with F_i an orthonormal (Tr F_i^dag F_j = delta_ij), traceless basis. For qubits
the default basis is sigma_i / sqrt2, so a coefficient matrix written against
bare Pauli matrices (``sum C^P_ij (sigma_j rho sigma_i - ...)``) is stored as
``C = 2 C^P``; :meth:`LindbladGenerator.from_pauli` does the conversion.

Bloch-affine convention: for rho = (1 + r.sigma)/2 and |rho> = (1, r1, r2, r3),
the flow is d|rho>/dt = -2 (Hmat + Dmat) |rho>.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .errors import DimensionMismatch, NegativeTime, NotQubit, ValidationError
from .states import PAULI, PAULI4, TOL, TOL_PSD, as_matrix, matrix_from_json, matrix_to_json

NULL_SPACE_RTOL = 1e-10
WITNESS_TOL = 1e-12


def pauli_basis() -> tuple[np.ndarray, ...]:
    """sigma_i / sqrt2, the orthonormal traceless qubit basis."""
    return tuple(s / np.sqrt(2) for s in PAULI)


def orthonormal_basis(n: int) -> tuple[np.ndarray, ...]:
    """Hermitian, traceless, orthonormal basis of n x n matrices (n^2 - 1 elements).

    For n = 2^k this is the set of normalized Pauli strings; otherwise the
    normalized generalized Gell-Mann matrices.
    """
    k = int(round(np.log2(n))) if n > 0 else 0
    if n >= 2 and 2**k == n:
        out = []
        for idx in itertools.product(range(4), repeat=k):
            if all(i == 0 for i in idx):
                continue
            m = np.array([[1.0 + 0j]])
            for i in idx:
                m = np.kron(m, PAULI4[i])
            out.append(m / np.sqrt(n))
        return tuple(out)
    out = []
    for a in range(n):
        for b in range(a + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[a, b] = s[b, a] = 1 / np.sqrt(2)
            out.append(s)
            t = np.zeros((n, n), dtype=complex)
            t[a, b], t[b, a] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            out.append(t)
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1.0
        d[l] = -l
        out.append(np.diag(d / np.sqrt(l * (l + 1))).astype(complex))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class LindbladGenerator:
    dim: int
    H: np.ndarray
    C: np.ndarray
    basis: tuple[np.ndarray, ...]
    basis_name: str = "explicit"

    def __post_init__(self):
        n = self.dim
        if self.H.shape != (n, n):
            raise DimensionMismatch(f"H has shape {self.H.shape}, expected ({n}, {n})")
        m = n * n - 1
        if self.C.shape != (m, m) or len(self.basis) != m:
            raise DimensionMismatch(f"need {m} basis elements and a {m}x{m} Kossakowski matrix")
        for name, x in (("H", self.H), ("C", self.C)):
            err = float(np.max(np.abs(x - x.conj().T)))
            if err > TOL:
                raise ValidationError(f"{name} not hermitian: defect {err:.3e}")
        b = np.array([f.reshape(-1) for f in self.basis])
        gram = b.conj() @ b.T
        if np.max(np.abs(gram - np.eye(m))) > TOL:
            raise ValidationError("basis is not orthonormal under Tr(F_i^dag F_j)")
        if np.max(np.abs([np.trace(f) for f in self.basis])) > TOL:
            raise ValidationError("basis elements must be traceless")

    @classmethod
    def from_pauli(cls, H, C_pauli) -> "LindbladGenerator":
        """Qubit generator from coefficients of sigma_j rho sigma_i terms."""
        H = np.asarray(H, dtype=complex)
        cp = np.asarray(C_pauli, dtype=complex)
        return cls(2, H, 2 * cp, pauli_basis(), "pauli")

    def kossakowski_pauli(self) -> np.ndarray:
        """C^P with respect to bare Pauli matrices (qubit, Pauli basis only)."""
        if self.basis_name != "pauli":
            raise ValidationError("generator is not expressed in the Pauli basis")
        return self.C / 2


def generator_from_operators(H, ops: Sequence, K, basis=None) -> LindbladGenerator:
    """Generator -i[H,.] + sum K_ij (L_j^dag rho L_i - 1/2 {L_i L_j^dag, rho}).

    Traceless operators L_i are expanded in the orthonormal basis to produce
    the Kossakowski matrix C = X^T K X^* with X[i,a] = Tr(F_a^dag L_i).
    """
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    basis = orthonormal_basis(n) if basis is None else tuple(basis)
    ops = [np.asarray(o, dtype=complex) for o in ops]
    for o in ops:
        if abs(np.trace(o)) > TOL:
            raise ValidationError("operators must be traceless to be expanded in the basis")
    x = np.array([[np.trace(f.conj().T @ o) for f in basis] for o in ops])
    c = x.T @ np.asarray(K, dtype=complex) @ x.conj()
    name = "pauli" if n == 2 and basis is not None and _is_pauli(basis) else "explicit"
    return LindbladGenerator(n, H, 0.5 * (c + c.conj().T), basis, name)


def _is_pauli(basis) -> bool:
    return all(np.allclose(f, p) for f, p in zip(basis, pauli_basis()))


def depolarizing_generator(rate: float = 1.0) -> LindbladGenerator:
    """rate * (sum_i sigma_i rho sigma_i - 3 rho)."""
    return LindbladGenerator.from_pauli(np.zeros((2, 2)), rate * np.eye(3))


def vec(x: np.ndarray) -> np.ndarray:
    """Column-major vectorization."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(v).reshape(n, n, order="F")


def _dissipator_parts(g: LindbladGenerator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stacked basis F, stacked adjoints F^dag and K = sum C_ij F_i F_j^dag."""
    f = np.array(g.basis)
    fd = f.conj().transpose(0, 2, 1)
    k = np.einsum("ij,iab,jbc->ac", g.C, f, fd)
    return f, fd, k


def superoperator(g: LindbladGenerator) -> np.ndarray:
    """n^2 x n^2 matrix S with vec(L[rho]) = S vec(rho), using vec(AXB) = (B^T (x) A) vec(X)."""
    n = g.dim
    eye = np.eye(n)
    f, fd, k = _dissipator_parts(g)
    # sum_ij C_ij F_i^T (x) F_j^dag
    jump = np.einsum("ij,iba,jcd->acbd", g.C, f, fd).reshape(n * n, n * n)
    s = -1j * (np.kron(eye, g.H) - np.kron(g.H.T, eye))
    return s + jump - 0.5 * (np.kron(eye, k) + np.kron(k.T, eye))


def apply_generator(g: LindbladGenerator, rho) -> np.ndarray:
    m = as_matrix(rho)
    if m.shape != (g.dim, g.dim):
        raise DimensionMismatch(f"generator acts on {g.dim}x{g.dim}, got {m.shape}")
    f, fd, k = _dissipator_parts(g)
    jump = np.einsum("ij,jab,bc,icd->ad", g.C, fd, m, f)
    return -1j * (g.H @ m - m @ g.H) + jump - 0.5 * (k @ m + m @ k)


class CPVerdict(NamedTuple):
    completely_positive: bool
    min_C_eigenvalue: float


def is_cp_generator(g: LindbladGenerator, tol: float = TOL_PSD) -> CPVerdict:
    w = np.linalg.eigvalsh(g.C)
    return CPVerdict(bool(w[0] >= -tol), float(w[0]))


def evolve(g: LindbladGenerator, rho0, t: float) -> np.ndarray:
    """exp(t L)[rho0] by dense exponentiation of the superoperator.

    Returns a plain matrix: for generators that do not preserve positivity the
    result may fail to be a state.
    """
    if t < 0:
        raise NegativeTime(f"evolution time must be >= 0, got {t}")
    m = as_matrix(rho0)
    out = scipy.linalg.expm(t * superoperator(g)) @ vec(m)
    return unvec(out, g.dim)


def trajectory(g: LindbladGenerator, rho0, times: Sequence[float]) -> np.ndarray:
    """States at each of ``times`` (shape (len(times), n, n))."""
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise NegativeTime("all sample times must be >= 0")
    s = superoperator(g)
    v0 = vec(as_matrix(rho0))
    return np.array([unvec(scipy.linalg.expm(t * s) @ v0, g.dim) for t in times])


def trajectory_ode(g: LindbladGenerator, rho0, times: Sequence[float],
                   rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Same as :func:`trajectory` by adaptive Runge-Kutta integration (DOP853)."""
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise NegativeTime("all sample times must be >= 0")
    s = superoperator(g)
    v0 = vec(as_matrix(rho0)).astype(complex)
    sol = solve_ivp(lambda _t, y: s @ y, (0.0, float(times.max())), v0, method="DOP853",
                    t_eval=times, rtol=rtol, atol=atol)
    return np.array([unvec(sol.y[:, k], g.dim) for k in range(len(times))])


def stationary_states(g: LindbladGenerator) -> list[np.ndarray]:
    """Hermitian basis of the kernel of L.

    Singular values below ``NULL_SPACE_RTOL`` times the largest count as zero.
    The first element is normalized to unit trace; the remaining ones are
    traceless. When the kernel is one-dimensional the single element is the
    unique stationary state.
    """
    n = g.dim
    s = superoperator(g)
    _, sv, vh = np.linalg.svd(s)
    null = vh[sv < NULL_SPACE_RTOL * sv[0]].conj()
    if null.shape[0] == 0:
        null = vh[-1:].conj()
    mats = []
    for v in null:
        x = unvec(v, n)
        mats.append(0.5 * (x + x.conj().T))
        mats.append(0.5j * (x - x.conj().T))
    # real orthonormal basis of the hermitian span
    flat = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats])
    u, sv2, vt = np.linalg.svd(flat, full_matrices=False)
    rank = int(np.sum(sv2 > 1e-8 * sv2[0]))
    herm = [vt[k, : n * n].reshape(n, n) + 1j * vt[k, n * n:].reshape(n, n) for k in range(rank)]
    traces = np.array([np.trace(h).real for h in herm])
    if np.max(np.abs(traces)) < TOL:
        return herm
    first = sum(t * h for t, h in zip(traces, herm))
    first = first / np.trace(first).real
    # complement of the trace direction carries no trace
    q, _ = np.linalg.qr(np.column_stack([traces, np.eye(rank)]))
    rest = [sum(q[k, c] * herm[k] for k in range(rank)) for c in range(1, rank)]
    return [first] + rest


@dataclass(frozen=True, eq=False)
class BlochAffine:
    """Qubit generator as 4x4 real matrices, d|rho>/dt = -2(Hmat + Dmat)|rho>.

    Hmat is antisymmetric with Hmat[1,2] = w3, Hmat[1,3] = -w2, Hmat[2,3] = w1
    for H = w.sigma. Dmat has a zero first row, symmetric lower-right block
    [[a,b,c],[b,alpha,beta],[c,beta,gamma]] and first column (0,u,v,w).
    """

    Hmat: np.ndarray
    Dmat: np.ndarray

    def __post_init__(self):
        for name, x in (("Hmat", self.Hmat), ("Dmat", self.Dmat)):
            if x.shape != (4, 4):
                raise DimensionMismatch(f"{name} must be 4x4, got {x.shape}")
        if np.max(np.abs(self.Hmat + self.Hmat.T)) > TOL:
            raise ValidationError("Hmat must be antisymmetric")
        if np.max(np.abs(self.Hmat[0])) > TOL:
            raise ValidationError("Hmat first row and column must vanish")
        if np.max(np.abs(self.Dmat[0])) > TOL:
            raise ValidationError("Dmat first row must vanish")
        d3 = self.Dmat[1:, 1:]
        if np.max(np.abs(d3 - d3.T)) > TOL:
            raise ValidationError("Dmat 3x3 block must be symmetric")

    @classmethod
    def from_raw(cls, T: np.ndarray) -> "BlochAffine":
        """Split a raw 4x4 drift (d|rho>/dt = -2 T |rho>) into Hamiltonian and
        dissipative parts: the antisymmetric 3x3 part goes to Hmat."""
        T = np.asarray(T, dtype=float)
        if np.max(np.abs(T[0])) > TOL:
            raise ValidationError("first row of the drift must vanish (trace preservation)")
        h = np.zeros((4, 4))
        d = np.zeros((4, 4))
        b = T[1:, 1:]
        h[1:, 1:] = 0.5 * (b - b.T)
        d[1:, 1:] = 0.5 * (b + b.T)
        d[1:, 0] = T[1:, 0]
        return cls(h, d)

    @classmethod
    def from_params(cls, omega=(0.0, 0.0, 0.0), D3=None, uvw=(0.0, 0.0, 0.0)) -> "BlochAffine":
        w1, w2, w3 = (float(x) for x in omega)
        h = np.zeros((4, 4))
        h[1, 2], h[1, 3], h[2, 3] = w3, -w2, w1
        h = h - h.T
        d = np.zeros((4, 4))
        d[1:, 1:] = np.zeros((3, 3)) if D3 is None else np.asarray(D3, dtype=float)
        d[1:, 0] = np.asarray(uvw, dtype=float)
        return cls(h, d)

    @property
    def omega(self) -> np.ndarray:
        return np.array([self.Hmat[2, 3], -self.Hmat[1, 3], self.Hmat[1, 2]])

    @property
    def D3(self) -> np.ndarray:
        return self.Dmat[1:, 1:].copy()

    @property
    def uvw(self) -> np.ndarray:
        return self.Dmat[1:, 0].copy()

    def params(self) -> dict[str, float]:
        d = self.Dmat
        names = {"a": (1, 1), "b": (1, 2), "c": (1, 3), "alpha": (2, 2), "beta": (2, 3),
                 "gamma": (3, 3), "u": (1, 0), "v": (2, 0), "w": (3, 0)}
        return {k: float(d[i, j]) for k, (i, j) in names.items()}

    def flow_matrix(self) -> np.ndarray:
        return -2.0 * (self.Hmat + self.Dmat)

    def evolve(self, r0: Sequence[float], t: float) -> np.ndarray:
        """Bloch vector at time t from the 4-vector flow."""
        if t < 0:
            raise NegativeTime(f"evolution time must be >= 0, got {t}")
        v = np.concatenate([[1.0], np.asarray(r0, dtype=float)])
        return (scipy.linalg.expm(t * self.flow_matrix()) @ v)[1:]


def to_bloch_affine(g: LindbladGenerator) -> BlochAffine:
    """Read off the 4x4 drift from d<sigma_a>/dt = sum_b Tr(sigma_a L[sigma_b]) v_b / 2."""
    if g.dim != 2:
        raise NotQubit(f"Bloch-affine form needs a qubit generator, got dim {g.dim}")
    m = np.array([[np.trace(sa @ apply_generator(g, sb)).real / 2 for sb in PAULI4] for sa in PAULI4])
    return BlochAffine.from_raw(-0.5 * m)


_EPS = np.zeros((3, 3, 3))
for _i, _j, _k in itertools.permutations(range(3)):
    _EPS[_i, _j, _k] = np.linalg.det(np.eye(3)[[_i, _j, _k]])


def levi_civita() -> np.ndarray:
    return _EPS.copy()


def from_bloch_affine(ba: BlochAffine) -> LindbladGenerator:
    """Inverse of :func:`to_bloch_affine`.

    H = w.sigma; the real part of C^P follows from D3 = Tr(C^P) 1 - Re C^P,
    the imaginary antisymmetric part from the first column,
    Im C^P_ij = -eps_ijk (u,v,w)_k / 2.
    """
    w = ba.omega
    H = sum(wk * s for wk, s in zip(w, PAULI))
    d3 = ba.D3
    cre = 0.5 * np.trace(d3) * np.eye(3) - d3
    cim = -0.5 * np.einsum("ijk,k->ij", _EPS, ba.uvw)
    return LindbladGenerator.from_pauli(H, cre + 1j * cim)


@dataclass(frozen=True)
class CPLedger:
    """Inequality checks on a symmetric D3 = [[a,b,c],[b,alpha,beta],[c,beta,gamma]].

    ``cp_checks`` are the complete-positivity conditions (equivalent to C^P >= 0
    when u=v=w=0); ``positivity_checks`` are the necessary conditions for
    positivity preservation (D3 >= 0). A nonzero first column adds the check
    ``first_column_compatible`` (full C^P >= 0) to the CP list.
    """

    R: float
    S: float
    T: float
    cp_checks: dict = field(default_factory=dict)
    positivity_checks: dict = field(default_factory=dict)

    @property
    def cp(self) -> bool:
        return all(self.cp_checks.values())

    @property
    def positive_necessary(self) -> bool:
        return all(self.positivity_checks.values())

    def failures(self) -> list[str]:
        return [k for k, ok in {**self.cp_checks, **self.positivity_checks}.items() if not ok]


def cp_ledger(ba: BlochAffine, tol: float = 1e-12) -> CPLedger:
    p = ba.params()
    a, b, c, al, be, ga = p["a"], p["b"], p["c"], p["alpha"], p["beta"], p["gamma"]
    R = 0.5 * (al + ga - a)
    S = 0.5 * (a + ga - al)
    T = 0.5 * (a + al - ga)
    cp = {
        "R>=0": R >= -tol,
        "S>=0": S >= -tol,
        "T>=0": T >= -tol,
        "RS>=b^2": R * S - b * b >= -tol,
        "RT>=c^2": R * T - c * c >= -tol,
        "ST>=beta^2": S * T - be * be >= -tol,
        "RST>=2b*c*beta+R*beta^2+S*c^2+T*b^2":
            R * S * T - (2 * b * c * be + R * be * be + S * c * c + T * b * b) >= -tol,
    }
    if np.max(np.abs(ba.uvw)) > tol:
        cp["first_column_compatible"] = bool(
            np.linalg.eigvalsh(from_bloch_affine(ba).kossakowski_pauli())[0] >= -tol)
    pos = {
        "a>=0": a >= -tol,
        "alpha>=0": al >= -tol,
        "gamma>=0": ga >= -tol,
        "a*alpha>=b^2": a * al - b * b >= -tol,
        "a*gamma>=c^2": a * ga - c * c >= -tol,
        "alpha*gamma>=beta^2": al * ga - be * be >= -tol,
        "det(D3)>=0": float(np.linalg.det(ba.D3)) >= -tol,
    }
    return CPLedger(R, S, T, {k: bool(v) for k, v in cp.items()}, {k: bool(v) for k, v in pos.items()})


def determinant_rate(ba: BlochAffine, r: Sequence[float]) -> float:
    """d Det[rho]/dt at the state with Bloch vector r: r.D3 r + sum_j D_j0 r_j.

    Follows from Det = (1 - |r|^2)/4; the Hamiltonian part drops out.
    """
    r = np.asarray(r, dtype=float)
    return float(r @ ba.D3 @ r + ba.uvw @ r)


class Witness(NamedTuple):
    bloch: np.ndarray
    ddet: float


def _redfield_candidate(ba: BlochAffine) -> np.ndarray | None:
    """Closed-form pure state for drifts shaped like the Redfield qubit model:
    D3 = [[0, b/2, 0], [b/2, alpha, 0], [0, 0, alpha]], first column (0, 0, d)."""
    d3, col = ba.D3, ba.uvw
    alpha, b, d = d3[1, 1], 2 * d3[0, 1], col[2]
    shaped = (abs(d3[0, 0]) < TOL and abs(d3[0, 2]) < TOL and abs(d3[1, 2]) < TOL
              and abs(d3[2, 2] - alpha) < TOL and abs(col[0]) < TOL and abs(col[1]) < TOL)
    if not shaped or alpha <= 0 or abs(d) > 2 * alpha:
        return None
    root = np.sqrt((4 * alpha**2 - d**2) / (alpha**2 + b**2))
    return np.array([0.5 * root, -b / (2 * alpha) * root, -d / (2 * alpha)])


def positivity_witness(ba: BlochAffine, restarts: int = 64, seed: int = 0,
                       max_iter: int = 20000) -> Witness | None:
    """Pure state whose determinant starts to decrease, if one exists.

    Minimizes :func:`determinant_rate` over the unit sphere: the closed-form
    Redfield-shaped candidate (when applicable) plus projected gradient descent
    from ``restarts`` random points. Returns the best point when its rate is
    below -1e-12, else None.
    """
    d3, col = ba.D3, ba.uvw
    rng = np.random.default_rng(seed)
    step = 1.0 / (2 * np.linalg.norm(d3, 2) + np.linalg.norm(col) + 1e-300)
    candidates = []
    cand = _redfield_candidate(ba)
    if cand is not None:
        candidates.append(cand / np.linalg.norm(cand))
    starts = list(candidates) + [x / np.linalg.norm(x) for x in rng.normal(size=(restarts, 3))]
    best_r, best_v = None, np.inf
    for r in starts:
        for _ in range(max_iter):
            grad = 2 * d3 @ r + col
            r_new = r - step * grad
            r_new /= np.linalg.norm(r_new)
            if np.linalg.norm(r_new - r) < 1e-15:
                r = r_new
                break
            r = r_new
        candidates.append(r)
    for r in candidates:
        v = determinant_rate(ba, r)
        if v < best_v:
            best_r, best_v = r, v
    if best_v < -WITNESS_TOL:
        return Witness(best_r, float(best_v))
    return None


def two_level_relaxation(omega: float, p: float, q: float, r: float) -> BlochAffine:
    """Population exchange p, q and coherence damping r for a qubit.

    Realizes d rho11/dt = -p rho11 + q rho22, d rho12/dt = -(i omega + r) rho12
    (and conjugates). In the -2(H + D) convention this means w3 = omega/2,
    a = alpha = r/2, gamma = (p+q)/2 and first-column entry (p-q)/2.
    """
    return BlochAffine.from_params((0.0, 0.0, omega / 2), np.diag([r / 2, r / 2, (p + q) / 2]),
                                   (0.0, 0.0, (p - q) / 2))


def generator_to_json(g: LindbladGenerator) -> dict:
    if g.basis_name == "pauli":
        return {"dim": 2, "H": matrix_to_json(g.H), "C": matrix_to_json(g.kossakowski_pauli()),
                "basis": "pauli"}
    return {"dim": g.dim, "H": matrix_to_json(g.H), "C": matrix_to_json(g.C),
            "basis": [matrix_to_json(f) for f in g.basis]}


def generator_from_json(obj: dict) -> LindbladGenerator:
    """Parse {dim, H, C, basis}. With basis "pauli", C multiplies bare Pauli
    matrices (sigma_j rho sigma_i), which is the usual qubit convention."""
    try:
        H = matrix_from_json(obj["H"])
        C = matrix_from_json(obj["C"])
        basis = obj.get("basis", "pauli")
    except KeyError as exc:
        raise ValidationError(f"generator JSON missing field {exc}") from exc
    if basis == "pauli":
        if H.shape != (2, 2):
            raise NotQubit("basis 'pauli' is only defined for dim 2")
        return LindbladGenerator.from_pauli(H, C)
    if isinstance(basis, str):
        raise ValidationError(f"unknown basis {basis!r}")
    fs = tuple(matrix_from_json(f) for f in basis)
    return LindbladGenerator(H.shape[0], H, C, fs, "explicit")


__all__ = [
    "BlochAffine", "CPLedger", "CPVerdict", "LindbladGenerator", "Witness",
    "apply_generator", "cp_ledger", "depolarizing_generator", "determinant_rate", "evolve",
    "from_bloch_affine", "generator_from_json", "generator_from_operators", "generator_to_json",
    "is_cp_generator", "orthonormal_basis", "pauli_basis", "positivity_witness",
    "stationary_states", "superoperator", "to_bloch_affine", "trajectory", "trajectory_ode",
    "two_level_relaxation",
]
