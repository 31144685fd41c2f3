"""Dense finite-dimensional quantum linear algebra.

States are numpy vectors, operators are dense complex numpy matrices
(row-major).  Everything here is a pure function over immutable values;
random sampling takes an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Tolerance tiers: algebraic identities are float-noise limited, PSD checks
# allow eigensolver jitter, solver outputs carry first-order-method error.
ATOL_ALGEBRA = 1e-12
ATOL_PSD = 1e-10
ATOL_SOLVER = 1e-6


class ReducedStateMismatchError(ValueError):
    """Raised when two states have different marginals on the untouched
    registers, so no local unitary can map one to the other."""


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("matrix has non-finite entries")
    return a


def _as_vector(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("vector has non-finite entries")
    return a


def is_hermitian(m, atol: float = ATOL_PSD) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= atol)


def check_pure_state(psi, atol: float = ATOL_ALGEBRA) -> np.ndarray:
    """Validate and return a normalized state vector."""
    psi = _as_vector(psi)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > atol:
        raise ValueError(f"state norm {nrm} differs from 1 beyond {atol}")
    return psi


def check_density(rho, atol: float = ATOL_ALGEBRA, psd_atol: float = ATOL_PSD) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    rho = _as_matrix(rho)
    if not is_hermitian(rho, atol):
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > max(atol, 1e-12 * rho.shape[0]):
        raise ValueError(f"density matrix trace {tr} differs from 1")
    w = np.linalg.eigvalsh(rho)
    if w.min() < -psd_atol:
        raise ValueError(f"density matrix has eigenvalue {w.min()} < -{psd_atol}")
    return rho


def check_projector(p, atol: float = ATOL_PSD) -> np.ndarray:
    """Validate that ``p`` is Hermitian and idempotent."""
    p = _as_matrix(p)
    if not is_hermitian(p, atol):
        raise ValueError("projector is not Hermitian")
    if np.linalg.norm(p @ p - p) > atol:
        raise ValueError("matrix is not idempotent")
    return p


def check_povm(elements: Sequence[np.ndarray], atol: float = ATOL_PSD) -> None:
    """Validate that ``elements`` are PSD and sum to the identity."""
    total = None
    for e in elements:
        e = _as_matrix(e)
        if not is_hermitian(e, atol):
            raise ValueError("POVM element is not Hermitian")
        if np.linalg.eigvalsh(e).min() < -atol:
            raise ValueError("POVM element is not PSD")
        total = e if total is None else total + e
    if total is None:
        raise ValueError("empty POVM")
    if np.max(np.abs(total - np.eye(total.shape[0]))) > atol:
        raise ValueError("POVM elements do not sum to identity")


@dataclass(frozen=True)
class SplitSystem:
    """Register structure of a multipartite state.

    ``dims`` lists the subsystem dimensions in tensor order; ``alice`` and
    ``bob`` optionally assign register indices to the two parties.
    """

    dims: tuple[int, ...]
    alice: tuple[int, ...] = field(default=())
    bob: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "alice", tuple(int(i) for i in self.alice))
        object.__setattr__(self, "bob", tuple(int(i) for i in self.bob))
        if any(d < 1 for d in self.dims):
            raise ValueError("subsystem dimensions must be >= 1")
        owned = self.alice + self.bob
        if owned and sorted(owned) != list(range(len(self.dims))):
            raise ValueError("alice/bob must partition the register indices")

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def dim_of(self, registers: Iterable[int]) -> int:
        return int(np.prod([self.dims[i] for i in registers], initial=1))


def _dims_of(sys) -> tuple[int, ...]:
    if isinstance(sys, SplitSystem):
        return sys.dims
    return tuple(int(d) for d in sys)


def tensor(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors)."""
    if not ops:
        raise ValueError("tensor() needs at least one factor")
    out = np.asarray(ops[0], dtype=complex)
    if not np.all(np.isfinite(out.view(float))):
        raise ValueError("tensor factor has non-finite entries")
    for op in ops[1:]:
        op = np.asarray(op, dtype=complex)
        if not np.all(np.isfinite(op.view(float))):
            raise ValueError("tensor factor has non-finite entries")
        out = np.kron(out, op)
    return out


def partial_trace(rho, sys, keep: Sequence[int]) -> np.ndarray:
    """Trace out all registers except ``keep`` (kept in original order)."""
    dims = _dims_of(sys)
    rho = _as_matrix(rho)
    n = len(dims)
    if rho.shape[0] != int(np.prod(dims)):
        raise ValueError(f"dims {dims} do not match matrix dimension {rho.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError("keep index out of range")
    traced = [i for i in range(n) if i not in keep]
    t = rho.reshape(dims + dims)
    # Contract traced row/column axes pairwise, highest index first so the
    # remaining axis numbering stays valid.
    for idx in sorted(traced, reverse=True):
        t = np.trace(t, axis1=idx, axis2=idx + (t.ndim // 2))
    d_keep = int(np.prod([dims[k] for k in keep], initial=1))
    return t.reshape(d_keep, d_keep)


def hermitian_eig(m, atol: float = ATOL_PSD) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and matching orthonormal eigenvector columns."""
    m = _as_matrix(m)
    if not is_hermitian(m, atol):
        raise ValueError("hermitian_eig requires a Hermitian matrix")
    w, v = np.linalg.eigh(m)
    return w[::-1].copy(), v[:, ::-1].copy()


def mat_sqrt(m) -> np.ndarray:
    """PSD square root, clipping tiny negative eigenvalues."""
    w, v = np.linalg.eigh(_as_matrix(m))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def trace_norm(m) -> float:
    """Sum of singular values."""
    return float(np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False).sum())


def purify(rho) -> np.ndarray:
    """Purification on dim^2, ancilla register first.

    The ancilla holds a copy of each eigenvector, so tracing out register 0
    returns ``rho``.
    """
    rho = check_density(rho)
    d = rho.shape[0]
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    psi = np.zeros(d * d, dtype=complex)
    for i in range(d):
        if w[i] > 0.0:
            psi += np.sqrt(w[i]) * np.kron(v[:, i], v[:, i])
    return psi / np.linalg.norm(psi)


def density(psi) -> np.ndarray:
    """Rank-1 density matrix |psi><psi|."""
    psi = _as_vector(psi)
    return np.outer(psi, psi.conj())


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity F = tr sqrt(sqrt(rho) sigma sqrt(rho)).

    For pure states (passed as vectors) this is |<psi|phi>|, the square-root
    convention.
    """
    a = np.asarray(rho, dtype=complex)
    b = np.asarray(sigma, dtype=complex)
    if a.ndim == 1 and b.ndim == 1:
        if a.shape != b.shape:
            raise ValueError("state dimensions do not match")
        return float(min(abs(np.vdot(a, b)), 1.0))
    if a.ndim == 1:
        a = density(a)
    if b.ndim == 1:
        b = density(b)
    if a.shape != b.shape:
        raise ValueError("state dimensions do not match")
    # F = ||sqrt(rho) sqrt(sigma)||_1, numerically gentler than nested sqrtm.
    f = trace_norm(mat_sqrt(a) @ mat_sqrt(b))
    return float(min(max(f, 0.0), 1.0))


def apply_on_registers(op, psi, sys, act_on: Sequence[int]) -> np.ndarray:
    """Apply ``op`` to the listed registers of a state vector."""
    dims = _dims_of(sys)
    psi = _as_vector(psi)
    act = sorted(set(int(i) for i in act_on))
    rest = [i for i in range(len(dims)) if i not in act]
    d_act = int(np.prod([dims[i] for i in act], initial=1))
    d_rest = int(np.prod([dims[i] for i in rest], initial=1))
    t = psi.reshape(dims).transpose(act + rest).reshape(d_act, d_rest)
    t = np.asarray(op, dtype=complex) @ t
    t = t.reshape([dims[i] for i in act] + [dims[i] for i in rest])
    inv = np.argsort(act + rest)
    return t.transpose(inv).reshape(-1)


def _split_matrix(psi, dims, act) -> tuple[np.ndarray, list[int]]:
    rest = [i for i in range(len(dims)) if i not in act]
    d_act = int(np.prod([dims[i] for i in act], initial=1))
    d_rest = int(np.prod([dims[i] for i in rest], initial=1))
    m = np.asarray(psi, dtype=complex).reshape(dims).transpose(act + rest)
    return m.reshape(d_act, d_rest), rest


def uhlmann_unitary(phi, psi, sys, act_on: Sequence[int], atol: float = 1e-8) -> np.ndarray:
    """Unitary on the ``act_on`` registers carrying |phi> to |psi| up to phase.

    Both states must have the same reduced state on the untouched registers;
    that is exactly the hypothesis of Uhlmann's theorem, and its failure means
    the registers outside ``act_on`` carry distinguishing information.  The
    unitary is the polar factor of the overlap matrix between the two states'
    Schmidt vectors, with an arbitrary (deterministic) completion on the
    kernel.
    """
    dims = _dims_of(sys)
    phi = check_pure_state(phi, atol=1e-9)
    psi = check_pure_state(psi, atol=1e-9)
    act = sorted(set(int(i) for i in act_on))
    m_phi, _ = _split_matrix(phi, dims, act)
    m_psi, _ = _split_matrix(psi, dims, act)

    red_phi = np.einsum("ar,as->rs", m_phi, m_phi.conj())
    red_psi = np.einsum("ar,as->rs", m_psi, m_psi.conj())
    gap = np.max(np.abs(red_phi - red_psi))
    if gap > atol:
        raise ReducedStateMismatchError(
            f"reduced states on untouched registers differ by {gap:.3e} > {atol:.1e}"
        )

    w = m_psi @ m_phi.conj().T
    u_w, _, v_wh = np.linalg.svd(w)
    return u_w @ v_wh


def transport_error(u, phi, psi, sys, act_on: Sequence[int]) -> float:
    """Phase-insensitive residual ||(U x I)|phi> - e^{i theta}|psi>||."""
    moved = apply_on_registers(u, phi, sys, act_on)
    overlap = np.vdot(psi, moved)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0
    return float(np.linalg.norm(moved - phase * np.asarray(psi, dtype=complex).reshape(-1)))


def sample_haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform pure state (normalized complex Gaussian)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def sample_haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    # Phase-correct the diagonal so the distribution is exactly Haar.
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def sample_haar_projector(dim: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Haar rotation of a rank-``rank`` diagonal projector."""
    if not 0 <= rank <= dim:
        raise ValueError(f"rank {rank} out of range for dim {dim}")
    u = sample_haar_unitary(dim, rng)
    cols = u[:, :rank]
    return cols @ cols.conj().T


def sample_haar(dim: int, kind: str, rng: np.random.Generator, rank: int | None = None):
    """Dispatch sampler: kind in {'pure_state', 'unitary', 'projector'}."""
    if kind == "pure_state":
        return sample_haar_state(dim, rng)
    if kind == "unitary":
        return sample_haar_unitary(dim, rng)
    if kind == "projector":
        if rank is None:
            raise ValueError("projector sampling needs a rank")
        return sample_haar_projector(dim, rank, rng)
    raise ValueError(f"unknown kind {kind!r}")
