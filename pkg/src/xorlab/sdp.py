"""Small dense semidefinite programming.

One solver (ADMM-style splitting between the affine constraint subspace and
the PSD cone, with eigenvalue clipping) and its two consumers:

* ``discrimination`` / ``optimal_measurement`` — optimal POVM for a linear
  objective, i.e. multi-hypothesis state discrimination;
* ``npa1_value`` — the level-1 moment-matrix upper bound on the quantum
  value of a two-player game.

Problems are stated over one Hermitian PSD variable; an optional block
structure restricts the variable to a block diagonal, which is what the
discrimination embedding uses.  All-real problem data is detected and solved
in real symmetric arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .quantum import mat_sqrt, trace_norm

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 50_000


class SolverError(RuntimeError):
    """Internal inconsistency or non-convergence propagated to callers."""


@dataclass
class SdpProblem:
    """max/min <objective, X> over Hermitian X >= 0 with <A_i, X> = b_i.

    ``blocks``, when given, restricts X to a block-diagonal matrix with the
    listed block sizes (entries of objective/constraints outside the block
    diagonal are ignored).  Constraint matrices may be dense arrays or
    scipy sparse matrices.
    """

    dim: int
    objective: object
    constraints: list = field(default_factory=list)
    sense: str = "maximize"
    blocks: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.sense not in ("maximize", "minimize"):
            raise ValueError(f"bad sense {self.sense!r}")
        if self.blocks is not None:
            self.blocks = tuple(int(b) for b in self.blocks)
            if sum(self.blocks) != self.dim:
                raise ValueError("block sizes must sum to dim")


@dataclass
class SdpSolution:
    matrix: np.ndarray
    value: float
    primal_residual: float
    dual_gap: float
    iterations: int
    status: str  # optimal | max_iter | infeasible


class _BlockLayout:
    """Isometric real vectorization of (block-diagonal) Hermitian matrices."""

    def __init__(self, dim: int, blocks, complex_mode: bool):
        self.dim = dim
        self.blocks = tuple(blocks) if blocks is not None else (dim,)
        self.complex_mode = complex_mode
        self.offsets = np.concatenate([[0], np.cumsum(self.blocks)])[:-1]
        seg = 0
        self.seg_starts = []
        self.tri_i = []
        self.tri_j = []
        for d in self.blocks:
            self.seg_starts.append(seg)
            iu, ju = np.triu_indices(d, k=1)
            self.tri_i.append(iu)
            self.tri_j.append(ju)
            per = d + len(iu) * (2 if complex_mode else 1)
            seg += per
        self.size = seg
        # Entry -> coordinate lookup for sparse constraint assembly.
        self._block_of = np.zeros(dim, dtype=int)
        for k, (off, d) in enumerate(zip(self.offsets, self.blocks)):
            self._block_of[off : off + d] = k

    def coords_of_entry(self, i: int, j: int):
        """hvec coordinates and weights representing Hermitian entry (i, j),
        i <= j, with value v contributing v.real (and v.imag) times weight."""
        k = self._block_of[i]
        if self._block_of[j] != k:
            return None  # outside the block diagonal: ignored
        off = self.offsets[k]
        d = self.blocks[k]
        s = self.seg_starts[k]
        li, lj = i - off, j - off
        if li == lj:
            return (s + li, 1.0, None)
        t = li * d - li * (li + 1) // 2 + (lj - li - 1)
        re_coord = s + d + t
        im_coord = s + d + len(self.tri_i[k]) + t if self.complex_mode else None
        return (re_coord, np.sqrt(2.0), im_coord)

    def hvec(self, m) -> np.ndarray:
        """Vectorize a Hermitian matrix (dense or scipy-sparse)."""
        v = np.zeros(self.size)
        if sp.issparse(m):
            m = ((m + m.conj().T) * 0.5).tocoo()
            for i, j, val in zip(m.row, m.col, m.data):
                if i > j:
                    continue
                c = self.coords_of_entry(int(i), int(j))
                if c is None:
                    continue
                re_coord, w, im_coord = c
                v[re_coord] += w * complex(val).real
                if im_coord is not None:
                    v[im_coord] += w * complex(val).imag
            return v
        m = np.asarray(m)
        m = (m + m.conj().T) * 0.5
        for k, (off, d) in enumerate(zip(self.offsets, self.blocks)):
            blk = m[off : off + d, off : off + d]
            s = self.seg_starts[k]
            v[s : s + d] = np.real(np.diagonal(blk))
            iu, ju = self.tri_i[k], self.tri_j[k]
            upper = blk[iu, ju]
            v[s + d : s + d + len(iu)] = np.sqrt(2.0) * np.real(upper)
            if self.complex_mode:
                v[s + d + len(iu) : s + d + 2 * len(iu)] = np.sqrt(2.0) * np.imag(upper)
        return v

    def unhvec(self, v) -> np.ndarray:
        dtype = complex if self.complex_mode else float
        m = np.zeros((self.dim, self.dim), dtype=dtype)
        for k, (off, d) in enumerate(zip(self.offsets, self.blocks)):
            s = self.seg_starts[k]
            blk = np.zeros((d, d), dtype=dtype)
            blk[np.arange(d), np.arange(d)] = v[s : s + d]
            iu, ju = self.tri_i[k], self.tri_j[k]
            upper = v[s + d : s + d + len(iu)] / np.sqrt(2.0)
            if self.complex_mode:
                upper = upper + 1j * v[s + d + len(iu) : s + d + 2 * len(iu)] / np.sqrt(2.0)
            blk[iu, ju] = upper
            blk[ju, iu] = np.conj(upper)
            m[off : off + d, off : off + d] = blk
        return m

    def project_psd(self, v) -> np.ndarray:
        out = np.empty_like(v)
        for k, (off, d) in enumerate(zip(self.offsets, self.blocks)):
            s = self.seg_starts[k]
            iu, ju = self.tri_i[k], self.tri_j[k]
            blk = np.zeros((d, d), dtype=complex if self.complex_mode else float)
            blk[np.arange(d), np.arange(d)] = v[s : s + d]
            upper = v[s + d : s + d + len(iu)] / np.sqrt(2.0)
            if self.complex_mode:
                upper = upper + 1j * v[s + d + len(iu) : s + d + 2 * len(iu)] / np.sqrt(2.0)
            blk[iu, ju] = upper
            blk[ju, iu] = np.conj(upper)
            w, q = np.linalg.eigh(blk)
            w = np.clip(w, 0.0, None)
            blk = (q * w) @ q.conj().T
            out[s : s + d] = np.real(np.diagonal(blk))
            up = blk[iu, ju]
            out[s + d : s + d + len(iu)] = np.sqrt(2.0) * np.real(up)
            if self.complex_mode:
                out[s + d + len(iu) : s + d + 2 * len(iu)] = np.sqrt(2.0) * np.imag(up)
        return out


def _is_real(m) -> bool:
    if sp.issparse(m):
        return not np.iscomplexobj(m.data) or float(np.max(np.abs(m.data.imag), initial=0.0)) == 0.0
    m = np.asarray(m)
    return not np.iscomplexobj(m) or float(np.max(np.abs(m.imag), initial=0.0)) == 0.0


def solve(
    problem: SdpProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    z0=None,
    over_relax: float = 1.6,
    rho0: float = 1.0,
    adapt_every: int = 25,
    adapt_ratio: float = 10.0,
    adapt_factor: float = 2.0,
) -> SdpSolution:
    """First-order solve of an SdpProblem; deterministic given its inputs.

    Alternates projection onto the affine constraint subspace with projection
    onto the PSD cone (eigenvalue clipping), with over-relaxation and
    residual-balancing penalty updates.
    """
    complex_mode = not (_is_real(problem.objective) and all(_is_real(a) for a, _ in problem.constraints))
    layout = _BlockLayout(problem.dim, problem.blocks, complex_mode)
    n = layout.size

    c = layout.hvec(problem.objective)
    if problem.sense == "minimize":
        c_work = -c
    else:
        c_work = c
    c_norm = np.linalg.norm(c_work)
    c_unit = c_work / c_norm if c_norm > 0 else c_work

    rows, cols, vals, bs = [], [], [], []
    for a_mat, b_val in problem.constraints:
        rv = layout.hvec(a_mat)
        nz = np.nonzero(rv)[0]
        if len(nz) == 0:
            if abs(b_val) > 1e-12:
                return SdpSolution(
                    matrix=np.zeros((problem.dim, problem.dim)),
                    value=float("nan"),
                    primal_residual=float("inf"),
                    dual_gap=float("inf"),
                    iterations=0,
                    status="infeasible",
                )
            continue
        r = len(bs)
        rows.extend([r] * len(nz))
        cols.extend(nz.tolist())
        vals.extend(rv[nz].tolist())
        bs.append(float(b_val))
    k = len(bs)
    b = np.asarray(bs)
    a = sp.csr_matrix((vals, (rows, cols)), shape=(k, n)) if k else sp.csr_matrix((0, n))

    if k:
        aat = (a @ a.T).tocsc()
        off_diag = aat - sp.diags(aat.diagonal())
        if off_diag.nnz == 0:
            dinv = 1.0 / aat.diagonal()
            solve_aat = lambda r: r * dinv
        else:
            try:
                lu = spla.splu(aat)
            except RuntimeError:
                lu = spla.splu((aat + 1e-10 * sp.eye(k)).tocsc())
            solve_aat = lu.solve

        def proj_aff(v):
            return v - a.T @ solve_aat(a @ v - b)

    else:
        proj_aff = lambda v: v

    z = layout.hvec(z0) if z0 is not None else np.zeros(n)
    u = np.zeros(n)
    rho = rho0
    b_scale = 1.0 + np.linalg.norm(b)
    status = "max_iter"
    it = 0
    feas_hist: list[float] = []
    r_pri_rel = r_dual_rel = gap_rel = float("inf")

    for it in range(1, max_iter + 1):
        x = proj_aff(z - u + c_unit / rho)
        x_r = over_relax * x + (1.0 - over_relax) * z
        z_new = layout.project_psd(x_r + u)
        u = u + x_r - z_new

        r_pri = np.linalg.norm(x - z_new)
        r_dual = rho * np.linalg.norm(z_new - z)
        z = z_new
        scale_pri = max(np.linalg.norm(x), np.linalg.norm(z), 1.0)
        scale_dual = max(rho * np.linalg.norm(u), 1.0)
        r_pri_rel = r_pri / scale_pri
        r_dual_rel = r_dual / scale_dual
        feas = np.linalg.norm(a @ z - b) / b_scale if k else 0.0
        gap_rel = abs(c_unit @ (x - z)) / (1.0 + abs(c_unit @ z))

        if r_pri_rel <= tol and r_dual_rel <= tol and feas <= tol and gap_rel <= tol:
            status = "optimal"
            break

        feas_hist.append(feas)
        if it % adapt_every == 0:
            if r_pri_rel > adapt_ratio * r_dual_rel and rho < 1e4:
                rho *= adapt_factor
                u /= adapt_factor
            elif r_dual_rel > adapt_ratio * r_pri_rel and rho > 1e-4:
                rho /= adapt_factor
                u *= adapt_factor
        # Heuristic infeasibility: the affine residual has stalled well above
        # tolerance for a long window.
        if it >= 2000 and it % 500 == 0:
            window = feas_hist[-1500:]
            if min(window) > max(100.0 * tol, 1e-4) and min(window) > 0.995 * window[0]:
                status = "infeasible"
                break

    matrix = layout.unhvec(z)
    value = float(c @ z)
    return SdpSolution(
        matrix=matrix,
        value=value,
        primal_residual=float(max(r_pri_rel, np.linalg.norm(a @ z - b) / b_scale if k else 0.0)),
        dual_gap=float(max(r_dual_rel, gap_rel)),
        iterations=it,
        status=status,
    )


# ---------------------------------------------------------------------------
# Optimal measurements / state discrimination
# ---------------------------------------------------------------------------


def helstrom_value(rho_a, rho_b, p_a: float = 0.5, p_b: float = 0.5) -> float:
    """Optimal probability of telling two states apart: (pa+pb)/2 + ||pa A - pb B||_1 / 2."""
    delta = p_a * np.asarray(rho_a, dtype=complex) - p_b * np.asarray(rho_b, dtype=complex)
    return float(0.5 * (p_a + p_b) + 0.5 * trace_norm(delta))


def helstrom_measurement(rho_a, rho_b, p_a: float = 0.5, p_b: float = 0.5):
    """Projectors (E_a, E_b) attaining the Helstrom value.

    The kernel of the weighted difference is assigned to the first label.
    """
    delta = p_a * np.asarray(rho_a, dtype=complex) - p_b * np.asarray(rho_b, dtype=complex)
    w, v = np.linalg.eigh(delta)
    pos = w >= -1e-12
    e_a = (v[:, pos]) @ v[:, pos].conj().T
    return e_a, np.eye(delta.shape[0]) - e_a


def pretty_good_measurement(ops):
    """Pretty-good measurement for subnormalized PSD operators."""
    total = sum(ops)
    w, v = np.linalg.eigh(total)
    inv_sqrt = (v * [1.0 / np.sqrt(x) if x > 1e-14 else 0.0 for x in w]) @ v.conj().T
    povm = [inv_sqrt @ op @ inv_sqrt for op in ops]
    # Park any unmeasured subspace on the first outcome.
    slack = np.eye(total.shape[0]) - sum(povm)
    povm[0] = povm[0] + slack
    return povm


def _normalize_povm(povm):
    """Force exact completeness by congruence with the inverse square root of
    the element sum (keeps every element PSD)."""
    total = sum(povm)
    w, v = np.linalg.eigh(total)
    ridge = max(0.0, 1e-12 - float(w.min()))
    if ridge > 0.0:
        total = total + ridge * np.eye(total.shape[0])
        w, v = np.linalg.eigh(total)
    inv_sqrt = (v * (1.0 / np.sqrt(w))) @ v.conj().T
    out = [inv_sqrt @ e @ inv_sqrt for e in povm]
    out[0] = out[0] + (np.eye(total.shape[0]) - sum(out))
    return out


def _measurement_objective(povm, ops) -> float:
    return float(np.real(sum(np.trace(e @ w) for e, w in zip(povm, ops))))


def optimal_measurement(ops, tol: float = 1e-8, max_iter: int = DEFAULT_MAX_ITER):
    """Maximize sum_b tr(E_b W_b) over POVMs {E_b}.

    Returns ``(value, povm, solution)``; ``value`` is attained by the
    returned, exactly complete POVM and never falls below the pretty-good
    measurement benchmark.
    """
    ops = [np.asarray(w, dtype=complex) for w in ops]
    m = len(ops)
    d = ops[0].shape[0]
    if any(w.shape != (d, d) for w in ops):
        raise ValueError("measurement operators must share one dimension")
    if m == 1:
        eye = np.eye(d)
        return float(np.real(np.trace(ops[0]))), [eye], None

    all_real = all(_is_real(w) for w in ops)
    dtype = float if all_real else complex
    dim = m * d
    objective = np.zeros((dim, dim), dtype=dtype)
    for i, w in enumerate(ops):
        objective[i * d : (i + 1) * d, i * d : (i + 1) * d] = w.real if all_real else w

    constraints = []
    for r in range(d):
        rows = [i * d + r for i in range(m)]
        constraints.append((sp.coo_matrix((np.ones(m), (rows, rows)), shape=(dim, dim)), 1.0))
    for r in range(d):
        for s in range(r + 1, d):
            ri = [i * d + r for i in range(m)]
            si = [i * d + s for i in range(m)]
            a_re = sp.coo_matrix(
                (np.full(2 * m, 0.5), (ri + si, si + ri)), shape=(dim, dim)
            )
            constraints.append((a_re, 0.0))
            if not all_real:
                a_im = sp.coo_matrix(
                    (np.concatenate([np.full(m, -0.5j), np.full(m, 0.5j)]), (ri + si, si + ri)),
                    shape=(dim, dim),
                )
                constraints.append((a_im, 0.0))

    # Warm start from the pretty-good measurement of the shifted operators.
    shift = max(0.0, -min(float(np.linalg.eigvalsh(w).min()) for w in ops)) + 1e-9
    pgm = pretty_good_measurement([w + shift * np.eye(d) for w in ops])
    z0 = np.zeros((dim, dim), dtype=complex)
    for i, e in enumerate(pgm):
        z0[i * d : (i + 1) * d, i * d : (i + 1) * d] = e
    if all_real:
        z0 = z0.real

    problem = SdpProblem(dim=dim, objective=objective, constraints=constraints, blocks=(d,) * m)
    sol = solve(problem, tol=tol, max_iter=max_iter, z0=z0)

    extracted = [np.asarray(sol.matrix[i * d : (i + 1) * d, i * d : (i + 1) * d], dtype=complex) for i in range(m)]
    candidates = [_normalize_povm(extracted), pgm]
    scored = [(_measurement_objective(p, ops), idx) for idx, p in enumerate(candidates)]
    best_val, best_idx = max(scored, key=lambda t: (t[0], -t[1]))
    if sol.status == "optimal" and sol.value < best_val - 1000.0 * tol * (1.0 + abs(best_val)):
        raise SolverError("SDP value fell below a feasible measurement; solver inconsistent")
    return best_val, candidates[best_idx], sol


def discrimination(states, priors, tol: float = 1e-8, return_povm: bool = False):
    """Optimal probability of identifying which state was sent.

    Solves the standard discrimination SDP; the returned probability is
    attained by an exactly complete POVM and dominates the pretty-good
    measurement value.
    """
    states = [np.asarray(s, dtype=complex) for s in states]
    priors = np.asarray(priors, dtype=float)
    if len(states) != len(priors):
        raise ValueError("states and priors length mismatch")
    if abs(priors.sum() - 1.0) > 1e-9:
        raise ValueError("priors must sum to 1")
    if priors.min() < -1e-12:
        raise ValueError("priors must be nonnegative")
    d = states[0].shape[0]
    if any(s.shape != (d, d) for s in states):
        raise ValueError("state dimensions do not match")
    if len(states) == 1:
        return (1.0, [np.eye(d)]) if return_povm else 1.0
    value, povm, _ = optimal_measurement([p * s for p, s in zip(priors, states)], tol=tol)
    return (value, povm) if return_povm else value


# ---------------------------------------------------------------------------
# Level-1 moment-matrix relaxation
# ---------------------------------------------------------------------------


def npa1_value(game, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER, full_output: bool = False):
    """Level-1 moment-matrix upper bound on the quantum value of ``game``.

    The operator list is {identity} + one projector per (input, output) pair
    per player, with the last output of every input eliminated against
    completeness.  Projectivity and same-input orthogonality are imposed as
    equality constraints; commutation is automatic at this level for a
    real-valued winning predicate.
    """
    ax = list(game.alice_inputs)
    bx = list(game.bob_inputs)
    ao = list(game.alice_outputs)
    bo = list(game.bob_outputs)
    pa = dict(zip(ax, game.alice_input_probs))
    pb = dict(zip(bx, game.bob_input_probs))

    idx = {}
    next_id = 1
    for x in ax:
        for a in ao[:-1]:
            idx[("A", x, a)] = next_id
            next_id += 1
    for y in bx:
        for b in bo[:-1]:
            idx[("B", y, b)] = next_id
            next_id += 1
    n_ops = next_id

    f = np.zeros((n_ops, n_ops))

    def add(i, j, w):
        f[i, j] += 0.5 * w
        f[j, i] += 0.5 * w

    a_last, b_last = ao[-1], bo[-1]
    for x in ax:
        for y in bx:
            w_xy = pa[x] * pb[y]
            for a in ao:
                for b_out in bo:
                    if not game.predicate(x, y, a, b_out):
                        continue
                    a_red = a != a_last
                    b_red = b_out != b_last
                    if a_red and b_red:
                        add(idx[("A", x, a)], idx[("B", y, b_out)], w_xy)
                    elif not a_red and b_red:
                        j = idx[("B", y, b_out)]
                        add(0, j, w_xy)
                        for a2 in ao[:-1]:
                            add(idx[("A", x, a2)], j, -w_xy)
                    elif a_red and not b_red:
                        i = idx[("A", x, a)]
                        add(0, i, w_xy)
                        for b2 in bo[:-1]:
                            add(i, idx[("B", y, b2)], -w_xy)
                    else:
                        f[0, 0] += w_xy
                        for a2 in ao[:-1]:
                            add(0, idx[("A", x, a2)], -w_xy)
                        for b2 in bo[:-1]:
                            add(0, idx[("B", y, b2)], -w_xy)
                        for a2 in ao[:-1]:
                            for b2 in bo[:-1]:
                                add(idx[("A", x, a2)], idx[("B", y, b2)], w_xy)

    constraints = [(sp.coo_matrix(([1.0], ([0], [0])), shape=(n_ops, n_ops)), 1.0)]
    for u in range(1, n_ops):
        a_mat = sp.coo_matrix(
            ([1.0, -0.5, -0.5], ([u, 0, u], [u, u, 0])), shape=(n_ops, n_ops)
        )
        constraints.append((a_mat, 0.0))
    ortho_groups = [[idx[("A", x, a)] for a in ao[:-1]] for x in ax]
    ortho_groups += [[idx[("B", y, b)] for b in bo[:-1]] for y in bx]
    for group in ortho_groups:
        for i_pos, u in enumerate(group):
            for v in group[i_pos + 1 :]:
                a_mat = sp.coo_matrix(
                    ([0.5, 0.5], ([u, v], [v, u])), shape=(n_ops, n_ops)
                )
                constraints.append((a_mat, 0.0))

    problem = SdpProblem(dim=n_ops, objective=f, constraints=constraints)
    # Penalty start tuned to the moment-matrix scale; halves iteration counts
    # versus rho0=1 on the larger game relaxations.
    sol = solve(
        problem,
        tol=tol,
        max_iter=max_iter,
        rho0=1.0 / np.sqrt(n_ops),
        adapt_ratio=5.0,
        adapt_factor=1.5,
    )
    if sol.status == "infeasible":
        raise SolverError("moment-matrix relaxation reported infeasible")
    if full_output:
        return sol.value, sol
    return sol.value
