"""CHSH-family non-local games: models, evaluation, see-saw optimization,
analytic bounds, and the reductions between game strategies and XOR-hiding
encodings.

Inputs and outputs of the n-bit games are ints in [0, 2^n) read as bit
strings.  A strategy is a shared pure state plus one POVM per input per
player; Alice's registers always precede Bob's in the tensor order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import sdp, serialize
from .encodings import XorEncoding, hides_xor
from .quantum import (
    SplitSystem,
    check_povm,
    check_pure_state,
    mat_sqrt,
    purify,
    sample_haar_state,
    sample_haar_unitary,
    uhlmann_unitary,
)

COS2_PI8 = math.cos(math.pi / 8.0) ** 2


@dataclass(frozen=True)
class TwoPlayerGame:
    alice_inputs: tuple
    alice_input_probs: tuple
    bob_inputs: tuple
    bob_input_probs: tuple
    alice_outputs: tuple
    bob_outputs: tuple
    predicate: Callable
    name: str = ""
    default_local_dim: int = 2

    def __post_init__(self):
        for probs in (self.alice_input_probs, self.bob_input_probs):
            if abs(sum(probs) - 1.0) > 1e-12:
                raise ValueError("input distribution must sum to 1")

    def win_table(self) -> dict:
        return {
            (x, y, a, b): bool(self.predicate(x, y, a, b))
            for x in self.alice_inputs
            for y in self.bob_inputs
            for a in self.alice_outputs
            for b in self.bob_outputs
        }

    def same_structure(self, other: "TwoPlayerGame") -> bool:
        """Structural equality: same labels, distributions and win table."""
        return (
            self.alice_inputs == other.alice_inputs
            and self.bob_inputs == other.bob_inputs
            and self.alice_outputs == other.alice_outputs
            and self.bob_outputs == other.bob_outputs
            and np.allclose(self.alice_input_probs, other.alice_input_probs, atol=1e-15)
            and np.allclose(self.bob_input_probs, other.bob_input_probs, atol=1e-15)
            and self.win_table() == other.win_table()
        )


@dataclass
class QuantumStrategy:
    """Shared pure state plus per-input POVMs for both players."""

    state: np.ndarray
    dim_alice: int
    dim_bob: int
    alice_meas: dict
    bob_meas: dict
    alice_outcomes: tuple
    bob_outcomes: tuple
    split: SplitSystem | None = None

    def state_matrix(self) -> np.ndarray:
        return np.asarray(self.state, dtype=complex).reshape(self.dim_alice, self.dim_bob)

    def validate(self) -> None:
        check_pure_state(self.state, atol=1e-9)
        if len(self.state) != self.dim_alice * self.dim_bob:
            raise ValueError("state length does not match dim_alice * dim_bob")
        for meas, count in ((self.alice_meas, len(self.alice_outcomes)), (self.bob_meas, len(self.bob_outcomes))):
            for povm in meas.values():
                if len(povm) != count:
                    raise ValueError("POVM outcome count does not match outcome labels")
                check_povm(povm)

    def to_json(self) -> dict:
        split = self.split or SplitSystem((self.dim_alice, self.dim_bob), alice=(0,), bob=(1,))
        return {
            "schema": serialize.SCHEMA,
            "state": serialize.state_to_json(self.state),
            "registers": {
                "dims": list(split.dims),
                "alice": list(split.alice),
                "bob": list(split.bob),
            },
            "alice": {
                str(x): serialize.povm_to_json(self.alice_outcomes, povm)
                for x, povm in self.alice_meas.items()
            },
            "bob": {
                str(y): serialize.povm_to_json(self.bob_outcomes, povm)
                for y, povm in self.bob_meas.items()
            },
        }


# ---------------------------------------------------------------------------
# Game constructors
# ---------------------------------------------------------------------------


def make_chsh_n(n: int) -> TwoPlayerGame:
    """Alice gets an n-bit x, Bob a bit y; win iff a XOR b == y*x bitwise."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = 1 << n
    xs = tuple(range(m))
    return TwoPlayerGame(
        alice_inputs=xs,
        alice_input_probs=(1.0 / m,) * m,
        bob_inputs=(0, 1),
        bob_input_probs=(0.5, 0.5),
        alice_outputs=xs,
        bob_outputs=xs,
        predicate=lambda x, y, a, b: (a ^ b) == (x if y else 0),
        name=f"chsh_{n}",
        default_local_dim=m,
    )


def make_chsh() -> TwoPlayerGame:
    return make_chsh_n(1)


def make_chsh_tensor(n: int) -> TwoPlayerGame:
    """n independent CHSH games in parallel; win iff every coordinate wins."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = 1 << n
    xs = tuple(range(m))
    return TwoPlayerGame(
        alice_inputs=xs,
        alice_input_probs=(1.0 / m,) * m,
        bob_inputs=xs,
        bob_input_probs=(1.0 / m,) * m,
        alice_outputs=xs,
        bob_outputs=xs,
        predicate=lambda x, y, a, b: (a ^ b) == (x & y),
        name=f"chsh_tensor_{n}",
        default_local_dim=m,
    )


def make_weighted_chsh(q: float) -> TwoPlayerGame:
    """CHSH with Bob's input biased: y=0 with probability q."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    return TwoPlayerGame(
        alice_inputs=(0, 1),
        alice_input_probs=(0.5, 0.5),
        bob_inputs=(0, 1),
        bob_input_probs=(q, 1.0 - q),
        alice_outputs=(0, 1),
        bob_outputs=(0, 1),
        predicate=lambda x, y, a, b: (a ^ b) == (x & y),
        name=f"weighted_chsh_{q}",
        default_local_dim=2,
    )


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _check_labels(game: TwoPlayerGame, strat: QuantumStrategy) -> None:
    if tuple(strat.alice_outcomes) != tuple(game.alice_outputs) or tuple(
        strat.bob_outcomes
    ) != tuple(game.bob_outputs):
        raise ValueError("strategy outcome labels do not match the game")
    if set(strat.alice_meas) != set(game.alice_inputs) or set(strat.bob_meas) != set(
        game.bob_inputs
    ):
        raise ValueError("strategy inputs do not match the game")


def evaluate(game: TwoPlayerGame, strat: QuantumStrategy) -> float:
    """Exact win probability of a strategy."""
    _check_labels(game, strat)
    m = strat.state_matrix()
    win = 0.0
    for x, px in zip(game.alice_inputs, game.alice_input_probs):
        for ai, _a in enumerate(game.alice_outputs):
            t = m.conj().T @ (np.asarray(strat.alice_meas[x][ai], dtype=complex) @ m)
            for y, py in zip(game.bob_inputs, game.bob_input_probs):
                for bi, _b in enumerate(game.bob_outputs):
                    if game.predicate(x, y, _a, _b):
                        win += px * py * np.sum(t * strat.bob_meas[y][bi]).real
    return float(win)


def bob_marginal(game: TwoPlayerGame, strat: QuantumStrategy, x, y) -> np.ndarray:
    """Bob's output distribution for input y, conditioned on Alice input x."""
    m = strat.state_matrix()
    rho_b = np.zeros((strat.dim_bob, strat.dim_bob), dtype=complex)
    for ai in range(len(strat.alice_outcomes)):
        rho_b += m.conj().T @ (np.asarray(strat.alice_meas[x][ai], dtype=complex) @ m)
    return np.array([np.sum(rho_b * strat.bob_meas[y][bi]).real for bi in range(len(strat.bob_outcomes))])


def non_signaling_gap(game: TwoPlayerGame, strat: QuantumStrategy) -> float:
    """Largest deviation of either player's marginals across the other's inputs."""
    gap = 0.0
    for y in game.bob_inputs:
        margs = [bob_marginal(game, strat, x, y) for x in game.alice_inputs]
        for mg in margs[1:]:
            gap = max(gap, float(np.max(np.abs(mg - margs[0]))))
    # Alice side: swap roles by transposing the state matrix.
    m = strat.state_matrix()
    for x in game.alice_inputs:
        margs = []
        for y in game.bob_inputs:
            rho_a = np.zeros((strat.dim_alice, strat.dim_alice), dtype=complex)
            for bi in range(len(strat.bob_outcomes)):
                rho_a += m @ np.asarray(strat.bob_meas[y][bi], dtype=complex).T @ m.conj().T
            margs.append(
                np.array(
                    [np.trace(np.asarray(strat.alice_meas[x][ai]) @ rho_a).real for ai in range(len(strat.alice_outcomes))]
                )
            )
        for mg in margs[1:]:
            gap = max(gap, float(np.max(np.abs(mg - margs[0]))))
    return gap


# ---------------------------------------------------------------------------
# Reference strategies and analytic values
# ---------------------------------------------------------------------------


def _basis_povm(theta: float):
    v0 = np.array([math.cos(theta), math.sin(theta)], dtype=complex)
    v1 = np.array([-math.sin(theta), math.cos(theta)], dtype=complex)
    return [np.outer(v0, v0.conj()), np.outer(v1, v1.conj())]


def canonical_chsh_strategy() -> QuantumStrategy:
    """Bell state; Alice measures the Z then X bases, Bob the two diagonal
    bases rotated by pi/8.  Wins CHSH with probability cos^2(pi/8)."""
    bell = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / math.sqrt(2.0)
    return QuantumStrategy(
        state=bell,
        dim_alice=2,
        dim_bob=2,
        alice_meas={0: _basis_povm(0.0), 1: _basis_povm(math.pi / 4.0)},
        bob_meas={0: _basis_povm(math.pi / 8.0), 1: _basis_povm(-math.pi / 8.0)},
        alice_outcomes=(0, 1),
        bob_outcomes=(0, 1),
        split=SplitSystem((2, 2), alice=(0,), bob=(1,)),
    )


def upper_bound_chsh_n(n: int) -> float:
    """Analytic ceiling 1/2 + 2^(-(n+1)/2) on the n-bit game value."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 0.5 + 2.0 ** (-(n + 1) / 2.0)


def conjectured_value_chsh_n(n: int) -> float:
    """Conjectured exact value 1/2 + 2^(-n/2)/2; reference only, never used
    as an assertion oracle."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 0.5 + 0.5 * 2.0 ** (-n / 2.0)


def parallel_repetition_value(n: int) -> float:
    """Exact value cos^2(pi/8)^n of n CHSH games played in parallel."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return COS2_PI8 ** n


def guessing_value_chsh_n(n: int) -> float:
    """Value 1/2 + 2^-(n+1) of the best output-guessing strategy."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 0.5 + 2.0 ** (-(n + 1))


def guessing_strategy_chsh_n(n: int) -> QuantumStrategy:
    """Best deterministic strategy, found by enumerating the constant
    responses: Alice repeats a fixed string, Bob echoes it on y=0 and makes a
    fixed guess on y=1."""
    m = 1 << n
    game = make_chsh_n(n)

    def classical_value(r: int, g: int) -> float:
        hits = sum(1 for x in range(m) if (r ^ g) == x)
        return 0.5 + 0.5 * hits / m

    best = max(((classical_value(r, g), -r, -g) for r in range(m) for g in range(m)))
    r, g = -best[1], -best[2]

    one = np.array([[1.0]], dtype=complex)
    zero = np.array([[0.0]], dtype=complex)

    def indicator(label: int):
        return [one if a == label else zero for a in range(m)]

    return QuantumStrategy(
        state=np.array([1.0], dtype=complex),
        dim_alice=1,
        dim_bob=1,
        alice_meas={x: indicator(r) for x in game.alice_inputs},
        bob_meas={0: indicator(r), 1: indicator(g)},
        alice_outcomes=game.alice_outputs,
        bob_outcomes=game.bob_outputs,
    )


def random_strategy(game: TwoPlayerGame, local_dim: int, rng: np.random.Generator) -> QuantumStrategy:
    """Haar state plus random projective measurements (basis vectors dealt
    round-robin to outcomes when there are fewer dimensions than outcomes)."""

    def random_povm(n_out: int):
        u = sample_haar_unitary(local_dim, rng)
        povm = [np.zeros((local_dim, local_dim), dtype=complex) for _ in range(n_out)]
        for col in range(local_dim):
            v = u[:, col]
            povm[col % n_out] += np.outer(v, v.conj())
        return povm

    return QuantumStrategy(
        state=sample_haar_state(local_dim * local_dim, rng),
        dim_alice=local_dim,
        dim_bob=local_dim,
        alice_meas={x: random_povm(len(game.alice_outputs)) for x in game.alice_inputs},
        bob_meas={y: random_povm(len(game.bob_outputs)) for y in game.bob_inputs},
        alice_outcomes=tuple(game.alice_outputs),
        bob_outcomes=tuple(game.bob_outputs),
    )


def tensor_strategy(first: QuantumStrategy, second: QuantumStrategy) -> QuantumStrategy:
    """Product of two strategies; combined labels are (first << bits) | second
    for int labels, matching the bitwise predicates of the product games."""
    bits2 = max(len(second.alice_outcomes), len(second.bob_outcomes)).bit_length() - 1
    m1 = first.state_matrix()
    m2 = second.state_matrix()
    state = np.kron(m1, m2).reshape(-1)

    def combine(meas1, meas2, n_out1, n_out2):
        out = {}
        for x1, povm1 in meas1.items():
            for x2, povm2 in meas2.items():
                key = (x1 << bits2) | x2
                out[key] = [
                    np.kron(povm1[a1], povm2[a2]) for a1 in range(n_out1) for a2 in range(n_out2)
                ]
        return out

    return QuantumStrategy(
        state=state,
        dim_alice=first.dim_alice * second.dim_alice,
        dim_bob=first.dim_bob * second.dim_bob,
        alice_meas=combine(first.alice_meas, second.alice_meas, len(first.alice_outcomes), len(second.alice_outcomes)),
        bob_meas=combine(first.bob_meas, second.bob_meas, len(first.bob_outcomes), len(second.bob_outcomes)),
        alice_outcomes=tuple(
            (a1 << bits2) | a2 for a1 in first.alice_outcomes for a2 in second.alice_outcomes
        ),
        bob_outcomes=tuple(
            (b1 << bits2) | b2 for b1 in first.bob_outcomes for b2 in second.bob_outcomes
        ),
    )


# ---------------------------------------------------------------------------
# See-saw optimization
# ---------------------------------------------------------------------------


def _greedy_projective(ops):
    """Projective measurement built greedily: repeatedly grab the largest
    remaining eigenvalue direction of any outcome operator."""
    d = ops[0].shape[0]
    povm = [np.zeros((d, d), dtype=complex) for _ in ops]
    basis = np.eye(d, dtype=complex)
    while basis.shape[1] > 0:
        best = None
        for k, w in enumerate(ops):
            sub = basis.conj().T @ w @ basis
            vals, vecs = np.linalg.eigh(sub)
            if best is None or vals[-1] > best[0] + 1e-15:
                best = (vals[-1], k, basis @ vecs[:, -1])
        _, k, v = best
        povm[k] += np.outer(v, v.conj())
        # Deflate the chosen direction out of the remaining subspace.
        proj = basis - np.outer(v, v.conj() @ basis)
        q, r = np.linalg.qr(proj)
        keep = np.abs(np.diagonal(r)) > 1e-10
        basis = q[:, keep]
    return povm


def _meas_objective(povm, ops) -> float:
    return float(np.real(sum(np.trace(e @ w) for e, w in zip(povm, ops))))


def _best_measurement(ops, old_povm, sdp_block_limit: int):
    """Monotone measurement update: best of the closed-form/greedy/PGM/SDP
    candidates, never worse than the incumbent POVM."""
    m = len(ops)
    d = ops[0].shape[0]
    candidates = [old_povm]
    if m == 2:
        w, v = np.linalg.eigh(ops[0] - ops[1])
        pos = w > -1e-14
        e0 = v[:, pos] @ v[:, pos].conj().T
        candidates.append([e0, np.eye(d) - e0])
    else:
        candidates.append(_greedy_projective(ops))
        shift = max(0.0, -min(float(np.linalg.eigvalsh(w).min()) for w in ops)) + 1e-9
        candidates.append(sdp.pretty_good_measurement([w + shift * np.eye(d) for w in ops]))
        if m * d <= sdp_block_limit:
            _, povm_sdp, _ = sdp.optimal_measurement(ops, tol=1e-7, max_iter=20_000)
            candidates.append(povm_sdp)
    scored = [(_meas_objective(p, ops), -i) for i, p in enumerate(candidates)]
    best_idx = -max(scored)[1]
    return candidates[best_idx]


def _bob_outcome_ops(game, strat):
    m = strat.state_matrix()
    t_ops = {
        (x, ai): m.conj().T @ (np.asarray(strat.alice_meas[x][ai], dtype=complex) @ m)
        for x in game.alice_inputs
        for ai in range(len(game.alice_outputs))
    }
    out = {}
    for y, py in zip(game.bob_inputs, game.bob_input_probs):
        ops = []
        for bi, b in enumerate(game.bob_outputs):
            w = np.zeros((strat.dim_bob, strat.dim_bob), dtype=complex)
            for x, px in zip(game.alice_inputs, game.alice_input_probs):
                for ai, a in enumerate(game.alice_outputs):
                    if game.predicate(x, y, a, b):
                        w += px * py * t_ops[(x, ai)]
            ops.append((w + w.conj().T) / 2.0)
        out[y] = ops
    return out


def _alice_outcome_ops(game, strat):
    m = strat.state_matrix()
    k_ops = {
        (y, bi): m @ np.asarray(strat.bob_meas[y][bi], dtype=complex).T @ m.conj().T
        for y in game.bob_inputs
        for bi in range(len(game.bob_outputs))
    }
    out = {}
    for x, px in zip(game.alice_inputs, game.alice_input_probs):
        ops = []
        for ai, a in enumerate(game.alice_outputs):
            w = np.zeros((strat.dim_alice, strat.dim_alice), dtype=complex)
            for y, py in zip(game.bob_inputs, game.bob_input_probs):
                for bi, b in enumerate(game.bob_outputs):
                    if game.predicate(x, y, a, b):
                        w += px * py * k_ops[(y, bi)]
            ops.append((w + w.conj().T) / 2.0)
        out[x] = ops
    return out


def _win_operator(game, strat) -> np.ndarray:
    da, db = strat.dim_alice, strat.dim_bob
    g = np.zeros((da * db, da * db), dtype=complex)
    for x, px in zip(game.alice_inputs, game.alice_input_probs):
        for ai, a in enumerate(game.alice_outputs):
            w = np.zeros((db, db), dtype=complex)
            for y, py in zip(game.bob_inputs, game.bob_input_probs):
                for bi, b in enumerate(game.bob_outputs):
                    if game.predicate(x, y, a, b):
                        w += px * py * np.asarray(strat.bob_meas[y][bi], dtype=complex)
            if np.any(w):
                g += np.kron(np.asarray(strat.alice_meas[x][ai], dtype=complex), w)
    return (g + g.conj().T) / 2.0


def _seesaw_round(game: TwoPlayerGame, strat: QuantumStrategy, sdp_block_limit: int) -> None:
    """One full round in place: Bob's POVMs, then Alice's, then the state.

    Bob's W operators depend only on the state and Alice's POVMs, so one
    batch per phase is exact; same for Alice's afterwards.  The state reset
    to the top eigenvector of the win operator maximizes its subproblem.
    """
    bob_ops = _bob_outcome_ops(game, strat)
    for y in game.bob_inputs:
        strat.bob_meas[y] = _best_measurement(bob_ops[y], strat.bob_meas[y], sdp_block_limit)
    alice_ops = _alice_outcome_ops(game, strat)
    for x in game.alice_inputs:
        strat.alice_meas[x] = _best_measurement(alice_ops[x], strat.alice_meas[x], sdp_block_limit)
    g = _win_operator(game, strat)
    _, vecs = np.linalg.eigh(g)
    strat.state = vecs[:, -1]


def seesaw(
    game: TwoPlayerGame,
    local_dim: int | None = None,
    restarts: int = 20,
    iters: int = 50,
    rng: np.random.Generator | None = None,
    sdp_block_limit: int = 0,
    polish_rounds: int = 3,
    polish_block_limit: int = 64,
    return_history: bool = False,
):
    """Alternating lower-bound optimization of a game value.

    Each round updates Bob's POVMs input by input, then Alice's, then resets
    the shared state to the top eigenvector of the win operator; every step
    either improves its subproblem or keeps the incumbent, so the value is
    non-decreasing within a restart.  The search phase uses the cheap
    closed-form/greedy/PGM updates; the best restart then gets
    ``polish_rounds`` extra rounds with the exact SDP measurement update
    (for blocks up to ``polish_block_limit``).  Returns the best
    (strategy, value) over restarts, ties resolved toward the earliest.
    """
    if local_dim is None:
        local_dim = game.default_local_dim
    if local_dim < 2:
        raise ValueError("local_dim must be >= 2")
    rng = rng if rng is not None else np.random.default_rng(0)
    children = rng.spawn(restarts)

    best_val = -1.0
    best_strat = None
    histories = []
    for sub in children:
        strat = random_strategy(game, local_dim, sub)
        history = [evaluate(game, strat)]
        for _ in range(iters):
            _seesaw_round(game, strat, sdp_block_limit)
            history.append(evaluate(game, strat))
            if history[-1] - history[-2] < 1e-11:
                break
        histories.append(history)
        if history[-1] > best_val + 1e-15:
            best_val = history[-1]
            best_strat = strat

    polish_history = [best_val]
    for _ in range(polish_rounds):
        _seesaw_round(game, best_strat, polish_block_limit)
        polish_history.append(evaluate(game, best_strat))
        if polish_history[-1] - polish_history[-2] < 1e-11:
            break
    best_val = max(best_val, polish_history[-1])
    histories.append(polish_history)
    if return_history:
        return best_strat, best_val, histories
    return best_strat, best_val


# ---------------------------------------------------------------------------
# Reductions between strategies and encodings
# ---------------------------------------------------------------------------


def _chsh_n_bits(game: TwoPlayerGame) -> int:
    m = len(game.alice_outputs)
    n = m.bit_length() - 1
    if (
        1 << n != m
        or tuple(game.alice_inputs) != tuple(range(m))
        or tuple(game.bob_inputs) != (0, 1)
        or tuple(game.bob_outputs) != tuple(range(m))
    ):
        raise ValueError("reduction is defined for the n-bit CHSH-family game")
    return n


def encoding_from_strategy(strat: QuantumStrategy, game: TwoPlayerGame) -> XorEncoding:
    """Bob's post-measurement ensemble, keyed by (x0, x1) = (a, x XOR a).

    Non-signaling makes the XOR-conditioned averages of the ensemble all
    equal to Bob's marginal state, so the result always hides the XOR.  Its
    average decoding probability equals the game value whenever Bob's POVMs
    are optimal decoders of the ensemble.
    """
    n = _chsh_n_bits(game)
    _check_labels(game, strat)
    m = strat.state_matrix()
    prior: dict[tuple[int, int], float] = {}
    states: dict[tuple[int, int], np.ndarray] = {}
    for x, px in zip(game.alice_inputs, game.alice_input_probs):
        for ai, a in enumerate(game.alice_outputs):
            root = mat_sqrt(strat.alice_meas[x][ai])
            v = root @ m
            weight = float(np.linalg.norm(v) ** 2)
            mass = px * weight
            if mass < 1e-14:
                continue  # purge zero-probability branches
            rho = (v.T @ v.conj()) / weight
            key = (a, x ^ a)
            prior[key] = mass
            states[key] = rho
    total = sum(prior.values())
    prior = {k: p / total for k, p in prior.items()}
    return XorEncoding(n=n, prior=prior, states=states)


def strategy_from_encoding(enc: XorEncoding, tol: float = 1e-8) -> QuantumStrategy:
    """Game strategy whose value equals the encoding's average decoding
    probability.

    Alice holds purifications of the ensemble and, on input x, steers the
    joint state with the local unitary carrying the x=0 branch to the x
    branch (it exists precisely because the XOR-conditioned marginals on
    Bob's side coincide); she then reads her outcome off the x0 register.
    Bob measures the optimal decoder for whichever string his input selects.
    """
    if not hides_xor(enc, tol):
        raise ValueError("encoding leaks the XOR; the steering unitaries do not exist")
    n = enc.n
    m = 1 << n
    d = enc.dim
    class_mass = {x: 0.0 for x in range(m)}
    for (x0, x1), p in enc.prior.items():
        class_mass[x0 ^ x1] += p
    if min(class_mass.values()) <= 0.0:
        raise ValueError("every XOR class needs positive prior mass")

    purified = {key: purify(enc.states[key]) for key in enc.pairs()}
    dims = (m, m, d, d)  # x0 register, x1 register, purification ancilla, Bob
    omega = {}
    for x in range(m):
        vec = np.zeros(m * m * d * d, dtype=complex)
        for (x0, x1) in enc.pairs():
            if x0 ^ x1 != x:
                continue
            coeff = math.sqrt(enc.prior[(x0, x1)] / class_mass[x])
            block = (x0 * m + x1) * d * d
            vec[block : block + d * d] = coeff * purified[(x0, x1)]
        omega[x] = vec

    dim_alice = m * m * d
    eye_rest = np.eye(m * d)
    alice_meas = {}
    for x in range(m):
        if x == 0:
            u_x = np.eye(dim_alice, dtype=complex)
        else:
            u_x = uhlmann_unitary(omega[0], omega[x], dims, act_on=(0, 1, 2), atol=max(tol, 1e-8))
        povm = []
        for a in range(m):
            p_a = np.zeros((m, m))
            p_a[a, a] = 1.0
            povm.append(u_x.conj().T @ np.kron(p_a, eye_rest) @ u_x)
        alice_meas[x] = povm

    def decoder(which: int):
        groups: dict[int, tuple[float, np.ndarray]] = {}
        for (x0, x1), p in enc.prior.items():
            label = x0 if which == 0 else x1
            mass, acc = groups.get(label, (0.0, np.zeros((d, d), dtype=complex)))
            groups[label] = (mass + p, acc + p * enc.states[(x0, x1)])
        labels = sorted(groups)
        masses = [groups[l][0] for l in labels]
        states = [groups[l][1] / groups[l][0] for l in labels]
        if len(labels) == 2:
            e0, e1 = sdp.helstrom_measurement(states[0], states[1], masses[0], masses[1])
            found = [e0, e1]
        elif len(labels) == 1:
            found = [np.eye(d, dtype=complex)]
        else:
            _, found = sdp.discrimination(states, masses, tol=1e-9, return_povm=True)
        povm = [np.zeros((d, d), dtype=complex) for _ in range(m)]
        for l, e in zip(labels, found):
            povm[l] = e
        # Any labels that never occur keep zero elements; park the slack on
        # the first occurring label to stay complete.
        slack = np.eye(d) - sum(povm)
        povm[labels[0]] = povm[labels[0]] + slack
        return povm

    return QuantumStrategy(
        state=omega[0],
        dim_alice=dim_alice,
        dim_bob=d,
        alice_meas=alice_meas,
        bob_meas={0: decoder(0), 1: decoder(1)},
        alice_outcomes=tuple(range(m)),
        bob_outcomes=tuple(range(m)),
        split=SplitSystem(dims, alice=(0, 1, 2), bob=(3,)),
    )
