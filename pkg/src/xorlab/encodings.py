"""Quantum encodings of string pairs and what can be learned from them.

An encoding assigns a prior and a density matrix to every pair
(x0, x1) of n-bit strings (stored as ints).  The central quantities are the
optimal probabilities of learning x0, x1, their XOR, or the full pair from
one copy, and the relations between them: the average decoding probability
c = (p0 + p1)/2 bounds the XOR learning probability from below via
(2c - 1)^2, with the string version c(2c-1)^2 for the pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import sdp, serialize
from .quantum import check_density, density, sample_haar_state, sample_haar_unitary

BIT_TOL = 1e-9


@dataclass
class XorEncoding:
    """Prior-weighted ensemble of states indexed by string pairs (x0, x1)."""

    n: int
    prior: dict[tuple[int, int], float]
    states: dict[tuple[int, int], np.ndarray]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if set(self.prior) != set(self.states):
            raise ValueError("prior and states must cover the same pairs")
        if not self.prior:
            raise ValueError("encoding is empty")
        lim = 1 << self.n
        for (x0, x1) in self.prior:
            if not (0 <= x0 < lim and 0 <= x1 < lim):
                raise ValueError(f"pair ({x0}, {x1}) out of range for n={self.n}")
        total = sum(self.prior.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"prior sums to {total}, not 1")
        dims = {m.shape[0] for m in self.states.values()}
        if len(dims) != 1:
            raise ValueError("all states must share one dimension")

    @property
    def dim(self) -> int:
        return next(iter(self.states.values())).shape[0]

    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self.prior)

    def validate_states(self) -> None:
        for rho in self.states.values():
            check_density(rho)

    def to_json(self) -> dict:
        entries = []
        for (x0, x1) in self.pairs():
            entries.append(
                {
                    "x0": format(x0, f"0{self.n}b"),
                    "x1": format(x1, f"0{self.n}b"),
                    "prior": float(self.prior[(x0, x1)]),
                    "state": serialize.matrix_to_json(self.states[(x0, x1)]),
                }
            )
        return {"schema": serialize.SCHEMA, "n": self.n, "entries": entries}

    @classmethod
    def from_json(cls, doc) -> "XorEncoding":
        serialize._check_schema(doc)
        n = int(doc["n"])
        prior, states = {}, {}
        for e in doc["entries"]:
            key = (int(e["x0"], 2), int(e["x1"], 2))
            prior[key] = float(e["prior"])
            states[key] = serialize.matrix_from_json(e["state"])
        return cls(n=n, prior=prior, states=states)


@dataclass(frozen=True)
class LearningReport:
    p0: float
    p1: float
    c: float
    p_xor_optimal: float
    p_xor_sequential: float | None
    p_pair: float
    theorem1_ok: bool
    in_string_regime: bool = True  # c >= 1/2, where the string bound is claimed


def _grouped(enc: XorEncoding, target: Callable):
    """Prior masses and normalized average states per target label."""
    groups: dict = {}
    for key in enc.pairs():
        label = target(*key)
        mass, acc = groups.get(label, (0.0, None))
        add = enc.prior[key] * enc.states[key]
        groups[label] = (mass + enc.prior[key], add if acc is None else acc + add)
    labels = sorted(groups, key=repr)
    masses = np.array([groups[l][0] for l in labels])
    states = [groups[l][1] / groups[l][0] if groups[l][0] > 0 else groups[l][1] for l in labels]
    return labels, masses, states


def learn_value_prob(enc: XorEncoding, target: Callable, tol: float = 1e-8) -> float:
    """Optimal probability of measuring the label ``target(x0, x1)``.

    Two labels use the closed-form Helstrom value; more use the
    discrimination SDP.
    """
    labels, masses, states = _grouped(enc, target)
    if len(labels) == 1:
        return 1.0
    if len(labels) == 2:
        return sdp.helstrom_value(states[0], states[1], masses[0], masses[1])
    return sdp.discrimination(states, masses, tol=tol)


def xor_label(x0: int, x1: int) -> int:
    return x0 ^ x1


def hides_xor(enc: XorEncoding, tol: float = 1e-6) -> bool:
    """True when the XOR cannot be learned better than prior guessing."""
    masses: dict[int, float] = {}
    for (x0, x1), p in enc.prior.items():
        masses[x0 ^ x1] = masses.get(x0 ^ x1, 0.0) + p
    baseline = max(masses.values())
    return learn_value_prob(enc, xor_label, tol=min(tol, 1e-8)) <= baseline + tol


def optimal_bit_measurements(enc: XorEncoding):
    """Helstrom projector pairs for the first and second bit (n = 1).

    A bit that only ever takes one value gets the trivial always-guess-it
    measurement.
    """
    if enc.n != 1:
        raise ValueError("bit measurements are defined for n = 1")
    eye = np.eye(enc.dim, dtype=complex)
    out = []
    for which in (0, 1):
        labels, masses, states = _grouped(enc, lambda x0, x1, w=which: (x0, x1)[w])
        if len(labels) == 1:
            pair = [eye, 0.0 * eye] if labels[0] == 0 else [0.0 * eye, eye]
        else:
            pair = sdp.helstrom_measurement(states[0], states[1], masses[0], masses[1])
        out.append(pair)
    return out[0], out[1]


def sequential_xor_strategy(enc: XorEncoding, p_meas=None, q_meas=None) -> float:
    """Success probability of guessing x0 XOR x1 by measuring both bits in
    sequence (second-bit measurement, then first), counting a success when
    both guesses are right or both are wrong.

    Defaults to the optimal Helstrom projectors for each bit.  Defined for
    the bit case only; the construction does not extend to strings.
    """
    if enc.n != 1:
        raise ValueError("the sequential construction is stated for bits (n = 1)")
    if p_meas is None or q_meas is None:
        p_default, q_default = optimal_bit_measurements(enc)
        p_meas = p_meas if p_meas is not None else p_default
        q_meas = q_meas if q_meas is not None else q_default
    p_ops = [np.asarray(m, dtype=complex) for m in p_meas]
    q_ops = [np.asarray(m, dtype=complex) for m in q_meas]

    def r_op(x0, x1):
        return q_ops[x1] @ p_ops[x0] @ q_ops[x1]

    total = 0.0
    for (x0, x1) in enc.pairs():
        rho = enc.states[(x0, x1)]
        both_right = np.trace(r_op(x0, x1) @ rho).real
        both_wrong = np.trace(r_op(1 - x0, 1 - x1) @ rho).real
        total += enc.prior[(x0, x1)] * (both_right + both_wrong)
    return float(total)


def theorem1_check(enc: XorEncoding, tol: float = 1e-8) -> LearningReport:
    """Learning probabilities of an encoding and the bounds relating them."""
    p0 = learn_value_prob(enc, lambda x0, x1: x0, tol=tol)
    p1 = learn_value_prob(enc, lambda x0, x1: x1, tol=tol)
    c = 0.5 * (p0 + p1)
    p_xor = learn_value_prob(enc, xor_label, tol=tol)
    p_pair = learn_value_prob(enc, lambda x0, x1: (x0, x1), tol=tol)
    p_seq = sequential_xor_strategy(enc) if enc.n == 1 else None

    ok = True
    if enc.n == 1:
        ok &= p_xor >= (2.0 * c - 1.0) ** 2 - BIT_TOL
    in_regime = c >= 0.5
    if in_regime:
        ok &= p_xor >= p_pair - BIT_TOL
        ok &= p_pair >= c * (2.0 * c - 1.0) ** 2 - BIT_TOL
    return LearningReport(
        p0=p0,
        p1=p1,
        c=c,
        p_xor_optimal=p_xor,
        p_xor_sequential=p_seq,
        p_pair=p_pair,
        theorem1_ok=bool(ok),
        in_string_regime=in_regime,
    )


def weighted_decoding_bound(q: float) -> float:
    """Ceiling on q*Pr[learn x0] + (1-q)*Pr[learn x1] for XOR-hiding encodings."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    return 0.5 + 0.5 * math.sqrt(q * q + (1.0 - q) * (1.0 - q))


def canonical_bbbw_encoding() -> XorEncoding:
    """The conjugate-coding ensemble {|0>,|1>,|+>,|->}: the image of the
    optimal CHSH strategy under the game-to-encoding reduction."""
    from . import games

    return games.encoding_from_strategy(games.canonical_chsh_strategy(), games.make_chsh())


def random_encoding(
    n: int,
    dim: int,
    rng: np.random.Generator,
    mixed: bool = False,
    concentration: float = 1.0,
) -> XorEncoding:
    """Raw random ensemble: Haar states and a Dirichlet-distributed prior."""
    keys = [(x0, x1) for x0 in range(1 << n) for x1 in range(1 << n)]
    weights = rng.dirichlet(np.full(len(keys), concentration))
    states = {}
    for key in keys:
        if mixed:
            big = sample_haar_state(dim * 2, rng).reshape(dim, 2)
            states[key] = big @ big.conj().T
        else:
            states[key] = density(sample_haar_state(dim, rng))
    prior = {k: float(w) for k, w in zip(keys, weights)}
    return XorEncoding(n=n, prior=prior, states=states)


def random_xor_hiding_encoding(n: int, rng: np.random.Generator, local_dim: int | None = None) -> XorEncoding:
    """Random encoding that hides the XOR exactly, built by pushing a random
    game strategy through the strategy-to-encoding reduction (hiding follows
    from non-signaling, so no rejection sampling is needed)."""
    from . import games

    game = games.make_chsh_n(n)
    strat = games.random_strategy(game, local_dim or 2 ** n, rng)
    return games.encoding_from_strategy(strat, game)


def _unitary_conjugate(enc: XorEncoding, u: np.ndarray) -> XorEncoding:
    states = {k: u @ rho @ u.conj().T for k, rho in enc.states.items()}
    return XorEncoding(n=enc.n, prior=dict(enc.prior), states=states)


def random_high_c_encoding(n: int, rng: np.random.Generator) -> XorEncoding:
    """Random string encoding with average decoding probability above 1/2.

    Draws from three families on dim 2^n: depolarized basis encodings of x0,
    mixtures of the x0- and x1-basis encodings, and depolarized tensor powers
    of the conjugate-coding qubit ensemble; all conjugated by one Haar
    unitary.  Raw Haar ensembles almost never reach c >= 1/2 for strings,
    which is the regime the pair-learning bound is stated in.
    """
    m = 1 << n
    kind = int(rng.integers(0, 3))
    keys = [(x0, x1) for x0 in range(m) for x1 in range(m)]
    eye = np.eye(m, dtype=complex) / m
    states: dict[tuple[int, int], np.ndarray] = {}
    if kind == 0:
        eps = float(rng.uniform(0.0, 0.5))
        for (x0, x1) in keys:
            basis = np.zeros((m, m), dtype=complex)
            basis[x0, x0] = 1.0
            states[(x0, x1)] = (1.0 - eps) * basis + eps * eye
    elif kind == 1:
        lam = float(rng.uniform(0.3, 0.7))
        eps = float(rng.uniform(0.0, 0.3))
        for (x0, x1) in keys:
            b0 = np.zeros((m, m), dtype=complex)
            b0[x0, x0] = 1.0
            b1 = np.zeros((m, m), dtype=complex)
            b1[x1, x1] = 1.0
            states[(x0, x1)] = (1.0 - eps) * (lam * b0 + (1.0 - lam) * b1) + eps * eye
    else:
        base = canonical_bbbw_encoding()
        eps = rng.uniform(0.0, 0.4, size=n)
        eye2 = np.eye(2, dtype=complex) / 2.0
        for (x0, x1) in keys:
            rho = np.array([[1.0]], dtype=complex)
            for i in range(n):
                bit = ((x0 >> (n - 1 - i)) & 1, (x1 >> (n - 1 - i)) & 1)
                factor = (1.0 - eps[i]) * base.states[bit] + eps[i] * eye2
                rho = np.kron(rho, factor)
            states[(x0, x1)] = rho
    prior = {k: float(w) for k, w in zip(keys, rng.dirichlet(np.full(len(keys), 5.0)))}
    enc = XorEncoding(n=n, prior=prior, states=states)
    return _unitary_conjugate(enc, sample_haar_unitary(m, rng))
