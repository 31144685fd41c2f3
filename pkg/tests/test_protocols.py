"""Oblivious transfer, the coin-flipping reduction, and the analytic bounds."""

import math

import numpy as np
import pytest

from xorlab.encodings import (
    XorEncoding,
    canonical_bbbw_encoding,
    random_high_c_encoding,
    random_xor_hiding_encoding,
    theorem1_check,
)
from xorlab.protocols import (
    CheatReport,
    OtInstance,
    TradeoffCurve,
    bc_from_ot,
    bob_success_by_index,
    coinflip_from_ot,
    ot_cheat_probs,
    ot_from_encoding,
    ot_tradeoff_bound,
    output_distribution,
    secure_ot_ceiling,
)
from xorlab.quantum import density

COS2_PI8 = math.cos(math.pi / 8.0) ** 2


def classical_encoding():
    states = {}
    kets = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    for x0 in (0, 1):
        for x1 in (0, 1):
            states[(x0, x1)] = density(np.kron(kets[x0], kets[x1]))
    return XorEncoding(n=1, prior={k: 0.25 for k in states}, states=states)


def flat_encoding():
    states = {(x0, x1): np.eye(2, dtype=complex) / 2 for x0 in (0, 1) for x1 in (0, 1)}
    return XorEncoding(n=1, prior={k: 0.25 for k in states}, states=states)


def perfect_insecure_ot():
    """honest_p = 1 and Bob can learn everything (classical registers)."""
    return OtInstance(
        n=1, encoding=classical_encoding(), masking="uniform", honest_p=1.0, mode="bit"
    )


class TestOtFromEncoding:
    def test_bbbw_honest_probability(self):
        ot = ot_from_encoding(canonical_bbbw_encoding())
        assert ot.honest_p == pytest.approx(COS2_PI8, abs=1e-9)
        assert ot.mode == "bit"

    def test_classical_encoding_rejected(self):
        with pytest.raises(ValueError, match="hide"):
            ot_from_encoding(classical_encoding())

    def test_bob_success_equal_per_index(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            enc = random_xor_hiding_encoding(1, rng)
            s0, s1 = bob_success_by_index(enc)
            assert s0 == pytest.approx(s1, abs=1e-9)

    def test_outputs_uniform(self):
        ot = ot_from_encoding(canonical_bbbw_encoding())
        dist = output_distribution(ot)
        assert len(dist) == 4
        for p in dist.values():
            assert p == pytest.approx(0.25, abs=1e-12)

    def test_honest_p_matches_encoding_c(self):
        rng = np.random.default_rng(1)
        enc = random_xor_hiding_encoding(1, rng)
        ot = ot_from_encoding(enc)
        assert ot.honest_p == pytest.approx(theorem1_check(enc).c, abs=1e-9)


class TestCheatProbs:
    def test_bbbw_is_tight(self):
        ot = ot_from_encoding(canonical_bbbw_encoding())
        cheats = ot_cheat_probs(ot)
        assert cheats.a_ot == 0.5
        assert cheats.b_ot == pytest.approx(0.5, abs=1e-9)
        ceiling = cheats.a_ot * (math.sqrt(cheats.b_ot) + 1.0)
        assert ceiling == pytest.approx(COS2_PI8, abs=1e-9)
        assert cheats.theorem2_ok

    def test_flat_encoding_has_slack(self):
        ot = ot_from_encoding(flat_encoding())
        assert ot.honest_p == pytest.approx(0.5, abs=1e-9)
        cheats = ot_cheat_probs(ot)
        assert cheats.b_ot == pytest.approx(0.5, abs=1e-9)
        assert ot.honest_p < cheats.a_ot * (math.sqrt(cheats.b_ot) + 1.0) - 0.1

    def test_string_ot_pair_bound(self):
        rng = np.random.default_rng(2)
        enc = random_xor_hiding_encoding(2, rng)
        ot = ot_from_encoding(enc)
        cheats = ot_cheat_probs(ot)
        rep = theorem1_check(enc)
        if rep.in_string_regime:
            assert cheats.b_pair >= rep.c * (2 * rep.c - 1) ** 2 - 1e-9
        assert cheats.theorem2_ok

    def test_xor_stays_hidden_after_masking(self):
        rng = np.random.default_rng(3)
        enc = random_xor_hiding_encoding(1, rng)
        cheats = ot_cheat_probs(ot_from_encoding(enc))
        assert cheats.b_ot <= 0.5 + 1e-8


class TestCoinFlip:
    def test_bbbw_numbers(self):
        ot = ot_from_encoding(canonical_bbbw_encoding())
        cf = coinflip_from_ot(ot)
        assert cf.a_cf == 0.5
        assert cf.b_cf == pytest.approx((math.sqrt(0.5) + 1.0) / 2.0, abs=1e-9)
        assert cf.a_cf * cf.b_cf >= ot.honest_p / 2.0 - 1e-9
        assert cf.kitaev_ok

    def test_perfect_insecure_corner(self):
        cf = coinflip_from_ot(perfect_insecure_ot())
        assert cf.b_cf == pytest.approx(1.0, abs=1e-9)
        assert cf.honest_abort == pytest.approx(0.0, abs=1e-12)
        assert cf.kitaev_ok

    def test_flat_encoding_abort_half(self):
        cf = coinflip_from_ot(ot_from_encoding(flat_encoding()))
        assert cf.honest_abort == pytest.approx(0.5, abs=1e-9)
        assert cf.kitaev_ok

    def test_string_mode_rejected(self):
        rng = np.random.default_rng(4)
        ot = ot_from_encoding(random_xor_hiding_encoding(2, rng))
        with pytest.raises(ValueError):
            coinflip_from_ot(ot)


class TestTradeoffBound:
    def test_bit_and_string_targets(self):
        bit = ot_tradeoff_bound("bit")
        string = ot_tradeoff_bound("string")
        assert bit["bound"] == pytest.approx(0.599, abs=5e-4)
        assert string["bound"] == pytest.approx(0.5852, abs=5e-4)

    def test_endpoints_force_interior_optimum(self):
        for mode in ("bit", "string"):
            from xorlab.protocols import _commitment_b_ot_floor

            assert max(0.5, _commitment_b_ot_floor(0.0, mode)) == pytest.approx(1.0, abs=1e-12)
            assert max(1.0, _commitment_b_ot_floor(1.0, mode)) == pytest.approx(1.0, abs=1e-12)
            t_star = ot_tradeoff_bound(mode)["t_star"]
            assert 0.0 < t_star < 1.0

    def test_grid_search_oracle_agreement(self):
        # Independent oracle: exhaustive grid at step 1e-5.
        from xorlab.protocols import _commitment_b_ot_floor

        for mode, expected in (("bit", 0.599), ("string", 0.5852)):
            ts = np.arange(0.0, 1.0 + 1e-9, 1e-5)
            values = np.maximum(0.5 + ts / 2.0, [_commitment_b_ot_floor(t, mode) for t in ts])
            grid_bound = float(values.min())
            assert ot_tradeoff_bound(mode)["bound"] == pytest.approx(grid_bound, abs=5e-5)
            assert grid_bound == pytest.approx(expected, abs=5e-4)

    def test_golden_section_oracle_agreement(self):
        # Second independent oracle: golden-section minimization of the max.
        from xorlab.protocols import _commitment_b_ot_floor

        phi = (math.sqrt(5.0) - 1.0) / 2.0
        for mode in ("bit", "string"):
            f = lambda t: max(0.5 + t / 2.0, _commitment_b_ot_floor(t, mode))
            a, b = 0.0, 1.0
            c, d = b - phi * (b - a), a + phi * (b - a)
            for _ in range(200):
                if f(c) < f(d):
                    b, d = d, c
                    c = b - phi * (b - a)
                else:
                    a, c = c, d
                    d = a + phi * (b - a)
            assert ot_tradeoff_bound(mode)["bound"] == pytest.approx(f((a + b) / 2), abs=5e-5)


class TestBitCommitment:
    def test_bbbw_alice_half(self):
        ot = ot_from_encoding(canonical_bbbw_encoding())
        rec = bc_from_ot(ot)
        assert rec["a_bc"] == 0.5

    def test_perfect_insecure_bob_one(self):
        rec = bc_from_ot(perfect_insecure_ot())
        assert rec["b_bc_bound"] == pytest.approx(1.0, abs=1e-9)

    def test_curve_at_optimizer(self):
        t_star = ot_tradeoff_bound("bit")["t_star"]
        curve = TradeoffCurve.at(t_star)
        assert curve.a_bc == pytest.approx(0.5 + t_star / 2.0, abs=1e-9)
        assert curve.b_bc == pytest.approx(
            (1.0 - (1.0 - 1.0 / math.sqrt(2.0)) * t_star) ** 2, abs=1e-12
        )


class TestCeilings:
    def test_n1_both_modes_optimal(self):
        assert secure_ot_ceiling(1, "string") == pytest.approx(COS2_PI8, abs=1e-12)
        assert secure_ot_ceiling(1, "tensor") == pytest.approx(COS2_PI8, abs=1e-12)

    def test_tensor_square(self):
        assert secure_ot_ceiling(2, "tensor") == pytest.approx(0.72855, abs=5e-6)

    def test_string_n3(self):
        assert secure_ot_ceiling(3, "string") == pytest.approx(0.75, abs=1e-12)

    def test_tensor_is_exact_power(self):
        for n in range(1, 6):
            assert secure_ot_ceiling(n, "tensor") == COS2_PI8 ** n

    def test_validation(self):
        with pytest.raises(ValueError):
            secure_ot_ceiling(0, "string")
        with pytest.raises(ValueError):
            secure_ot_ceiling(1, "banana")
