"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and measured runtimes.  Soft targets are printed but not asserted.
"""

import math
import time

import numpy as np
import pytest

from xorlab import games, protocols, sdp, sequential
from xorlab.encodings import (
    canonical_bbbw_encoding,
    hides_xor,
    learn_value_prob,
    random_encoding,
    random_high_c_encoding,
    random_xor_hiding_encoding,
    theorem1_check,
    weighted_decoding_bound,
)
from xorlab.quantum import density, sample_haar_projector, sample_haar_state

COS2_PI8 = math.cos(math.pi / 8.0) ** 2
PAPER_SDP_ROW = {2: 0.780, 3: 0.743, 4: 0.725, 5: 0.716}


def _line(num: int, ok: bool, text: str, soft: bool = False) -> None:
    tag = "soft " if soft else ""
    print(f"[criterion {num}] {tag}{'PASS' if ok else 'FAIL'}: {text}")


class TestCriterion1:
    def test_tsirelson_reproduction(self):
        t0 = time.time()
        _, ss = games.seesaw(games.make_chsh(), 2, restarts=20, iters=50, rng=np.random.default_rng(1))
        npa = sdp.npa1_value(games.make_chsh(), tol=1e-6)
        canonical = games.evaluate(games.make_chsh(), games.canonical_chsh_strategy())
        elapsed = time.time() - t0
        ok = ss >= 0.8535 and 0.8535 <= npa <= 0.8537 and abs(canonical - COS2_PI8) <= 1e-12
        _line(1, ok, f"seesaw={ss:.6f} npa1={npa:.6f} canonical={canonical:.15f} ({elapsed:.0f}s)")
        assert ss >= 0.8535
        assert 0.8535 <= npa <= 0.8537
        assert canonical == pytest.approx(COS2_PI8, abs=1e-12)
        assert elapsed < 60.0


class TestCriterion2:
    def test_sandwich_sweep(self):
        t0 = time.time()
        records, summary = sequential.sweep_sandwich([2, 4, 8], 10_000, seed=20260810, keep_failures=True)
        gamma_viol = sum(1 for r in records if abs(r["gamma"]) > r["gamma_bound"] + 1e-9)

        # Equal-measurement saturation: gamma hits +bound exactly.
        rng = np.random.default_rng(99)
        sat_viol = 0
        checked = 0
        while checked < 100:
            dim = int(rng.choice([2, 4, 8]))
            psi = sample_haar_state(dim, rng)
            c = sample_haar_projector(dim, int(rng.integers(1, dim)), rng)
            if np.linalg.norm(c @ psi) ** 2 < 0.5:
                continue
            checked += 1
            rep = sequential.gamma(psi, c, c)
            if not rep.saturated_positive:
                sat_viol += 1
        elapsed = time.time() - t0
        ok = summary["violations"] == 0 and gamma_viol == 0 and sat_viol == 0
        _line(
            2,
            ok,
            f"{summary['accepted']} accepted samples, sandwich violations={summary['violations']}, "
            f"gamma violations={gamma_viol}, saturation misses={sat_viol} ({elapsed:.0f}s)",
        )
        assert summary["accepted"] == 30_000
        assert summary["violations"] == 0
        assert gamma_viol == 0
        assert sat_viol == 0
        assert elapsed < 300.0


class TestCriterion3:
    def test_bit_learning_relation(self):
        t0 = time.time()
        rng = np.random.default_rng(3)
        worst = 1.0
        for i in range(200):
            dim = int(rng.integers(2, 9))
            enc = random_encoding(1, dim, rng, mixed=bool(i % 3 == 0))
            rep = theorem1_check(enc)
            slack = rep.p_xor_optimal - (2.0 * rep.c - 1.0) ** 2
            worst = min(worst, slack)
        elapsed = time.time() - t0
        _line(3, worst >= -1e-9, f"bit sweep: 200 encodings, worst slack {worst:.3e} ({elapsed:.0f}s)")
        assert worst >= -1e-9

    def test_string_pair_relation(self):
        t0 = time.time()
        rng = np.random.default_rng(4)
        counts = {2: 30, 3: 20}
        worst = 1.0
        tested = 0
        for n, want in counts.items():
            got = 0
            while got < want:
                enc = random_high_c_encoding(n, rng)
                rep = theorem1_check(enc, tol=1e-7)
                if not rep.in_string_regime:
                    continue
                got += 1
                tested += 1
                slack = rep.p_pair - rep.c * (2.0 * rep.c - 1.0) ** 2
                worst = min(worst, slack)
                assert rep.p_xor_optimal >= rep.p_pair - 1e-9
        elapsed = time.time() - t0
        _line(3, worst >= -1e-9, f"string sweep: {tested} encodings (n=2,3), worst slack {worst:.3e} ({elapsed:.0f}s)")
        assert worst >= -1e-9
        assert elapsed < 600.0


class TestCriterion4:
    def test_analytic_table_rows(self):
        from xorlab.cli import round3

        ours = [games.upper_bound_chsh_n(n) for n in range(1, 6)]
        lower = [
            games.evaluate(games.make_chsh_n(n), games.guessing_strategy_chsh_n(n))
            for n in range(1, 6)
        ]
        ours_3dp = [round3(v) for v in ours]
        lower_3dp = [round3(v) for v in lower]
        ok = ours_3dp == ["1.000", "0.854", "0.750", "0.677", "0.625"] and lower_3dp == [
            "0.750",
            "0.625",
            "0.563",
            "0.531",
            "0.516",
        ]
        _line(4, ok, f"our bound row {ours_3dp}, lower bound row {lower_3dp}")
        print(
            "[criterion 4] note: reference table prints the truncations 0.562/0.531/0.515/0.676 "
            "where the exact values round to 0.563/0.531/0.516/0.677; comparison uses rounding."
        )
        assert ours_3dp == ["1.000", "0.854", "0.750", "0.677", "0.625"]
        assert lower_3dp == ["0.750", "0.625", "0.563", "0.531", "0.516"]


class TestCriterion5:
    def test_solver_rows(self):
        t0 = time.time()
        rng = np.random.default_rng(5)
        budgets = {2: (15, 30), 3: (8, 25), 4: (2, 8), 5: (2, 5)}
        report = {}
        for n in range(2, 6):
            game = games.make_chsh_n(n)
            restarts, iters = budgets[n]
            _, ss = games.seesaw(game, 2 ** n, restarts=restarts, iters=iters, rng=rng.spawn(1)[0])
            npa, sol = sdp.npa1_value(game, tol=1e-5, max_iter=40_000, full_output=True)
            report[n] = (ss, npa, sol.status)
            assert ss <= npa + 1e-4, f"n={n}: seesaw {ss} above relaxation {npa}"
            assert npa <= 1.0 + 1e-6
            assert npa >= games.conjectured_value_chsh_n(n) - 1e-3
        elapsed = time.time() - t0
        _line(
            5,
            True,
            "ordering seesaw <= npa1 <= 1 and npa1 >= conjectured - 1e-3 for n=2..5 "
            + " ".join(f"n={n}:(ss={v[0]:.3f},npa={v[1]:.3f},{v[2]})" for n, v in report.items())
            + f" ({elapsed:.0f}s)",
        )
        for n in range(2, 6):
            close = abs(report[n][1] - PAPER_SDP_ROW[n]) <= 5e-3
            _line(5, close, f"stretch: npa1(n={n})={report[n][1]:.4f} vs reference {PAPER_SDP_ROW[n]}", soft=True)
        for n in (2, 3):
            conj = games.conjectured_value_chsh_n(n)
            close = report[n][0] >= conj - 1e-3
            _line(5, close, f"seesaw(n={n})={report[n][0]:.4f} vs conjectured {conj:.4f}", soft=True)


class TestCriterion6:
    def test_weighted_chsh(self):
        t0 = time.time()
        rng = np.random.default_rng(6)
        results = {}
        for q in (0.25, 0.5, 0.75):
            target = weighted_decoding_bound(q)
            _, val = games.seesaw(
                games.make_weighted_chsh(q), 2, restarts=12, iters=60, rng=rng.spawn(1)[0]
            )
            results[q] = (val, target)
            assert val <= target + 1e-6, f"q={q}: seesaw {val} exceeds bound {target}"
            assert val >= target - 1e-3, f"q={q}: seesaw {val} too far below {target}"
        elapsed = time.time() - t0
        _line(
            6,
            True,
            " ".join(f"q={q}: {v[0]:.6f} vs bound {v[1]:.6f}" for q, v in results.items())
            + f" ({elapsed:.0f}s)",
        )


class TestCriterion7:
    def test_reduction_round_trips(self):
        t0 = time.time()
        rng = np.random.default_rng(7)
        worst_ot = worst_rt = 0.0
        for i in range(20):
            n = 1 if i < 14 else 2
            enc = random_xor_hiding_encoding(n, rng)
            rep = theorem1_check(enc)
            assert hides_xor(enc, 1e-8), "reduction output must hide the XOR"

            ot = protocols.ot_from_encoding(enc)
            worst_ot = max(worst_ot, abs(ot.honest_p - rep.c))

            strat = games.strategy_from_encoding(enc)
            value = games.evaluate(games.make_chsh_n(n), strat)
            back = games.encoding_from_strategy(strat, games.make_chsh_n(n))
            c_back = theorem1_check(back).c
            worst_rt = max(worst_rt, abs(value - rep.c), abs(c_back - rep.c))
        elapsed = time.time() - t0
        ok = worst_ot <= 1e-9 and worst_rt <= 1e-6
        _line(
            7,
            ok,
            f"20 encodings: max |honest_p - c| = {worst_ot:.2e}, max round-trip drift = {worst_rt:.2e} ({elapsed:.0f}s)",
        )
        assert worst_ot <= 1e-9
        assert worst_rt <= 1e-6


class TestCriterion8:
    def test_ot_bounds(self):
        t0 = time.time()
        bit = protocols.ot_tradeoff_bound("bit")
        string = protocols.ot_tradeoff_bound("string")
        assert bit["bound"] == pytest.approx(0.599, abs=5e-4)
        assert string["bound"] == pytest.approx(0.5852, abs=5e-4)

        rng = np.random.default_rng(8)
        instances = [canonical_bbbw_encoding()] + [random_xor_hiding_encoding(1, rng) for _ in range(5)]
        for enc in instances:
            ot = protocols.ot_from_encoding(enc)
            cheats = protocols.ot_cheat_probs(ot)
            assert cheats.theorem2_ok
            cf = protocols.coinflip_from_ot(ot)
            assert cf.kitaev_ok

        assert protocols.secure_ot_ceiling(1, "string") == pytest.approx(COS2_PI8, abs=1e-12)
        assert protocols.secure_ot_ceiling(1, "tensor") == pytest.approx(COS2_PI8, abs=1e-12)
        for n in range(1, 6):
            assert protocols.secure_ot_ceiling(n, "tensor") == COS2_PI8 ** n
        elapsed = time.time() - t0
        _line(
            8,
            True,
            f"bit bound {bit['bound']:.5f}, string bound {string['bound']:.5f}, "
            f"inequalities hold on 6 instances, ceilings exact ({elapsed:.0f}s)",
        )


class TestCriterion9:
    def test_oracle_equivalences(self):
        t0 = time.time()
        rng = np.random.default_rng(9)
        worst = 0.0
        for _ in range(50):
            dim = int(rng.integers(2, 7))
            mats = []
            for _ in range(2):
                a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
                m = a @ a.conj().T
                mats.append(m / np.trace(m).real)
            q = float(rng.uniform(0.1, 0.9))
            hv = sdp.helstrom_value(mats[0], mats[1], q, 1.0 - q)
            dv = sdp.discrimination(mats, [q, 1.0 - q], tol=1e-8)
            worst = max(worst, abs(hv - dv))

        double = games.tensor_strategy(games.canonical_chsh_strategy(), games.canonical_chsh_strategy())
        tensor_val = games.evaluate(games.make_chsh_tensor(2), double)
        tensor_err = abs(tensor_val - COS2_PI8 ** 2)
        elapsed = time.time() - t0
        ok = worst <= 1e-6 and tensor_err <= 1e-12
        _line(
            9,
            ok,
            f"50 binary SDP-vs-closed-form deviations <= {worst:.2e}; "
            f"parallel pair value error {tensor_err:.2e} ({elapsed:.0f}s)",
        )
        assert worst <= 1e-6
        assert tensor_err <= 1e-12
