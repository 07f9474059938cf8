"""Acceptance suite: every criterion at its stated tolerance.

Each criterion prints one PASS/FAIL line (run with -s to see them all).
"""

import math
import random
import socket
import time

from scipy import stats

from carts import (
    CandidateTitle,
    Item,
    KeywordSet,
    ModuleJob,
    PipelineConfig,
    RelevanceScorer,
    ScriptedBackend,
    SimParams,
    arbitrate,
    brute_force_opt,
    coverage,
    feasible,
    iteration_bound,
    moderate,
    run_carts,
    verify_corollary,
    verify_theorem,
)
from carts.cli import main

SCORER = RelevanceScorer()


def _report(criterion: int, description: str, check):
    try:
        check()
    except BaseException:
        print(f"ACCEPTANCE {criterion} FAIL - {description}", flush=True)
        raise
    print(f"ACCEPTANCE {criterion} PASS - {description}", flush=True)


def test_criterion_1_theorem_verification():
    def check():
        start = time.perf_counter()
        params = SimParams(
            beta=0.8, gamma=0.75, opt=10, c0=0, alpha=1.0, epsilon=0.05,
            trials=10_000, seed=20240817,
        )
        report = verify_theorem(params)
        elapsed = time.perf_counter() - start
        assert report.rounds == 27
        # independent oracle for the exact tail
        oracle = float(stats.binom.sf(9, 27, 0.6))
        assert report.success_oracle is not None
        assert abs(report.success_oracle - oracle) < 1e-9
        assert abs(report.empirical_success - report.success_oracle) <= 0.01
        assert report.empirical_success >= 0.95
        assert elapsed < 5.0, f"took {elapsed:.2f}s"

    _report(1, "round budget 27; empirical success within 0.01 of exact tail, >= 0.95, < 5s", check)


def test_criterion_2_corollary_verification():
    def check():
        start = time.perf_counter()
        for gap, p in [(5, 0.3), (10, 0.6), (20, 0.9)]:
            params = SimParams(
                beta=p, gamma=1.0, opt=gap, c0=0, trials=10_000, seed=911 + gap
            )
            report = verify_corollary(params)
            oracle = gap / p
            bound = gap / p + 2 / p
            assert report.cap_exceeded == 0
            assert abs(report.mean_hitting_time - oracle) <= 3 * report.hitting_se, (
                f"gap={gap} p={p}: mean {report.mean_hitting_time:.3f} vs oracle "
                f"{oracle:.3f} se {report.hitting_se:.4f}"
            )
            assert report.mean_hitting_time <= bound
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"took {elapsed:.2f}s"

    _report(2, "mean hitting time within 3 SE of (OPT-C0)/p and under the bound on the grid", check)


def test_criterion_3_bound_spot_checks_and_monotonicity():
    def check():
        assert iteration_bound(1.0, 0.8, 0.75, 10, 0, 0.05) == 27
        assert iteration_bound(1.0, 1.0, 1.0, 1, 0, math.exp(-0.5)) == 2
        assert iteration_bound(0.5, 1.0, 0.5, 10, 5, 0.1) == 10

        rng = random.Random(31337)
        for _ in range(1000):
            alpha = rng.uniform(0.05, 1.0)
            beta = rng.uniform(0.05, 1.0)
            gamma = rng.uniform(0.05, 1.0)
            opt = rng.randint(0, 40)
            c0 = rng.randint(0, opt)
            epsilon = rng.uniform(0.001, 0.999)
            base = iteration_bound(alpha, beta, gamma, opt, c0, epsilon)
            bump = rng.uniform(1.0, 1.5)
            assert iteration_bound(alpha, min(1.0, beta * bump), gamma, opt, c0, epsilon) <= base
            assert iteration_bound(alpha, beta, min(1.0, gamma * bump), opt, c0, epsilon) <= base
            assert iteration_bound(alpha, beta, gamma, opt, c0, min(0.999, epsilon * bump)) <= base
            assert iteration_bound(min(1.0, alpha * bump), beta, gamma, opt, c0, epsilon) >= base
            assert iteration_bound(alpha, beta, gamma, opt + rng.randint(0, 6), c0, epsilon) >= base
            assert iteration_bound(alpha, beta, gamma, opt, rng.randint(0, c0) if c0 else 0, epsilon) >= base

    _report(3, "bound spot-checks exact; monotone over 1000 random parameter tuples", check)


def _random_scripted_run(rng: random.Random):
    n_items = rng.randint(2, 4)
    job = ModuleJob(
        module_id=f"rand-{rng.randint(0, 10**6)}",
        items=tuple(Item(f"i{n}", "cat/sub", f"Item number {n}") for n in range(n_items)),
    )
    chains = rng.randint(1, 3)
    iterations = rng.randint(1, 3)
    vocab = [f"kw{n}" for n in range(n_items)]

    def feasible_title() -> str:
        chosen = rng.sample(vocab, rng.randint(0, n_items))
        rng.shuffle(chosen)
        return " ".join(chosen + ["pick"])

    script = [f"kw{n}, extra{n}" for n in range(n_items)]
    script += ["title: " + feasible_title() for _ in range(chains)]
    for c in range(chains):
        for m in range(iterations):
            script.append(f"critique {c}-{m} for i0")
            if rng.random() < 0.25:
                script.append("title: " + " ".join(["overlongword"] * 14))
            else:
                script.append("title: " + feasible_title())
    config = PipelineConfig(
        chains=chains, iterations=iterations, seed=rng.randint(0, 10**9)
    )
    return job, script, config


def test_criterion_4_monotone_coverage_property():
    def check():
        rng = random.Random(424242)
        for _ in range(1000):
            job, script, config = _random_scripted_run(rng)
            result = run_carts(job, config, ScriptedBackend(script), SCORER)
            for trace in result.traces:
                best_trace = trace.best_coverage_trace()
                assert all(
                    later >= earlier
                    for earlier, later in zip(best_trace, best_trace[1:])
                ), f"decreasing best coverage {best_trace}"
            assert result.final.char_len <= config.max_chars
            assert result.final_feasible

    _report(4, "1000 randomized scripted runs: monotone best coverage, final within the cap", check)


def test_criterion_5_arbitration_matches_pool_optimum():
    def check():
        rng = random.Random(5150)
        config = PipelineConfig(iterations=1)
        for _ in range(200):
            n_items = rng.randint(1, 6)
            job = ModuleJob(
                module_id="pool",
                items=tuple(Item(f"i{n}", "cat", f"Item {n}") for n in range(n_items)),
            )
            keywords = [KeywordSet(f"i{n}", (f"kw{n}",)) for n in range(n_items)]
            vocab = [f"kw{n}" for n in range(n_items)] + ["noise", "pad"]
            pool = []
            for c in range(rng.randint(1, 7)):
                words = rng.sample(vocab, rng.randint(1, min(5, len(vocab))))
                if rng.random() < 0.2:
                    words = words + ["filler"] * 14  # infeasible: word count
                pool.append(CandidateTitle.make(" ".join(words), chain_id=c))
            pool.append(CandidateTitle.make("kw0 anchor", chain_id=len(pool)))  # keeps one feasible
            scored = [(t, coverage(t, job, keywords, SCORER)) for t in pool]
            summary = moderate(scored, config)
            winner = arbitrate(pool, summary, None, "rule")
            _, opt = brute_force_opt(pool, job, keywords, SCORER, config)
            winner_cov = coverage(winner, job, keywords, SCORER).coverage
            assert winner_cov == opt, f"arbitration {winner_cov} != pool opt {opt}"
            assert feasible(winner, config).ok

    _report(5, "rule arbitration equals exhaustive pool optimum on 200 random pools", check)


def test_criterion_6_determinism_golden(tmp_path):
    def check():
        args = [
            "run",
            "--dataset", "tests/data/fixture_jobs.jsonl",
            "--mode", "carts",
            "--backend", "mock",
            "--script", "tests/data/fixture_script.json",
            "--chains", "2",
            "--iterations", "2",
            "--seed", "7",
        ]
        out1 = tmp_path / "run1.jsonl"
        out2 = tmp_path / "run2.jsonl"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        golden = open("tests/data/golden_carts.jsonl", "rb").read()
        assert out1.read_bytes() == out2.read_bytes()
        assert out1.read_bytes() == golden

    _report(6, "scripted fixture run twice with seed 7 is byte-identical to the golden file", check)


def test_criterion_7_mock_runs_are_hermetic(tmp_path, monkeypatch):
    def check():
        def refuse(*args, **kwargs):
            raise AssertionError("socket opened during a mock run")

        monkeypatch.setattr(socket, "socket", refuse)
        monkeypatch.setattr(socket, "create_connection", refuse)
        code = main(
            [
                "run",
                "--dataset", "tests/data/fixture_jobs.jsonl",
                "--out", str(tmp_path / "hermetic.jsonl"),
                "--backend", "mock",
                "--script", "tests/data/fixture_script.json",
                "--chains", "2",
                "--iterations", "2",
                "--seed", "7",
            ]
        )
        assert code == 0

    _report(7, "mock-backend runs open no network sockets", check)
