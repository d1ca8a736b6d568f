from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zygmund.experiments import (
    CSV_COLUMNS,
    OpNormConfig,
    SharpnessConfig,
    block_hit_probability,
    block_sum,
    build_sharpness,
    calibrate_constant,
    interval_check,
    main_trial,
    read_records_csv,
    run_main_experiment,
    run_sharpness,
    run_trivial_bound,
    scaling_factor,
    sharpness_witness_norm,
    size_threshold,
    summarize_main,
    summarize_sharpness,
    summarize_trivial,
    trivial_ceiling,
    w_star,
    write_records_csv,
)
from zygmund.sampling import delta_main
from zygmund.young import young_close2

FAST = OpNormConfig(restarts=2, max_iters=10)


# ------------------------------------------------------- analytic formulas


def test_size_threshold_example():
    assert size_threshold(256, 1.0) == pytest.approx(256 / (math.e * math.log(256) ** 2))
    assert size_threshold(256, 1.0) == pytest.approx(3.06, abs=5e-3)
    assert size_threshold(1000, 2.0) == 1000 * delta_main(1000, 2.0)


def test_trivial_ceiling_values():
    assert trivial_ceiling(256, 1.0) == pytest.approx(math.sqrt(1 + math.log(256) / 2))
    assert trivial_ceiling(16, 0.001) >= 1.0
    with pytest.raises(ValueError):
        trivial_ceiling(8, 1.0)


def test_scaling_factor_floor():
    assert scaling_factor(16, 1.0) == pytest.approx(math.sqrt(math.log(math.log(16))))
    with pytest.raises(ValueError):
        scaling_factor(15, 1.0)


def test_block_hit_probability_examples():
    assert block_hit_probability(1.0, 3, 5) == 1.0
    assert block_hit_probability(0.1, 1, 10) == pytest.approx(1 - 0.9**10, rel=1e-14)
    assert block_hit_probability(0.5, 2, 0) == 0.0
    with pytest.raises(ValueError):
        block_hit_probability(1.1, 1, 1)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.integers(1, 20), st.integers(0, 10**6))
def test_block_hit_probability_exponential_bound(delta, N, T):
    p = block_hit_probability(delta, N, T)
    assert 0.0 <= p <= 1.0
    assert p >= -math.expm1(-(delta**N) * T) - 1e-12


def _w_star_scan(N, alpha, u0=math.e):
    """Grid oracle: the largest w on a fine grid still satisfying the defining inequality."""
    half = math.sqrt(N) / 2
    ws = np.linspace(1e-6, half / u0, 2_000_001)
    ok = ws**2 < np.log(half / ws) ** alpha / 32
    return ws[ok].max() if ok.all() else ws[np.argmin(ok)]


@pytest.mark.parametrize("N,alpha", [(2, 1.0), (8, 1.0), (50, 2.0), (1000, 0.5)])
def test_w_star_against_grid_oracle(N, alpha):
    w = w_star(N, alpha)
    scan = _w_star_scan(N, alpha)
    assert w == pytest.approx(scan, abs=2 * (math.sqrt(N) / (2 * math.e)) / 2_000_000)
    half = math.sqrt(N) / 2
    if w < half / math.e:
        assert w * w == pytest.approx(math.log(half / w) ** alpha / 32, rel=1e-10)


def test_w_star_value_for_block_of_two():
    assert w_star(2, 1.0) == pytest.approx(0.19904, abs=1e-5)


# --------------------------------------------------------- sharpness setup


def test_build_sharpness_examples():
    cfg, sys, blocks = build_sharpness(4, 2, 1.0, 64)
    assert (cfg.n, cfg.T, cfg.rho) == (512, 256, 1.0)
    assert cfg.rho * 2 * cfg.N == cfg.m
    assert blocks.shape == (256, 2)
    cfg3, _, blocks3 = build_sharpness(3, 1, 1.0)
    assert (cfg3.n, cfg3.T, cfg3.rho) == (27, 27, 1.5)
    assert cfg3.M == 32


@pytest.mark.parametrize("m,N", [(2, 1), (3, 2), (4, 2), (5, 3)])
def test_blocks_partition(m, N):
    cfg, _, blocks = build_sharpness(m, N, 1.0)
    flat = np.sort(blocks.ravel())
    np.testing.assert_array_equal(flat, np.arange(1, cfg.n + 1))
    assert np.all(np.diff(blocks, axis=1) == 1)


@pytest.mark.parametrize("kwargs", [dict(m=1, N=1, alpha=1, M=64), dict(m=2, N=4, alpha=1, M=64),
                                    dict(m=8, N=1, alpha=1, M=64), dict(m=2, N=1, alpha=0, M=64)])
def test_sharpness_config_guards(kwargs):
    with pytest.raises(ValueError):
        SharpnessConfig(**kwargs)


def test_delta_condition_for_default_config():
    cfg, _, _ = build_sharpness(4, 2, 1.0, 64)
    assert cfg.delta**cfg.N * cfg.T >= 1


def test_interval_bound_on_every_block():
    _, sys, blocks = build_sharpness(4, 2, 1.0, 64)
    for t in (0, 1, 100, 255):
        ok, low = interval_check(sys, blocks[t])
        assert ok and low >= math.sqrt(2) / 2
    # direct evaluation: |1 + e^{-2 pi i x}| / sqrt 2 at the last atom in [0, 1/16]
    x = 4 / 64
    assert low == pytest.approx(abs(1 + np.exp(-2j * np.pi * x)) / math.sqrt(2))


def test_block_sum_is_unit_l2():
    _, sys, blocks = build_sharpness(3, 4, 1.0, 256)
    f = block_sum(sys, blocks[5])
    assert np.sum(sys.space.weights * np.abs(f) ** 2) == pytest.approx(1.0)


def test_witness_for_single_frequency_is_one():
    _, sys, blocks = build_sharpness(3, 1, 1.0, 64)
    assert sharpness_witness_norm(young_close2(1.0), sys, blocks[4]) == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("N,alpha", [(2, 1.0), (16, 1.0), (64, 2.0)])
def test_witness_norm_exceeds_w_star(N, alpha):
    _, sys, blocks = build_sharpness(2, N, alpha)
    assert sharpness_witness_norm(young_close2(alpha), sys, blocks[0]) >= w_star(N, alpha)


# ------------------------------------------------------------ experiments


def test_main_trial_record_invariants():
    r = main_trial(1024, 1.0, 3, FAST)
    assert r.size_ok == (r.J_size >= r.size_threshold)
    assert r.ratio == pytest.approx(r.norm_lb / r.factor, rel=1e-12)
    if r.J_size:
        assert r.norm_lb >= 1 - 1e-6


def test_main_trial_reproducible():
    a = main_trial(512, 1.0, 11, FAST)
    b = main_trial(512, 1.0, 11, FAST)
    assert a.J_size == b.J_size and abs(a.norm_lb - b.norm_lb) <= 1e-9


def test_empty_subset_record():
    # find a seed whose subset of [1, 16] is empty (delta is about 0.047 there)
    for seed in range(100):
        r = main_trial(16, 1.0, seed, FAST)
        if r.J_size == 0:
            assert r.norm_lb == 0.0 and not r.size_ok
            return
    pytest.fail("no empty subset in 100 seeds")


def test_run_main_calibration_and_summary():
    recs = run_main_experiment([1.0], [64, 256], 6, base_seed=5, config=FAST)
    assert [r.seed for r in recs[:6]] == list(range(5, 11))
    k_hat = calibrate_constant(recs)
    assert k_hat == pytest.approx(1.5 * np.median([r.ratio for r in recs if r.n == 64]))
    for r in recs:
        assert r.extra["K_hat"] == k_hat
        assert r.norm_ok == (r.norm_lb <= k_hat * r.factor)
        assert r.joint_ok == (r.size_ok and r.norm_ok)
    s = summarize_main(recs)["1.0"]
    assert s["per_n"]["64"]["trials"] == 6 and s["K_hat"] == k_hat


def test_failed_trials_are_kept(monkeypatch):
    from zygmund import experiments
    from zygmund.luxemburg import NumericalFailure

    def boom(*a, **k):
        raise NumericalFailure("forced")

    monkeypatch.setattr(experiments, "opnorm_ascent", boom)
    recs = run_main_experiment([1.0], [1024], 3, config=FAST)
    assert len(recs) == 3
    nonempty = [r for r in recs if r.J_size]
    assert nonempty and all(r.failed and not r.norm_ok for r in nonempty)
    assert summarize_main(recs)["1.0"]["per_n"]["1024"]["failures"] == len(nonempty)


def test_run_preconditions():
    with pytest.raises(ValueError):
        run_main_experiment([1.0], [8], 1)
    with pytest.raises(ValueError):
        run_main_experiment([1.0], [64], 0)
    with pytest.raises(ValueError):
        OpNormConfig(restarts=0)


def test_trivial_bound_small():
    recs = run_trivial_bound(1.0, [64, 128], 5, config=FAST)
    assert len(recs) == 12 and sum(r.extra["kind"] == "ascent" for r in recs) == 2
    s = summarize_trivial(recs)
    assert s["violations"] == 0
    for r in recs:
        assert r.norm_lb <= trivial_ceiling(r.n, 1.0) + 1e-6
        assert r.norm_lb >= 1 - 1e-9  # a unit vector of an orthonormal system has L2 norm 1


def test_sharpness_run_small():
    recs = run_sharpness(4, 2, 1.0, 40, base_seed=3, M=64)
    s = summarize_sharpness(recs)
    assert s["trials"] == 40 and s["failures"] == 0
    assert s["delta_N_times_T"] >= 1
    for r in recs:
        if r.extra["block_hit"]:
            assert r.extra["witness_norm"] >= r.extra["w_star"]


def test_threads_do_not_change_output(tmp_path):
    a = run_sharpness(3, 1, 1.0, 12, base_seed=1, threads=1)
    b = run_sharpness(3, 1, 1.0, 12, base_seed=1, threads=2)
    write_records_csv(tmp_path / "a.csv", a)
    write_records_csv(tmp_path / "b.csv", b)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_csv_layout(tmp_path):
    recs = run_sharpness(3, 1, 1.0, 3)
    write_records_csv(tmp_path / "s.csv", recs)
    rows = read_records_csv(tmp_path / "s.csv")
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    assert rows[0]["experiment"] == "sharpness" and rows[0]["size_ok"] in ("true", "false")
    assert float(rows[0]["ratio"]) == pytest.approx(float(rows[0]["norm_lb"]) / float(rows[0]["factor"]))
