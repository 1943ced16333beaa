"""Cost analytics: frozen USD totals for the three paths, scaling slopes,
pooling amortization, and agreement with metered runs."""
from __future__ import annotations

import pytest

from support import run_service

from timevault.chain import GasSchedule
from timevault.econ import (
    PATH_OPT,
    PATH_PES,
    PATH_POOL,
    curve_slope,
    path_cost,
    pooling_report,
    pooling_table,
    render_table,
    render_tsv,
    report_from_run,
    run_total_usd,
    scaling_curve,
)
from timevault.errors import ConfigError

K = 30  # reference committee size for the frozen totals


def test_opt_total_at_reference_size():
    report = path_cost(PATH_OPT, K)
    assert report.total_gas == 1_114_612 + 797_432 + 108_542
    assert report.total_usd == pytest.approx(9.2418, abs=5e-5)


def test_pes_total_at_reference_size():
    report = path_cost(PATH_PES, K)
    assert report.total_gas == (1_114_612 + 797_432 + 108_542
                                + 2_419_116 + K * 89_727)
    assert report.total_usd == pytest.approx(32.6182, abs=5e-5)


def test_pool_total_is_the_join_call():
    report = path_cost(PATH_POOL, K)
    assert [line.op for line in report.lines] == ["follow"]
    assert report.total_gas == 31_198
    assert report.total_usd == pytest.approx(0.1427, abs=5e-5)


def test_line_arithmetic_and_parties():
    report = path_cost(PATH_OPT, 6, payload_count=3)
    by_op = {line.op: line for line in report.lines}
    assert by_op["execute"].count == 3
    assert by_op["execute"].gas == 3 * 108_542
    assert report.total_gas == sum(line.gas for line in report.lines)
    parties = report.party_usd()
    schedule = report.schedule
    assert parties["leader"] == pytest.approx(
        schedule.gas_to_usd(by_op["deploy_proxy"].gas + by_op["lead"].gas))
    assert parties["executors"] == pytest.approx(
        schedule.gas_to_usd(by_op["execute"].gas))
    assert parties["follower"] == 0


def test_pes_report_ops_append_conviction_lines():
    report = path_cost(PATH_PES, 6, report_ops=("missing", "fake"))
    ops = [line.op for line in report.lines]
    assert ops.count("missing") == 1 and ops.count("fake") == 1
    by_op = {line.op: line for line in report.lines}
    assert by_op["missing"].gas == 65_766
    assert by_op["fake"].gas == 1_279_726


def test_path_cost_validation():
    with pytest.raises(ConfigError):
        path_cost("FAST", 5)
    with pytest.raises(ConfigError):
        path_cost(PATH_OPT, 0)
    with pytest.raises(ConfigError):
        path_cost(PATH_OPT, 5, payload_count=0)


# -- scaling ---------------------------------------------------------------


def test_scaling_slopes():
    sizes = range(10, 61, 10)
    opt = curve_slope(scaling_curve(PATH_OPT, sizes))
    pes = curve_slope(scaling_curve(PATH_PES, sizes))
    pool = curve_slope(scaling_curve(PATH_POOL, sizes))
    # per-member gas is affine, so least squares recovers it exactly
    assert opt == pytest.approx(0.100002, abs=1e-6)
    assert pes - opt == pytest.approx(0.410395, abs=1e-6)
    assert pool == pytest.approx(0.0, abs=1e-12)


def test_curve_slope_needs_two_points():
    with pytest.raises(ConfigError):
        curve_slope([(10, 1.0)])


# -- pooling ---------------------------------------------------------------


def test_pooling_averages_at_reference_size():
    frozen = {3: 3.0894, 7: 2.0640, 19: 1.4488}
    for f, expect in frozen.items():
        report = pooling_report(K, f)
        assert report.average_usd == pytest.approx(expect, abs=5e-5), f


def test_pooling_component_fields():
    report = pooling_report(K, 19)
    assert report.fee_usd == pytest.approx(0.39946, abs=5e-6)
    assert report.per_follower_usd == pytest.approx(0.5422, abs=5e-5)
    assert report.leader_adjusted_usd == pytest.approx(1.6521, abs=5e-5)
    assert report.per_request_usd == pytest.approx(
        report.follow_usd + report.fee_usd + report.execute_usd)


def test_pooling_average_decreases_with_followers():
    table = pooling_table(K, range(0, 20))
    averages = [r.average_usd for r in table]
    assert all(a > b for a, b in zip(averages, averages[1:]))


def test_pooling_without_followers_is_the_whole_setup():
    report = pooling_report(K, 0)
    assert report.average_usd == pytest.approx(
        path_cost(PATH_OPT, K).total_usd)
    assert report.leader_adjusted_usd == report.leader_total_usd


def test_pooling_rejects_negative_followers():
    with pytest.raises(ConfigError):
        pooling_report(K, -1)


# -- agreement with the simulator ------------------------------------------


def test_metered_clean_run_reproduces_the_schedule():
    _, result = run_service(2, 2, 3, seed=44)
    schedule = GasSchedule()
    assert result.gas_by_op["deploy_proxy"] == schedule.gas_for("deploy_proxy")
    assert result.gas_by_op["lead"] == schedule.gas_for("lead", 6)
    assert result.gas_by_op["execute"] == schedule.gas_for("execute")
    analytic = path_cost(PATH_OPT, 6)
    metered_core = sum(result.gas_by_op[line.op] for line in analytic.lines)
    assert metered_core == analytic.total_gas


def test_run_total_usd_matches_burned_gas():
    runner, result = run_service(2, 2, 3, seed=45, followers=2)
    schedule = GasSchedule()
    gas_total = sum(r.gas_used for r in runner.ledger.receipts)
    assert run_total_usd(result.fees_by_account) == pytest.approx(
        schedule.gas_to_usd(gas_total))


def test_report_from_run_folds_counts():
    lines = report_from_run({"execute": 217_084, "lead": 272_696})
    assert [(l.op, l.count, l.gas) for l in lines] == [
        ("execute", 1, 217_084), ("lead", 1, 272_696)]


# -- rendering -------------------------------------------------------------


def test_render_table_frozen_layout():
    text = render_table(["op", "gas", "usd"],
                        [["lead", 272_696, 1.2471], ["execute", 108_542, True]])
    assert text == (
        "op       gas     usd\n"
        "-------  ------  ------\n"
        "lead     272696  1.2471\n"
        "execute  108542  yes\n"
    )


def test_render_tsv_frozen_layout():
    text = render_tsv(["f", "average"], [[3, 3.0894], [7, 2.064]])
    assert text == "f\taverage\n3\t3.0894\n7\t2.0640\n"
