"""Offense handling: every misdeed lands on the right path with the right
conviction, and honest behavior is never punished."""
from __future__ import annotations

import pytest

from support import run_service

from timevault.protocol import Injection, Policy

OFFENSE_LABEL = {
    "withhold": "missing-reveal",
    "fake-key": "fake-reveal",
    "leak": "leaked-key",
    "early-reveal": "leaked-key",
}


@pytest.mark.parametrize("kind", sorted(OFFENSE_LABEL))
def test_single_offender_every_slot(kind):
    # group pairs share a key group: killing one slot kills one share, and
    # two live shares still meet the threshold, so every single offense ends
    # in a successful on-chain recovery with exactly the offender convicted
    for slot in range(6):
        _, result = run_service(2, 2, 3, seed=100 + slot,
                                injections=[Injection(kind, slot)])
        label = f"{kind}@{slot}"
        assert result.path == "PES", label
        assert result.outcome == "SUCCESS", label
        offender = result.committee[slot]
        assert result.convicted == {offender: OFFENSE_LABEL[kind]}, label
        assert not result.leader_convicted, label
        assert result.conservation_ok, label
        assert result.payloads_executed == 1, label


def test_two_withholders_in_distinct_groups_fail_the_service():
    injections = [Injection("withhold", 0), Injection("withhold", 2)]
    _, result = run_service(2, 2, 3, seed=200, injections=injections)
    assert result.path == "PES"
    assert result.outcome == "FAILURE"
    assert result.payloads_executed == 0
    assert set(result.convicted.values()) == {"missing-reveal"}
    assert set(result.convicted) == {result.committee[0], result.committee[2]}
    assert result.conservation_ok


def test_two_withholders_in_the_same_group_only_cost_one_share():
    injections = [Injection("withhold", 0), Injection("withhold", 1)]
    _, result = run_service(2, 2, 3, seed=201, injections=injections)
    assert result.outcome == "SUCCESS"
    assert len(result.convicted) == 2


def test_leak_rescues_a_withheld_group():
    # slot 0 leaks: its key becomes public, so the group survives slot 0's
    # silence; slot 2's withholding kills the second group instead
    injections = [Injection("leak", 0), Injection("withhold", 2)]
    _, result = run_service(2, 2, 3, seed=202, injections=injections)
    assert result.outcome == "SUCCESS"
    assert result.convicted == {
        result.committee[0]: "leaked-key",
        result.committee[2]: "missing-reveal",
    }


def test_mixed_offenses_convict_under_their_own_labels():
    injections = [Injection("fake-key", 1), Injection("leak", 4)]
    _, result = run_service(2, 2, 3, seed=203, injections=injections)
    assert result.outcome == "SUCCESS"
    assert result.convicted == {
        result.committee[1]: "fake-reveal",
        result.committee[4]: "leaked-key",
    }


def test_double_offense_by_one_member_convicts_once():
    injections = [Injection("leak", 3), Injection("withhold", 3)]
    _, result = run_service(2, 2, 3, seed=204, injections=injections)
    assert result.outcome == "SUCCESS"
    assert result.convicted == {result.committee[3]: "leaked-key"}


def test_bogus_committee_cancels_and_blames_the_leader():
    _, result = run_service(2, 2, 3, seed=205,
                            injections=[Injection("bogus-committee", 1)])
    assert result.path == "NONE"
    assert result.outcome == "CANCELLED"
    assert result.leader_convicted
    assert result.convicted == {}
    assert result.payloads_executed == 0
    assert result.conservation_ok
    assert any("committee-mismatch" in d for d in result.detections)


def test_tolerant_policy_still_convicts_when_quorum_breaks():
    # tolerance only skips escalation while enough shares survive; with the
    # whole first group silent at t=2, n=3 the quorum still holds, but with
    # two groups gone the run must escalate and convict regardless
    injections = [Injection("withhold", 0), Injection("withhold", 2)]
    _, result = run_service(2, 2, 3, seed=206, injections=injections,
                            policy=Policy(escalate_on_detection=False))
    assert result.path == "PES"
    assert result.outcome == "FAILURE"
    assert len(result.convicted) == 2


def test_honest_runs_never_convict():
    """Zero convictions across randomized honest runs, 1045 seeds."""
    shapes = [(1, 1, 1), (1, 1, 2), (2, 1, 1), (2, 2, 2), (3, 2, 2)]
    for seed in range(1000):
        _, result = run_service(1, 1, 1, seed=seed, executors=1)
        assert result.convicted == {}, seed
        assert not result.leader_convicted, seed
        assert result.outcome == "SUCCESS", seed
        assert result.conservation_ok, seed
    for index, shape in enumerate(shapes * 9):
        _, result = run_service(*shape, seed=5000 + index)
        assert result.convicted == {}, (shape, index)
        assert result.outcome == "SUCCESS", (shape, index)
