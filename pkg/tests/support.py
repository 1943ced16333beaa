"""Shared helpers for the test suite: canned protocol runs and addresses."""
from __future__ import annotations

from timevault.chain import ether
from timevault.crypto import keccak256
from timevault.protocol import (Policy, Runner, ServiceSpec,
                                simple_transfer_payload)


def sink(name: str) -> bytes:
    # deterministic throwaway recipient, no key behind it
    return keccak256(b"test-sink:" + name.encode())[12:]


def clean_spec(group_size: int, threshold: int, share_count: int,
               value_wei: int | None = None,
               timer: tuple[int, int] = (10, 29)) -> ServiceSpec:
    payload = simple_transfer_payload(sink("recipient"), value_wei or ether(1))
    return ServiceSpec(group_size=group_size, threshold=threshold,
                       share_count=share_count, timer_start=timer[0],
                       timer_end=timer[1], payload=payload)


def run_service(group_size: int, threshold: int, share_count: int,
                seed: int = 0, injections=None, followers: int = 0,
                policy: Policy | None = None, executors: int | None = None,
                timer: tuple[int, int] = (10, 29)):
    """Set up a registry, schedule one service, run it to settlement."""
    runner = Runner(seed=seed, policy=policy)
    count = executors if executors is not None else group_size * share_count + 2
    runner.add_executors(count)
    runner.setup_leader()
    runner.schedule_service(
        clean_spec(group_size, threshold, share_count, timer=timer), injections)
    for i in range(followers):
        # distinct recipient and value per follower: payload identity is content
        payload = simple_transfer_payload(sink(f"pool-{i}"), ether(1) + i + 1)
        runner.add_follower(payload)
    return runner, runner.run()
