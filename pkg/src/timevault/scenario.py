"""Declarative scenario configs and the harness that runs them.

A scenario is one TOML file describing a complete service: registry shape,
service parameters, the scheduled payloads, follower pool, economic knobs,
misbehavior injections, and the seed. Running one is fully deterministic;
the artifacts it writes (trace, audit, summary, cost) are byte-stable and
golden-tested.

Payload targets may be symbolic: ``sink:<name>`` derives a throwaway
recipient address from the name, and ``flag`` refers to a trivial target
contract the harness deploys on demand so invocation payloads have
something observable to hit.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Optional

from . import encoding
from .chain import Address, GasSchedule, ether
from .contracts import (FlagBoard, PAYLOAD_CREATE, PAYLOAD_INVOKE,
                        PAYLOAD_TRANSFER, Payload)
from .crypto import keccak256
from .economics import Economics
from .errors import ConfigError
from .protocol import Injection, Policy, Runner, RunResult, ServiceSpec

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

SCENARIO_VERSION = 1

_TOP_KEYS = {"version", "name", "seed", "chain", "economics", "policy",
             "registry", "service", "followers", "inject"}


def _sink_address(name: str) -> Address:
    return keccak256(b"scenario-sink:" + name.encode())[12:]


def _parse_wei(table: dict, ether_key: str, wei_key: str, default: int = 0) -> int:
    if ether_key in table and wei_key in table:
        raise ConfigError(f"give {ether_key} or {wei_key}, not both")
    if ether_key in table:
        return ether(str(table[ether_key]))
    if wei_key in table:
        return int(table[wei_key])
    return default


@dataclass(frozen=True)
class PayloadSpec:
    """Unresolved payload: symbolic targets bind at run time."""

    kind: str                  # "transfer" | "invoke" | "create"
    target: str = ""
    value_wei: int = 0
    flag_value: int = 0        # invoke: the value written into the target

    @staticmethod
    def from_dict(raw: dict) -> "PayloadSpec":
        if not isinstance(raw, dict):
            raise ConfigError("payload must be a table")
        kind = raw.get("kind")
        value = _parse_wei(raw, "value_ether", "value_wei")
        if kind == "transfer":
            to = raw.get("to")
            if not isinstance(to, str) or not to:
                raise ConfigError("transfer payload needs a 'to' target")
            if value <= 0:
                raise ConfigError("transfer payload needs a positive value")
            return PayloadSpec("transfer", to, value)
        if kind == "invoke":
            flag_value = raw.get("set_flag")
            if not isinstance(flag_value, int):
                raise ConfigError("invoke payload needs an integer 'set_flag'")
            return PayloadSpec("invoke", raw.get("to", "flag"), value, flag_value)
        if kind == "create":
            return PayloadSpec("create", "flag", value)
        raise ConfigError(f"unknown payload kind {kind!r}")

    @property
    def needs_flag_board(self) -> bool:
        return self.kind == "invoke" and self.target == "flag"

    def resolve(self, flag_addr: Optional[Address]) -> Payload:
        if self.kind == "transfer":
            if self.target.startswith("0x"):
                to = bytes.fromhex(self.target[2:])
                if len(to) != 20:
                    raise ConfigError("transfer target must be 20 bytes")
            else:
                to = _sink_address(self.target)
            return Payload(PAYLOAD_TRANSFER, to, self.value_wei, b"")
        if self.kind == "invoke":
            if flag_addr is None:
                raise ConfigError("invoke payload without a deployed target")
            data = FlagBoard.SEL_SET + encoding.encode([self.flag_value])
            return Payload(PAYLOAD_INVOKE, flag_addr, self.value_wei, data)
        return Payload(PAYLOAD_CREATE, b"", self.value_wei,
                       encoding.encode([b"flag"]))


@dataclass(frozen=True)
class FollowerSpec:
    payload: PayloadSpec
    fee_wei: Optional[int] = None  # None: the configured pool minimum


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    schedule: GasSchedule
    economics: Economics
    policy: Policy
    executor_count: int
    keys_per_executor: int
    deposit_units: int
    group_size: int
    threshold: int
    share_count: int
    timer_start: int
    timer_end: int
    leader_payload: PayloadSpec
    followers: tuple[FollowerSpec, ...] = ()
    injections: tuple[Injection, ...] = ()

    @property
    def committee_size(self) -> int:
        return self.group_size * self.share_count


def scenario_from_dict(raw: dict, name: str = "scenario") -> Scenario:
    if not isinstance(raw, dict):
        raise ConfigError("scenario root must be a table")
    if raw.get("version") != SCENARIO_VERSION:
        raise ConfigError("scenario must declare version = 1")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys {sorted(unknown)}")

    schedule = GasSchedule.from_dict(raw.get("chain", {}))
    economics = Economics.from_dict(raw.get("economics", {}))
    policy_raw = raw.get("policy", {})
    extra = set(policy_raw) - {"escalate_on_detection"}
    if extra:
        raise ConfigError(f"unknown policy keys {sorted(extra)}")
    policy = Policy(escalate_on_detection=bool(
        policy_raw.get("escalate_on_detection", True)))

    registry = raw.get("registry", {})
    service = raw.get("service")
    if not isinstance(service, dict):
        raise ConfigError("scenario needs a [service] table")
    try:
        group_size = int(service["group_size"])
        threshold = int(service["threshold"])
        share_count = int(service["share_count"])
        timer_start = int(service["timer_start"])
        timer_end = int(service["timer_end"])
    except KeyError as exc:
        raise ConfigError(f"[service] missing {exc.args[0]}") from None
    if "payload" not in service:
        raise ConfigError("[service] needs a payload")
    leader_payload = PayloadSpec.from_dict(service["payload"])

    followers = []
    for entry in raw.get("followers", []):
        if not isinstance(entry, dict) or "payload" not in entry:
            raise ConfigError("each [[followers]] entry needs a payload")
        fee: Optional[int] = _parse_wei(entry, "fee_ether", "fee_wei", -1)
        followers.append(FollowerSpec(
            payload=PayloadSpec.from_dict(entry["payload"]),
            fee_wei=None if fee < 0 else fee))

    injections = []
    for entry in raw.get("inject", []):
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ConfigError("each [[inject]] entry needs a kind")
        injections.append(Injection(str(entry["kind"]),
                                    int(entry.get("slot", 0))))

    return Scenario(
        name=str(raw.get("name", name)),
        seed=int(raw.get("seed", 0)),
        schedule=schedule,
        economics=economics,
        policy=policy,
        executor_count=int(registry.get("executors", 0)),
        keys_per_executor=int(registry.get("keys_per_executor", 1)),
        deposit_units=int(registry.get("deposit_units", 1)),
        group_size=group_size,
        threshold=threshold,
        share_count=share_count,
        timer_start=timer_start,
        timer_end=timer_end,
        leader_payload=leader_payload,
        followers=tuple(followers),
        injections=tuple(injections),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = _toml.load(fh)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path.name}: {exc}") from None
    return scenario_from_dict(raw, name=path.stem)


def run_scenario(scenario: Scenario, seed: Optional[int] = None) -> RunResult:
    """Play one scenario to settlement and return the run record."""
    committee = scenario.committee_size
    if scenario.executor_count < committee:
        raise ConfigError(
            f"scenario infeasible: committee of {committee} from a registry "
            f"of {scenario.executor_count}")
    runner = Runner(seed=scenario.seed if seed is None else seed,
                    econ=scenario.economics, schedule=scenario.schedule,
                    policy=scenario.policy)
    runner.add_executors(scenario.executor_count,
                         key_count=scenario.keys_per_executor,
                         deposit_units=scenario.deposit_units)
    runner.setup_leader()

    flag_addr: Optional[Address] = None
    payload_specs = [scenario.leader_payload] + [
        f.payload for f in scenario.followers]
    if any(spec.needs_flag_board for spec in payload_specs):
        receipt = runner._submit(runner.leader.sk, None, 0,
                                 encoding.encode([b"flag"]))
        flag_addr = receipt.created

    spec = ServiceSpec(
        group_size=scenario.group_size,
        threshold=scenario.threshold,
        share_count=scenario.share_count,
        timer_start=scenario.timer_start,
        timer_end=scenario.timer_end,
        payload=scenario.leader_payload.resolve(flag_addr),
    )
    runner.schedule_service(spec, list(scenario.injections))
    for follower in scenario.followers:
        runner.add_follower(follower.payload.resolve(flag_addr),
                            fee_wei=follower.fee_wei)
    return runner.run()


# ----------------------------------------------------------------- artifacts

TRACE_FILE = "trace.log"
SUMMARY_FILE = "summary.json"
AUDIT_FILE = "offchain.json"
COST_FILE = "cost.json"


def write_artifacts(result: RunResult, out_dir: str | Path,
                    schedule: Optional[GasSchedule] = None) -> dict[str, Path]:
    """Write the four run artifacts; all byte-stable for a given run."""
    schedule = schedule or GasSchedule()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "trace": out / TRACE_FILE,
        "summary": out / SUMMARY_FILE,
        "audit": out / AUDIT_FILE,
        "cost": out / COST_FILE,
    }
    paths["trace"].write_text("".join(line + "\n" for line in result.trace))
    paths["summary"].write_text(result.summary_json())

    audit = {
        "bytes_by_phase": dict(sorted(result.offchain_bytes.items())),
        "total_bytes": result.offchain_total,
    }
    paths["audit"].write_text(json.dumps(audit, sort_keys=True, indent=2) + "\n")

    total_gas = sum(result.gas_by_op.values())
    cost = {
        "gas_by_op": dict(sorted(result.gas_by_op.items())),
        "usd_by_op": {op: round(schedule.gas_to_usd(gas), 6)
                      for op, gas in sorted(result.gas_by_op.items())},
        "total_gas": total_gas,
        "total_fees_wei": sum(result.fees_by_account.values()),
        "total_usd": round(schedule.gas_to_usd(total_gas), 6),
    }
    paths["cost"].write_text(json.dumps(cost, sort_keys=True, indent=2) + "\n")
    return paths


# ------------------------------------------------------------------- bundled

def bundled_scenario_dir():
    return files("timevault").joinpath("data/scenarios")


def bundled_scenario_names() -> list[str]:
    return sorted(entry.name[:-5] for entry in bundled_scenario_dir().iterdir()
                  if entry.name.endswith(".toml"))


def bundled_scenario_path(name: str) -> Path:
    candidate = bundled_scenario_dir().joinpath(name + ".toml")
    if not candidate.is_file():
        raise ConfigError(f"no bundled scenario named {name!r}")
    return Path(str(candidate))


def golden_dir():
    return files("timevault").joinpath("data/golden")
