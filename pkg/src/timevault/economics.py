"""Monetary and incentive parameters.

All on-chain amounts are wei integers. The defaults are simulator choices
(configurable), not measured constants; only the formulas that consume them
carry meaning.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass

from .chain import ether
from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml


@dataclass(frozen=True)
class Economics:
    deposit_unit_wei: int = ether(1)  # security deposit locked per active service
    pay_unit_wei: int = ether("0.01")  # remuneration per reputation point
    bonus_wei: int = ether("0.005")  # extra for the executor that triggers execution
    pool_fee_wei: int = ether("0.002")  # minimum follower fee (~$0.40 at defaults)
    rep_floor: int = 1
    rep_ceiling: int = 10
    rep_step: int = 1
    reporter_share_bps: int = 5_000  # conviction split after gas reimbursement
    watchdog_grace_blocks: int = 5  # reporting priority window for the watchdog

    def __post_init__(self) -> None:
        if self.deposit_unit_wei <= 0 or self.pay_unit_wei < 0 or self.bonus_wei < 0:
            raise ConfigError("monetary parameters must be positive")
        if not 0 <= self.reporter_share_bps <= 10_000:
            raise ConfigError("reporter share must be within [0, 10000] bps")
        if self.rep_floor < 0 or self.rep_ceiling < self.rep_floor or self.rep_step < 0:
            raise ConfigError("bad reputation parameters")

    @staticmethod
    def from_toml(path: str) -> "Economics":
        with open(path, "rb") as fh:
            raw = _toml.load(fh)
        return Economics.from_dict(raw.get("economics", raw))

    @staticmethod
    def from_dict(raw: dict) -> "Economics":
        kwargs: dict = {}
        ether_keys = {
            "deposit_unit_ether": "deposit_unit_wei",
            "pay_unit_ether": "pay_unit_wei",
            "bonus_ether": "bonus_wei",
            "pool_fee_ether": "pool_fee_wei",
        }
        plain = {"rep_floor", "rep_ceiling", "rep_step", "reporter_share_bps",
                 "watchdog_grace_blocks", "deposit_unit_wei", "pay_unit_wei",
                 "bonus_wei", "pool_fee_wei"}
        for key, value in raw.items():
            if key in ether_keys:
                kwargs[ether_keys[key]] = ether(str(value))
            elif key in plain:
                kwargs[key] = int(value)
            else:
                raise ConfigError(f"unknown economics key {key!r}")
        return Economics(**kwargs)
