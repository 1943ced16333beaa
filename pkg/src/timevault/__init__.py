"""Deterministic simulator for committee-custodied timed execution.

A user who wants a private transaction to land inside a future block window
splits the decryption key for it across a recruited committee of bonded
executors. The committee restores the key inside the window and executes the
payload from an escrow contract; deposits, reputation-weighted pay, and
on-chain conviction of absentees, forgers, and leakers keep everyone honest.
Everything runs on a simulated gas-metered ledger and is reproducible from a
seed.
"""
from .chain import GasSchedule, Ledger, Receipt, Transaction, ether
from .contracts import Payload, settle_service
from .economics import Economics
from .errors import TimevaultError
from .protocol import (Injection, Policy, RunResult, Runner, ServiceSpec,
                       simple_transfer_payload)
from .scenario import Scenario, load_scenario, run_scenario, write_artifacts

__version__ = "0.1.0"

__all__ = [
    "GasSchedule", "Ledger", "Receipt", "Transaction", "ether",
    "Payload", "settle_service",
    "Economics",
    "TimevaultError",
    "Injection", "Policy", "RunResult", "Runner", "ServiceSpec",
    "simple_transfer_payload",
    "Scenario", "load_scenario", "run_scenario", "write_artifacts",
    "__version__",
]
