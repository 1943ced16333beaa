"""Attack-budget analytics for the two adversary models.

Model one bounds how many executors an attacker may corrupt; its limit case
is the registration-flooding attack where the attacker stands up its own
executors and waits to be selected. Model two bounds the ether an attacker
may spend bribing already-selected committee members. Both reduce to closed
forms over the protocol parameters; the flooding model is additionally
validated empirically by driving the real committee-selection code over
synthetic registries.

All closed-form arithmetic is exact (`Fraction`); floats appear only in the
Monte-Carlo statistics.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .crypto import keccak256
from .crypto.keccak import keccak256_batch
from .errors import ConfigError
# injection vocabulary lives with the runner; re-exported here because the
# misbehavior suites drive it alongside the budget analytics
from .protocol import (INJECT_EARLY_REVEAL, INJECT_FAKE_KEY, INJECT_LEAK,
                       INJECT_WITHHOLD, Injection)
from .selection import select_committee

__all__ = [
    "FloodingParams", "BriberyParams", "CaptureStats",
    "capture_probability", "flooding_budget", "flooding_optimum",
    "flooding_budget_argmin", "capture_monte_carlo",
    "reputation_loss", "bribery_budget",
    "Injection", "INJECT_WITHHOLD", "INJECT_FAKE_KEY", "INJECT_LEAK",
    "INJECT_EARLY_REVEAL",
]

Number = int | Fraction


@dataclass(frozen=True)
class FloodingParams:
    """Registration-flooding attack: the attacker registers its own fleet.

    A share is captured only when every one of its ``group_size`` custodians
    is attacker-controlled. ``deposit_unit`` is the stake locked per executor
    per service, in whatever unit the caller prefers (budgets come back in
    the same unit).
    """

    adversary_count: int        # executors the attacker registers
    honest_count: int           # independently operated executors
    group_size: int             # custodians per share
    threshold: int
    share_count: int
    deposit_unit: Number = 1

    def __post_init__(self) -> None:
        if self.adversary_count < 1 or self.honest_count < 1:
            raise ConfigError("both registry populations must be at least 1")
        if self.group_size < 1 or not 1 <= self.threshold <= self.share_count:
            raise ConfigError("bad committee parameters")

    @property
    def registry_size(self) -> int:
        return self.adversary_count + self.honest_count


def capture_probability(params: FloodingParams) -> Fraction:
    """Chance that one whole share group lands on attacker executors."""
    return Fraction(params.adversary_count,
                    params.registry_size) ** params.group_size


def flooding_budget(params: FloodingParams) -> Fraction:
    """Stake the attacker must sink per expected threshold breach.

    Deposits scale with the fleet size while the expected number of captured
    shares scales with the capture probability; the budget is the fleet's
    stake divided by the breach rate.
    """
    p = capture_probability(params)
    return (Fraction(params.threshold)
            * params.adversary_count
            * Fraction(params.deposit_unit)
            / (params.share_count * p))


def flooding_optimum(group_size: int, honest_count: int) -> Optional[int]:
    """Fleet size minimizing :func:`flooding_budget`, honest count fixed.

    With a single custodian per share the budget only grows with the fleet,
    so there is no interior minimum and the result is None.
    """
    if group_size < 1 or honest_count < 1:
        raise ConfigError("bad parameters")
    if group_size == 1:
        return None
    return (group_size - 1) * honest_count


def flooding_budget_argmin(params: FloodingParams,
                           max_factor: int = 10) -> int:
    """Grid minimizer of the exact budget over fleet sizes.

    Scans adversary_count in [1, max_factor * honest_count]; independent of
    the closed-form optimum so the two can be checked against each other.
    """
    best_size = 1
    best_budget: Optional[Fraction] = None
    for g_s in range(1, max_factor * params.honest_count + 1):
        candidate = FloodingParams(
            g_s, params.honest_count, params.group_size,
            params.threshold, params.share_count, params.deposit_unit)
        budget = flooding_budget(candidate)
        if best_budget is None or budget < best_budget:
            best_budget = budget
            best_size = g_s
    return best_size


@dataclass(frozen=True)
class CaptureStats:
    trials: int
    mean_captured: float
    stderr: float
    ci95: float
    expected: float    # share_count * capture_probability

    def within(self, sigmas: float) -> bool:
        return abs(self.mean_captured - self.expected) <= sigmas * self.stderr


def _trial_randomness(seed: int, trials: int) -> list[bytes]:
    material = keccak256(b"capture-trials" + seed.to_bytes(8, "big"))
    rng = np.random.default_rng(int.from_bytes(material, "big") % 2**63)
    raw = rng.integers(0, 256, size=(trials, 32), dtype=np.uint8)
    return [bytes(row) for row in raw]


def _start_index_table(randomness: list[bytes], picks: int,
                       size: int) -> np.ndarray:
    """Start positions for every (trial, pick), batch-hashed.

    Reproduces exactly what the selection's default index derivation
    computes: hash(randomness .. pick-counter) reduced mod the registry
    size. The reduction runs bytewise so no 256-bit integers are needed.
    """
    trials = len(randomness)
    messages = np.zeros((trials * picks, 40), dtype=np.uint8)
    rnd = np.frombuffer(b"".join(randomness), dtype=np.uint8).reshape(trials, 32)
    for pick in range(1, picks + 1):
        rows = slice((pick - 1) * trials, pick * trials)
        messages[rows, :32] = rnd
        messages[rows, 32:] = np.frombuffer(
            pick.to_bytes(8, "big"), dtype=np.uint8)
    digests = keccak256_batch(messages)
    mod = np.zeros(trials * picks, dtype=np.uint64)
    for col in range(32):
        mod = (mod * np.uint64(256) + digests[:, col]) % np.uint64(size)
    # reshape back to (trial, pick): rows were grouped by pick above
    return mod.reshape(picks, trials).T.astype(np.int64)


def capture_monte_carlo(params: FloodingParams, trials: int = 10_000,
                        seed: int = 0) -> CaptureStats:
    """Empirical capture rate from the real selection code.

    Each trial shuffles which registry positions the attacker holds, draws
    fresh randomness, selects a committee with the production routine, and
    counts share groups whose custodians are all attacker positions.
    """
    if trials < 1:
        raise ConfigError("at least one trial required")
    size = params.registry_size
    picks = params.group_size * params.share_count
    randomness = _trial_randomness(seed, trials)
    starts = _start_index_table(randomness, picks, size)

    material = keccak256(b"capture-fleet" + seed.to_bytes(8, "big"))
    fleet_rng = np.random.default_rng(int.from_bytes(material, "big") % 2**63)

    captured = np.empty(trials, dtype=np.float64)
    everyone = lambda pos: True  # noqa: E731 - capacity plays no role here
    for trial in range(trials):
        row = starts[trial]
        table = {pick: int(row[pick - 1]) for pick in range(1, picks + 1)}
        committee = select_committee(
            size, picks, randomness[trial], everyone,
            index_fn=lambda _r, pick: table[pick])
        adversarial = fleet_rng.permutation(size)[:params.adversary_count]
        owned = np.zeros(size, dtype=bool)
        owned[adversarial] = True
        count = 0
        for share in range(params.share_count):
            group = committee[share * params.group_size:
                              (share + 1) * params.group_size]
            if all(owned[pos] for pos in group):
                count += 1
        captured[trial] = count

    mean = float(captured.mean())
    stderr = float(captured.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    expected = float(params.share_count * capture_probability(params))
    return CaptureStats(trials=trials, mean_captured=mean, stderr=stderr,
                        ci95=1.96 * stderr, expected=expected)


# ------------------------------------------------------------------- bribery

@dataclass(frozen=True)
class BriberyParams:
    """Buying out an already-selected committee: one entry per bribed slot.

    ``target_reputations`` lists the current reputation of each executor the
    attacker must flip (threshold * group_size of them to deny the secret).
    """

    target_reputations: Sequence[int]
    deposit_unit: Number = 1
    pay_unit: Number = Fraction(1, 100)
    rep_step: int = 1
    rep_floor: int = 1

    def __post_init__(self) -> None:
        if self.rep_step < 1:
            raise ConfigError("reputation step must be at least 1")
        for rep in self.target_reputations:
            if rep < self.rep_floor:
                raise ConfigError("target reputation below the floor")
            if (rep - self.rep_floor) % self.rep_step:
                raise ConfigError("target reputation off the step grid")


def reputation_loss(reputation: int, rep_floor: int, rep_step: int,
                    pay_unit: Number) -> Fraction:
    """Future pay an executor forfeits by being convicted at this standing.

    Rebuilding from the floor retraces every earlier streak: regaining step
    i of m takes (m - i + 1) further services each paying i steps' worth,
    which telescopes to m(m+1)(m+2)/6 step-payments.
    """
    if (reputation - rep_floor) % rep_step:
        raise ConfigError("reputation off the step grid")
    m = (reputation - rep_floor) // rep_step
    weight = Fraction(m * (m + 1) * (m + 2), 6)
    return weight * rep_step * Fraction(pay_unit)


def bribery_budget(params: BriberyParams) -> Fraction:
    """Least total compensation that makes every target whole.

    Each bribed executor loses its slashed stake plus the reputation
    rebuild; a rational briber must cover both for all targets.
    """
    total = Fraction(0)
    for rep in params.target_reputations:
        total += Fraction(params.deposit_unit) + reputation_loss(
            rep, params.rep_floor, params.rep_step, params.pay_unit)
    return total
