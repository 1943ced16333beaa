"""Simulated ledger: metering, tracing, rollback, conservation."""
from __future__ import annotations

import random
import re

import pytest

from timevault import encoding
from timevault.chain import (Contract, GasSchedule, Ledger, MAX_CALL_DEPTH,
                             ether, make_tx, selector_of)
from timevault.contracts import install_protocol
from timevault.crypto import generate_keypair, keccak256, pk_to_address
from timevault.errors import ChainError

TRACE_LINE = re.compile(
    r"^\d+\|0x[0-9a-f]{40}\|0x[0-9a-f]{40}\|(transfer|create|[0-9a-f]{8})"
    r"\|\d+\|\d+\|(OK|REVERT)$")


def funded_account(ledger, rng, wei=ether(100)):
    kp = generate_keypair(rng)
    addr = pk_to_address(kp.pk)
    ledger.mint(addr, wei)
    return kp, addr


def test_plain_transfer():
    ledger = Ledger()
    rng = random.Random(0)
    kp, sender = funded_account(ledger, rng)
    _, recipient = funded_account(ledger, rng, wei=0)
    receipt = ledger.submit_tx(make_tx(kp.sk, recipient, ether(2), b"", 0))
    assert receipt.status == "OK"
    assert receipt.gas_used == 21000
    fee = ledger.schedule.fee_wei(21000)
    assert receipt.fee_wei == fee
    assert ledger.balance_of(recipient) == ether(2)
    assert ledger.balance_of(sender) == ether(98) - fee


def test_trace_line_format():
    ledger = Ledger()
    rng = random.Random(1)
    kp, _ = funded_account(ledger, rng)
    _, recipient = funded_account(ledger, rng, wei=0)
    ledger.submit_tx(make_tx(kp.sk, recipient, 5, b"", 0))
    assert len(ledger.trace) == 1
    line = ledger.trace[0]
    assert TRACE_LINE.match(line)
    block, frm, to, tag, value, gas, status = line.split("|")
    assert (tag, value, gas, status) == ("transfer", "5", "21000", "OK")
    assert to == "0x" + recipient.hex()


def test_wei_conservation_with_burn():
    ledger = Ledger()
    rng = random.Random(2)
    kp, _ = funded_account(ledger, rng)
    _, other = funded_account(ledger, rng, wei=ether(3))
    minted = ether(103)
    for nonce in range(5):
        ledger.submit_tx(make_tx(kp.sk, other, 1000 + nonce, b"", nonce))
    # total_wei folds the burn back in, so minting is conserved exactly
    assert ledger.total_wei() == minted
    assert ledger.burned_wei == 5 * ledger.schedule.fee_wei(21000)
    assert sum(ledger.balances.values()) == minted - ledger.burned_wei


def test_nonce_rules():
    ledger = Ledger()
    rng = random.Random(3)
    kp, _ = funded_account(ledger, rng)
    _, other = funded_account(ledger, rng, wei=0)
    with pytest.raises(ChainError):
        ledger.submit_tx(make_tx(kp.sk, other, 1, b"", 4))  # future nonce
    tx = make_tx(kp.sk, other, 1, b"", 0)
    ledger.submit_tx(tx)
    with pytest.raises(ChainError):
        ledger.submit_tx(tx)  # replay


def test_insufficient_balance_rejected_before_inclusion():
    ledger = Ledger()
    rng = random.Random(4)
    kp, sender = funded_account(ledger, rng, wei=30000)
    _, other = funded_account(ledger, rng, wei=0)
    with pytest.raises(ChainError):
        ledger.submit_tx(make_tx(kp.sk, other, ether(1), b"", 0))
    # nothing was included: no trace, no nonce movement
    assert ledger.trace == []
    assert ledger.next_nonce(sender) == 0


def test_forged_signature_rejected():
    ledger = Ledger()
    rng = random.Random(5)
    kp, _ = funded_account(ledger, rng)
    _, other = funded_account(ledger, rng, wei=0)
    tx = make_tx(kp.sk, other, 1, b"", 0)
    forged = type(tx)(tx.to, tx.value_wei + 1, tx.data, tx.nonce, tx.signature)
    # digest mismatch recovers a different, unfunded sender
    with pytest.raises(ChainError):
        ledger.submit_tx(forged)


def test_unknown_selector_reverts_and_rolls_back():
    ledger = Ledger()
    board = install_protocol(ledger)
    rng = random.Random(6)
    kp, sender = funded_account(ledger, rng)
    before = ledger.balance_of(board)
    data = selector_of("no_such_function()") + encoding.encode([])
    receipt = ledger.submit_tx(make_tx(kp.sk, board, 12345, data, 0))
    assert receipt.status == "REVERT"
    assert receipt.revert_reason == "unknown-selector"
    assert ledger.balance_of(board) == before  # value transfer rolled back
    assert ledger.balance_of(sender) == ether(100) - receipt.fee_wei
    assert ledger.next_nonce(sender) == 1  # nonce still consumed
    assert ledger.trace[-1].endswith("|REVERT")


def test_contract_creation_address_rule():
    ledger = Ledger()
    install_protocol(ledger)
    rng = random.Random(7)
    kp, creator = funded_account(ledger, rng)
    ctor = encoding.encode([b"flag", b"marker"])
    receipt = ledger.submit_tx(make_tx(kp.sk, None, 0, ctor, 0))
    assert receipt.status == "OK"
    # dual route: creation address is hash(creator || nonce), last 20 bytes
    assert receipt.created == keccak256(creator + (0).to_bytes(8, "big"))[12:]
    assert receipt.created in ledger.contracts


def test_proxy_deployment_gas():
    ledger = Ledger()
    board = install_protocol(ledger)
    rng = random.Random(8)
    kp, leader = funded_account(ledger, rng)
    ctor = encoding.encode([b"proxy", leader, board, 10, 29])
    receipt = ledger.submit_tx(make_tx(kp.sk, None, ether(1), ctor, 0))
    assert receipt.status == "OK"
    assert receipt.gas_op == "deploy_proxy"
    assert receipt.gas_used == 1_114_612
    assert ledger.balance_of(receipt.created) == ether(1)


def test_schedule_lead_scales_with_committee():
    schedule = GasSchedule()
    # affine in the committee size, one increment per extra member
    assert schedule.gas_for("lead", 30) == 797_432
    assert schedule.gas_for("lead", 30) - schedule.gas_for("lead", 29) == 21_864
    assert schedule.gas_for("lead", 0) == 141_512
    flat = schedule.gas_for("execute", 0)
    assert schedule.gas_for("execute", 30) == flat


def test_schedule_usd_conversion():
    schedule = GasSchedule()
    assert schedule.gas_to_usd(0) == 0.0
    expect = 31198 * 22_900_000_000 * 199.73 / 10**18
    assert schedule.gas_to_usd(31198) == pytest.approx(expect)


def test_schedule_from_dict_overrides():
    schedule = GasSchedule.from_dict({
        "gas": {"execute": 999, "lead": {"base": 10, "per_executor": 3}},
        "gas_price_wei": 2, "ether_usd": 1.0,
    })
    assert schedule.gas_for("execute") == 999
    assert schedule.gas_for("lead", 4) == 22
    assert schedule.fee_wei(100) == 200
    # untouched entries keep their defaults
    assert schedule.gas_for("follow") == 31_198


def test_schedule_from_toml(tmp_path):
    path = tmp_path / "gas.toml"
    path.write_text('ether_usd = 50.0\n[gas]\nfollow = 40000\n'
                    'lead = { base = 100, per_executor = 7 }\n')
    schedule = GasSchedule.from_toml(str(path))
    assert schedule.gas_for("follow") == 40000
    assert schedule.gas_for("lead", 2) == 114
    assert schedule.ether_usd == 50.0


def test_unlisted_op_costs_base_gas():
    schedule = GasSchedule()
    assert schedule.gas_for("no_such_op") == schedule.base_tx_gas


def test_block_advance():
    ledger = Ledger()
    assert ledger.block == 0
    ledger.advance_block()
    ledger.advance_to(10)
    assert ledger.block == 10
    ledger.advance_to(10)  # no-op, already there
    with pytest.raises(ChainError):
        ledger.advance_to(9)


SEL_BOUNCE = selector_of("bounce(uint)")


class Bouncer(Contract):
    HANDLERS = {SEL_BOUNCE: "h_bounce"}

    def h_bounce(self, ctx, remaining):
        if remaining > 0:
            ctx.call(self.address, SEL_BOUNCE, [remaining - 1])
        return remaining


def test_call_depth_limit():
    ledger = Ledger()
    ledger.register_factory("bouncer", lambda addr, args, ctx: Bouncer(addr))
    rng = random.Random(9)
    kp, _ = funded_account(ledger, rng)
    created = ledger.submit_tx(
        make_tx(kp.sk, None, 0, encoding.encode([b"bouncer"]), 0)).created
    # the transaction enters at depth 1, so MAX_CALL_DEPTH - 1 nested hops fit
    ok = ledger.submit_tx(make_tx(
        kp.sk, created, 0,
        SEL_BOUNCE + encoding.encode([MAX_CALL_DEPTH - 1]), 1))
    assert ok.status == "OK"
    too_deep = ledger.submit_tx(make_tx(
        kp.sk, created, 0, SEL_BOUNCE + encoding.encode([MAX_CALL_DEPTH]), 2))
    assert too_deep.status == "REVERT"
    assert too_deep.revert_reason == "call-depth-exceeded"


def test_every_trace_line_well_formed_after_mixed_activity():
    ledger = Ledger()
    board = install_protocol(ledger)
    rng = random.Random(10)
    kp, _ = funded_account(ledger, rng)
    _, other = funded_account(ledger, rng, wei=0)
    ledger.submit_tx(make_tx(kp.sk, other, 7, b"", 0))
    ledger.submit_tx(make_tx(kp.sk, board, 0,
                             selector_of("nope()") + encoding.encode([]), 1))
    ledger.submit_tx(make_tx(kp.sk, None, 0,
                             encoding.encode([b"flag", b"x"]), 2))
    assert len(ledger.trace) == 3
    for line in ledger.trace:
        assert TRACE_LINE.match(line), line
