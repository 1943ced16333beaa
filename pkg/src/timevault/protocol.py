"""End-to-end service orchestration.

A ``Runner`` owns one simulated ledger, one executor registry, and one timed
service, and drives it from scheduling to settlement:

1. the leader deploys the escrow proxy and learns the registry snapshot,
2. derives the committee from verifiable randomness, splits the vault key
   into threshold shares, wraps each share under its slot group's one-time
   keys, and registers the committee on the bulletin,
3. hands every member an off-chain bundle (vault ciphertext, share onions,
   pre-signed fallback code),
4. followers pool their own committed payloads into the same escrow,
5. during the first half of the time frame members exchange share keys off
   the ledger and execute silently; detected misbehavior (or a policy that
   tolerates none) escalates to the second half, where keys go on-chain
   through a supplemental store, absentees and forgers are convicted, and a
   watchdog finishes the job,
6. the terminal state settles deposits, pay, bonuses, and refunds.

Misbehavior is injected per committee slot and applied consistently across
both halves (a withholder neither broadcasts nor reveals).
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional

from . import encoding
from .chain import Address, GasSchedule, Ledger, ether, make_tx
from .contracts import (BulletinBoard, FollowerEntry, Payload, ServiceRecord,
                        SupplementalStore, TimedProxy, epoch_boundary,
                        install_protocol, payload_commitment,
                        payload_signing_digest, reveal_deadline,
                        settle_service, supplemental_signing_digest,
                        EPOCH1, EPOCH2, FAILURE, SUCCESS, WAITING, CANCELLED,
                        PAYLOAD_TRANSFER)
from .crypto import (KeyPair, Onion, curve, generate_keypair, keccak256,
                     onion_from_bytes, onion_peel, onion_to_bytes,
                     onion_wrap, pk_to_address, sign, sk_to_pk, ss_restore,
                     ss_split, vrf_eval, encrypt, decrypt)
from .economics import Economics
from .errors import DecryptionFailure, InjectionError, TimevaultError
from .offchain import (OffchainChannel, PHASE_BROADCAST, PHASE_POOL,
                       PHASE_SCHEDULE)
from .selection import committee_addresses

SUPPLEMENTAL_CODE = b"threshold-reveal-store-v1"

INJECT_WITHHOLD = "withhold"
INJECT_FAKE_KEY = "fake-key"
INJECT_LEAK = "leak"
INJECT_EARLY_REVEAL = "early-reveal"
INJECT_BOGUS_COMMITTEE = "bogus-committee"

_EXECUTOR_INJECTIONS = frozenset(
    {INJECT_WITHHOLD, INJECT_FAKE_KEY, INJECT_LEAK, INJECT_EARLY_REVEAL})


@dataclass(frozen=True)
class Injection:
    kind: str
    slot: int = 0

    def __post_init__(self) -> None:
        if self.kind not in _EXECUTOR_INJECTIONS | {INJECT_BOGUS_COMMITTEE}:
            raise InjectionError(f"unknown injection kind {self.kind!r}")
        if self.slot < 0:
            raise InjectionError("injection slot must be non-negative")


@dataclass(frozen=True)
class Policy:
    # escalate to the on-chain phase as soon as any member is caught
    # misbehaving, even if enough honest shares remain for silent execution
    escalate_on_detection: bool = True


@dataclass(frozen=True)
class ServiceSpec:
    group_size: int
    threshold: int
    share_count: int
    timer_start: int
    timer_end: int
    payload: Payload

    @property
    def committee_size(self) -> int:
        return self.group_size * self.share_count


@dataclass
class ExecutorActor:
    account: KeyPair
    whisper: KeyPair
    service_keys: list[KeyPair]
    addr: Address

    def secret_for(self, service_pk: bytes) -> int:
        for pair in self.service_keys:
            if pair.pk == service_pk:
                return pair.sk
        raise TimevaultError("executor does not hold that service key")


@dataclass
class FollowerActor:
    account: KeyPair
    addr: Address
    payload: Payload
    fee_wei: int
    payload_bytes: bytes = b""


@dataclass
class RunResult:
    seed: int
    path: str                 # "OPT" | "PES" | "NONE"
    outcome: str              # SUCCESS | FAILURE | CANCELLED
    pooled: bool
    committee: list[str]
    convicted: dict[str, str]
    leader_convicted: bool
    payloads_total: int
    payloads_executed: int
    tx_count: int
    gas_by_op: dict[str, int]
    fees_by_account: dict[str, int]
    offchain_bytes: dict[str, int]
    offchain_total: int
    conservation_ok: bool
    detections: list[str]
    settlement: list[tuple[str, dict]]
    trace: list[str]

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "path": self.path,
            "outcome": self.outcome,
            "pooled": self.pooled,
            "committee": self.committee,
            "convicted": dict(sorted(self.convicted.items())),
            "leader_convicted": self.leader_convicted,
            "payloads_total": self.payloads_total,
            "payloads_executed": self.payloads_executed,
            "tx_count": self.tx_count,
            "gas_by_op": dict(sorted(self.gas_by_op.items())),
            "fees_by_account": dict(sorted(self.fees_by_account.items())),
            "offchain_bytes": dict(sorted(self.offchain_bytes.items())),
            "offchain_total": self.offchain_total,
            "conservation_ok": self.conservation_ok,
            "detections": self.detections,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True, indent=2) + "\n"


def _derive_rng(seed: int, stream: str) -> random.Random:
    material = keccak256(b"run-seed" + seed.to_bytes(8, "big", signed=False)
                         + stream.encode())
    return random.Random(int.from_bytes(material, "big"))


def _bogus_sk_for(service_pk: bytes) -> int:
    # a deterministic wrong key: never matches the registered public key
    candidate = int.from_bytes(keccak256(b"forged" + service_pk), "big")
    candidate = candidate % (curve.N - 1) + 1
    if sk_to_pk(candidate) == service_pk:  # pragma: no cover - 2^-256 event
        candidate = candidate % (curve.N - 1) + 1
    return candidate


class Runner:
    """Builds a registry, schedules one service, and plays it out."""

    def __init__(self, seed: int = 0, econ: Optional[Economics] = None,
                 schedule: Optional[GasSchedule] = None,
                 policy: Optional[Policy] = None):
        self.seed = seed
        self.econ = econ or Economics()
        self.policy = policy or Policy()
        self.ledger = Ledger(schedule)
        self.bulletin_addr = install_protocol(self.ledger, self.econ)
        self.offchain = OffchainChannel()
        self._key_rng = _derive_rng(seed, "keys")
        self._wrap_rng = _derive_rng(seed, "wrap")
        self.executors: dict[Address, ExecutorActor] = {}
        self.leader: Optional[KeyPair] = None
        self.leader_addr: Optional[Address] = None
        self.user: Optional[KeyPair] = None
        self.vault: Optional[KeyPair] = None
        self.followers: list[FollowerActor] = []
        self.spec: Optional[ServiceSpec] = None
        self.proxy_addr: Optional[Address] = None
        self.injections: list[Injection] = []
        self._behavior: dict[int, str] = {}
        self._onions: list[Onion] = []
        self._leader_payload_bytes = b""
        self._leader_payload_sig = b""
        self._code_sig = b""
        self._honest_committee: list[Address] = []
        self._detections: list[str] = []
        self._minted_guard = 0

    # -- registry construction --------------------------------------------

    def _board(self) -> BulletinBoard:
        board = self.ledger.contract_at(self.bulletin_addr)
        assert isinstance(board, BulletinBoard)
        return board

    def _proxy(self) -> TimedProxy:
        assert self.proxy_addr is not None
        proxy = self.ledger.contract_at(self.proxy_addr)
        assert isinstance(proxy, TimedProxy)
        return proxy

    def _record(self) -> ServiceRecord:
        assert self.proxy_addr is not None
        return self._board().services[self.proxy_addr]

    def _submit(self, sk: int, to: Optional[Address], value: int, data: bytes,
                committee_size: int = 0):
        sender = pk_to_address(sk_to_pk(sk))
        tx = make_tx(sk, to, value, data, self.ledger.next_nonce(sender))
        receipt = self.ledger.submit_tx(tx, committee_size=committee_size)
        if receipt.status != "OK":
            raise TimevaultError(
                f"transaction reverted: {receipt.revert_reason}")
        return receipt

    def add_executor(self, key_count: int = 1, deposit_units: int = 1,
                     funding_wei: Optional[int] = None) -> Address:
        acct = generate_keypair(self._key_rng, "account")
        whisper = generate_keypair(self._key_rng, "service")
        keys = [generate_keypair(self._key_rng, "service")
                for _ in range(key_count)]
        addr = pk_to_address(acct.pk)
        deposit = deposit_units * self.econ.deposit_unit_wei
        self.ledger.mint(addr, funding_wei if funding_wei is not None
                         else deposit + ether(2))
        data = BulletinBoard.SEL_REGISTER + encoding.encode(
            [whisper.pk, [pair.pk for pair in keys]])
        self._submit(acct.sk, self.bulletin_addr, deposit, data)
        self.executors[addr] = ExecutorActor(acct, whisper, keys, addr)
        return addr

    def add_executors(self, count: int, key_count: int = 1,
                      deposit_units: int = 1) -> list[Address]:
        return [self.add_executor(key_count, deposit_units)
                for _ in range(count)]

    def setup_leader(self, funding_wei: Optional[int] = None) -> Address:
        self.leader = generate_keypair(self._key_rng, "account")
        self.user = generate_keypair(self._key_rng, "user")
        self.leader_addr = pk_to_address(self.leader.pk)
        self.ledger.mint(self.leader_addr,
                         funding_wei if funding_wei is not None else ether(20))
        return self.leader_addr

    # -- scheduling (protocol steps 1 through 5) ---------------------------

    def schedule_service(self, spec: ServiceSpec,
                         injections: Optional[list[Injection]] = None) -> Address:
        if self.spec is not None:
            raise TimevaultError("runner already carries a service")
        if self.leader is None:
            self.setup_leader()
        self.spec = spec
        self.injections = list(injections or [])
        for inj in self.injections:
            if (inj.kind in _EXECUTOR_INJECTIONS
                    or inj.kind == INJECT_BOGUS_COMMITTEE):
                if inj.slot >= spec.committee_size:
                    raise InjectionError(
                        f"injection slot {inj.slot} outside committee of "
                        f"{spec.committee_size}")

        self.ledger.advance_block()  # schedule in a fresh block

        # step 1: escrow proxy carrying the leader's payload funding
        ctor = encoding.encode([b"proxy", self.leader_addr, self.bulletin_addr,
                                spec.timer_start, spec.timer_end])
        receipt = self._submit(self.leader.sk, None,
                               spec.payload.value_wei, ctor)
        self.proxy_addr = receipt.created

        # step 2: randomness bound to this proxy and snapshot block
        board = self._board()
        snapshot_block, entries = board.snapshots[self.proxy_addr]
        message = self.proxy_addr + snapshot_block.to_bytes(8, "big")
        vrf_value, vrf_proof = vrf_eval(self.user.sk, message)

        order = [addr for addr, _ in entries]
        availability = dict(entries)
        committee = committee_addresses(
            order, spec.committee_size, vrf_value,
            available=lambda a: availability[a])
        self._honest_committee = list(committee)
        for inj in self.injections:
            if inj.kind == INJECT_BOGUS_COMMITTEE:
                committee = self._tamper_committee(committee, inj.slot, order)

        # step 3: the committee goes on the record, deposits and keys lock
        board = self._board()
        pay = sum(board.executors[m].reputation * self.econ.pay_unit_wei
                  for m in committee)
        value = self.econ.deposit_unit_wei + pay + self.econ.bonus_wei
        data = BulletinBoard.SEL_LEAD + encoding.encode(
            [self.proxy_addr, spec.timer_start, spec.timer_end, self.user.pk,
             vrf_value, vrf_proof, spec.group_size, spec.threshold,
             spec.share_count, list(committee)])
        self._submit(self.leader.sk, self.bulletin_addr, value, data,
                     committee_size=spec.committee_size)

        # step 4: vault key split into shares, each share wrapped under its
        # slot group's one-time keys (first slot innermost), bundles delivered
        self.vault = generate_keypair(self._key_rng, "service")
        record = self._record()
        shares = ss_split(self.vault.sk, spec.threshold, spec.share_count,
                          self._wrap_rng)
        self._onions = []
        for share in shares:
            group = record.assigned_pks[(share.index - 1) * spec.group_size:
                                        share.index * spec.group_size]
            self._onions.append(onion_wrap(share, group, self._wrap_rng))

        self._leader_payload_bytes = spec.payload.to_bytes()
        self._leader_payload_sig = sign(
            self.leader.sk,
            payload_signing_digest(self.proxy_addr,
                                   self._leader_payload_bytes)).to_bytes()
        self._code_sig = sign(
            self.leader.sk,
            supplemental_signing_digest(self.proxy_addr,
                                        SUPPLEMENTAL_CODE)).to_bytes()
        vault_ct = encrypt(self.vault.pk,
                           encoding.encode([self._leader_payload_bytes,
                                            self._leader_payload_sig]),
                           self._wrap_rng)
        bundle = encoding.encode(
            [self.vault.pk, vault_ct, SUPPLEMENTAL_CODE, self._code_sig,
             [onion_to_bytes(o) for o in self._onions]])
        for member in record.committee:
            self.offchain.send(PHASE_SCHEDULE, self.leader_addr, member, bundle)

        # step 5: distribution done, the service waits for its time frame
        self._board().advance_service(self.proxy_addr, WAITING)
        self._behavior = {
            inj.slot: inj.kind for inj in self.injections
            if inj.kind in _EXECUTOR_INJECTIONS}
        return self.proxy_addr

    def _tamper_committee(self, committee: list[Address], slot: int,
                          order: list[Address]) -> list[Address]:
        board = self._board()
        for candidate in order:
            if candidate not in committee and board.is_available(candidate):
                tampered = list(committee)
                tampered[slot] = candidate
                return tampered
        raise InjectionError("no spare executor available to tamper with")

    # -- pooling -----------------------------------------------------------

    def add_follower(self, payload: Payload,
                     fee_wei: Optional[int] = None) -> Address:
        if self.proxy_addr is None:
            raise TimevaultError("schedule the service before pooling")
        if self.vault is None:
            raise TimevaultError("vault key not established")
        fee = self.econ.pool_fee_wei if fee_wei is None else fee_wei
        acct = generate_keypair(self._key_rng, "account")
        addr = pk_to_address(acct.pk)
        self.ledger.mint(addr, payload.value_wei + fee + ether(2))
        actor = FollowerActor(acct, addr, payload, fee)
        actor.payload_bytes = payload.to_bytes()

        data = TimedProxy.SEL_FOLLOW + encoding.encode(
            [payload_commitment(actor.payload_bytes), fee])
        self._submit(acct.sk, self.proxy_addr, payload.value_wei + fee, data)

        # encrypted payload travels to every committee member
        ct = encrypt(self.vault.pk, encoding.encode([actor.payload_bytes]),
                     self._wrap_rng)
        blob = encoding.encode([ct])
        for member in self._record().committee:
            self.offchain.send(PHASE_POOL, addr, member, blob)
        self.followers.append(actor)
        return addr

    # -- the time frame ----------------------------------------------------

    def run(self) -> RunResult:
        if self.spec is None or self.proxy_addr is None:
            raise TimevaultError("no service scheduled")
        self._minted_guard = self.ledger.minted_wei
        self._detections = []

        cancelled = self._waiting_phase()
        if not cancelled:
            executed = self._epoch1_phase()
            if not executed:
                self._epoch2_phase()

        record = self._record()
        if record.state not in (SUCCESS, FAILURE, CANCELLED):
            raise TimevaultError(f"service ended in {record.state}")
        settlement = settle_service(self.ledger, self.bulletin_addr,
                                    self.proxy_addr)
        return self._build_result(settlement)

    # each committee slot acts per its injected behavior; everyone honest by
    # default

    def _behavior_of(self, slot: int) -> str:
        return self._behavior.get(slot, "honest")

    def _honest_slots(self) -> list[int]:
        record = self._record()
        return [slot for slot, member in enumerate(record.committee)
                if self._behavior_of(slot) == "honest"
                and member not in record.convicted]

    def _waiting_phase(self) -> bool:
        """Pre-start reports: key leaks, early reveals, committee audits.

        Returns True when the service was cancelled.
        """
        record = self._record()
        for inj in sorted(self.injections, key=lambda i: (i.kind, i.slot)):
            if inj.kind in (INJECT_LEAK, INJECT_EARLY_REVEAL):
                self._report_leak(inj.slot)
        if any(i.kind == INJECT_BOGUS_COMMITTEE for i in self.injections):
            slot = next(i.slot for i in self.injections
                        if i.kind == INJECT_BOGUS_COMMITTEE)
            if self._report_bogus_committee(slot):
                return True
        return False

    def _report_leak(self, slot: int) -> None:
        record = self._record()
        member = record.committee[slot]
        if member in record.convicted:
            return
        # the offender's one-time key becomes public; the first honest
        # member turns it in for the reward
        offender = self.executors[member]
        leaked_sk = offender.secret_for(record.assigned_pks[slot])
        honest = self._honest_slots()
        if not honest:
            return
        reporter = self.executors[record.committee[honest[0]]]
        data = TimedProxy.SEL_LEAK + encoding.encode(
            [leaked_sk.to_bytes(32, "big"), record.assigned_pks[slot]])
        self._submit(reporter.account.sk, self.proxy_addr, 0, data)
        self._detections.append(f"slot{slot}:leaked-before-start")

    def _report_bogus_committee(self, slot: int) -> bool:
        record = self._record()
        if record.committee == self._honest_committee:
            return False
        # the displaced executor notices the published list differs from the
        # replayable selection and challenges that slot
        rightful = self._honest_committee[slot]
        reporter = self.executors.get(rightful)
        if reporter is None:
            candidates = self._honest_slots()
            if not candidates:
                return False
            reporter = self.executors[record.committee[candidates[0]]]
        data = BulletinBoard.SEL_INVALID + encoding.encode(
            [self.proxy_addr, slot])
        receipt = self._submit(reporter.account.sk, self.bulletin_addr, 0, data)
        self._detections.append(f"slot{slot}:committee-mismatch")
        return bool(receipt.output)

    def _epoch1_phase(self) -> bool:
        """Silent restoration inside the first half. True when finished."""
        spec = self.spec
        self.ledger.advance_to(spec.timer_start)
        self._board().advance_service(self.proxy_addr, EPOCH1)
        record = self._record()
        size = len(record.committee)

        known: dict[int, int] = {}
        detected: dict[int, str] = {}
        for slot, member in enumerate(record.committee):
            if member in record.convicted:
                detected[slot] = "prior-conviction"
        # convicted leaks made those keys public on the ledger
        known.update(self._proxy().leaked_keys)

        for slot, member in enumerate(record.committee):
            if member in record.convicted:
                continue
            behavior = self._behavior_of(slot)
            if behavior in (INJECT_WITHHOLD,):
                detected[slot] = "missing-broadcast"
                continue
            actor = self.executors[member]
            if behavior == INJECT_FAKE_KEY:
                wrong = _bogus_sk_for(record.assigned_pks[slot])
                blob = encoding.encode([slot, wrong.to_bytes(32, "big")])
                for peer in record.committee:
                    if peer != member:
                        self.offchain.send(PHASE_BROADCAST, member, peer, blob)
                # instantly detectable: the key does not match the on-chain
                # one-time public key for that slot
                detected[slot] = "bad-broadcast-key"
                continue
            secret = actor.secret_for(record.assigned_pks[slot])
            blob = encoding.encode([slot, secret.to_bytes(32, "big")])
            for peer in record.committee:
                if peer != member:
                    self.offchain.send(PHASE_BROADCAST, member, peer, blob)
            known[slot] = secret

        for slot in sorted(detected):
            self._detections.append(f"slot{slot}:{detected[slot]}")

        shares = self._recover_shares(known)
        escalate = (detected and self.policy.escalate_on_detection) \
            or len(shares) < record.threshold
        if escalate:
            return False
        self._execute_all(self._designated_executor(), shares)
        self._board().advance_service(self.proxy_addr, SUCCESS)
        return True

    def _epoch2_phase(self) -> None:
        spec = self.spec
        boundary = epoch_boundary(spec.timer_start, spec.timer_end)
        deadline = reveal_deadline(spec.timer_start, spec.timer_end)
        self.ledger.advance_to(boundary + 1)
        self._board().advance_service(self.proxy_addr, EPOCH2)
        record = self._record()

        honest = self._honest_slots()
        watchdog = None
        if honest and deadline + 1 <= spec.timer_end:
            watchdog = self.executors[record.committee[honest[0]]]
            data = TimedProxy.SEL_DEPLOY + encoding.encode(
                [SUPPLEMENTAL_CODE, self._code_sig])
            self._submit(watchdog.account.sk, self.proxy_addr, 0, data)

        if watchdog is not None:
            supplemental = self._proxy().supplemental
            # every unconvicted member answers per its behavior
            for slot, member in enumerate(record.committee):
                if member in record.convicted:
                    continue
                behavior = self._behavior_of(slot)
                if behavior == INJECT_WITHHOLD:
                    continue
                actor = self.executors[member]
                if behavior == INJECT_FAKE_KEY:
                    claimed = _bogus_sk_for(record.assigned_pks[slot])
                else:
                    claimed = actor.secret_for(record.assigned_pks[slot])
                data = SupplementalStore.SEL_REVEAL + encoding.encode(
                    [claimed.to_bytes(32, "big")])
                self._submit(actor.account.sk, supplemental, 0, data)

            self.ledger.advance_to(deadline + 1)
            self._adjudicate(watchdog, supplemental)

            known = self._epoch2_knowledge(supplemental)
            shares = self._recover_shares(known)
            record = self._record()
            if len(shares) >= record.threshold:
                self._execute_all(watchdog, shares)
                self._board().advance_service(self.proxy_addr, SUCCESS)
                return

        self.ledger.advance_to(spec.timer_end + 1)
        self._board().advance_service(self.proxy_addr, FAILURE)

    def _adjudicate(self, watchdog: ExecutorActor, supplemental: Address) -> None:
        record = self._record()
        store = self.ledger.contract_at(supplemental)
        assert isinstance(store, SupplementalStore)
        for slot, member in enumerate(record.committee):
            if member in record.convicted or member == watchdog.addr:
                continue
            claimed = store.revealed.get(slot)
            if claimed is None:
                selector, label = SupplementalStore.SEL_MISSING, "missing-reveal"
            else:
                try:
                    genuine = sk_to_pk(claimed) == record.assigned_pks[slot]
                except Exception:
                    genuine = False
                if genuine:
                    continue
                selector, label = SupplementalStore.SEL_FAKE, "fake-reveal"
            data = selector + encoding.encode([member])
            self._submit(watchdog.account.sk, supplemental, 0, data)
            self._detections.append(f"slot{slot}:{label}")
            record = self._record()

    def _epoch2_knowledge(self, supplemental: Address) -> dict[int, int]:
        """Keys available for restoration: genuine on-chain reveals plus any
        published leaks plus the honest members' own keys."""
        record = self._record()
        store = self.ledger.contract_at(supplemental)
        known: dict[int, int] = {}
        for slot, claimed in store.revealed.items():
            try:
                if sk_to_pk(claimed) == record.assigned_pks[slot]:
                    known[slot] = claimed
            except Exception:
                continue
        known.update(self._proxy().leaked_keys)
        for slot in self._honest_slots():
            member = record.committee[slot]
            known[slot] = self.executors[member].secret_for(
                record.assigned_pks[slot])
        return known

    # -- restoration and execution -----------------------------------------

    def _recover_shares(self, known: dict[int, int]) -> list:
        record = self._record()
        group = record.group_size
        shares = []
        for index in range(1, record.share_count + 1):
            slots = list(range((index - 1) * group, index * group))
            if not all(slot in known for slot in slots):
                continue
            peel_keys = [known[slot] for slot in reversed(slots)]
            try:
                shares.append(onion_peel(self._onions[index - 1], peel_keys))
            except DecryptionFailure as exc:
                blame = slots[group - 1 - exc.layer] if exc.layer is not None \
                    else slots[0]
                self._detections.append(f"slot{blame}:bad-onion-layer")
        return shares

    def _designated_executor(self) -> ExecutorActor:
        record = self._record()
        honest = self._honest_slots()
        if not honest:
            raise TimevaultError("no honest executor left to act")
        return self.executors[record.committee[honest[0]]]

    def _execute_all(self, actor: ExecutorActor, shares: list) -> None:
        record = self._record()
        vault_sk = ss_restore(shares[:record.threshold], record.threshold)
        bundle_blob = self._bundle_for(actor.addr)
        items = encoding.decode(bundle_blob)
        vault_ct = items[1]
        opened = encoding.decode(decrypt(vault_sk, vault_ct))
        payload_bytes, payload_sig = opened[0], opened[1]

        data = TimedProxy.SEL_EXECUTE + encoding.encode(
            [payload_bytes, payload_sig])
        self._submit(actor.account.sk, self.proxy_addr, 0, data)
        for follower in self.followers:
            ct_blob = self._pool_blob_for(actor.addr, follower.addr)
            payload_ct = encoding.decode(ct_blob)[0]
            follower_payload = encoding.decode(decrypt(vault_sk, payload_ct))[0]
            data = TimedProxy.SEL_EXECUTE + encoding.encode(
                [follower_payload, b""])
            self._submit(actor.account.sk, self.proxy_addr, 0, data)

    def _bundle_for(self, member: Address) -> bytes:
        for delivery in self.offchain.deliveries:
            if delivery.phase == PHASE_SCHEDULE and delivery.recipient == member:
                return self.offchain.get(delivery.handle)
        raise TimevaultError("no schedule bundle delivered to that member")

    def _pool_blob_for(self, member: Address, follower: Address) -> bytes:
        for delivery in self.offchain.deliveries:
            if (delivery.phase == PHASE_POOL and delivery.recipient == member
                    and delivery.sender == follower):
                return self.offchain.get(delivery.handle)
        raise TimevaultError("no pooled payload delivered to that member")

    # -- reporting ---------------------------------------------------------

    def _build_result(self, settlement: list[tuple[str, dict]]) -> RunResult:
        record = self._record()
        proxy = self._proxy()
        outcome = record.state
        path = "NONE"
        if outcome != CANCELLED:
            path = "PES" if proxy.supplemental is not None else "OPT"
        executed = len(proxy.executed)
        gas_by_op: dict[str, int] = {}
        fees: dict[str, int] = {}
        for receipt in self.ledger.receipts:
            op = receipt.gas_op or "unknown"
            gas_by_op[op] = gas_by_op.get(op, 0) + receipt.gas_used
            key = "0x" + receipt.sender.hex()
            fees[key] = fees.get(key, 0) + receipt.fee_wei
        conservation = self.ledger.total_wei() == self.ledger.minted_wei
        return RunResult(
            seed=self.seed,
            path=path,
            outcome=outcome,
            pooled=bool(self.followers),
            committee=["0x" + m.hex() for m in record.committee],
            convicted={"0x" + m.hex(): why
                       for m, why in record.convicted.items()},
            leader_convicted=record.leader_convicted,
            payloads_total=1 + len(self.followers),
            payloads_executed=executed,
            tx_count=len(self.ledger.receipts),
            gas_by_op=gas_by_op,
            fees_by_account=fees,
            offchain_bytes=self.offchain.bytes_by_phase(),
            offchain_total=self.offchain.total_bytes(),
            conservation_ok=conservation,
            detections=list(self._detections),
            settlement=settlement,
            trace=list(self.ledger.trace),
        )


def simple_transfer_payload(recipient: Address, value_wei: int) -> Payload:
    return Payload(PAYLOAD_TRANSFER, recipient, value_wei, b"")
