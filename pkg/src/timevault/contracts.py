"""On-chain protocol contracts.

Three cooperating contracts drive a timed-execution service:

* ``BulletinBoard`` (singleton): executor registry with deposits, one-time
  service keys and reputation; service records; convictions and payouts.
* ``TimedProxy`` (one per service): escrow for the scheduled payloads,
  follower pooling, execution inside the time frame, misbehavior reports
  before it, and fallback deployment after phase one.
* ``SupplementalStore`` (deployed only on escalation): collects plaintext
  share keys during the second phase and adjudicates missing or fake ones.

State that a contract owns is mutated only through its own handlers; other
contracts read it directly (the simulator allows that) but mutate it via
nested calls so caller checks always apply.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .chain import Address, CallContext, Contract, Ledger, selector_of
from .crypto import keccak256, sk_to_pk, verify, vrf_verify
from .economics import Economics
from .errors import (InvalidProof, MalformedSignature, Revert,
                     SelectionError, SerializationError, TimevaultError)
from . import encoding
from .selection import committee_addresses

# ------------------------------------------------------------- service states

SCHEDULED = "SCHEDULED"  # registered on the bulletin, distribution in progress
WAITING = "WAITING"      # fully distributed, timer not started
EPOCH1 = "EPOCH1"        # first half of the time frame: silent restoration
EPOCH2 = "EPOCH2"        # second half: on-chain reveals via the supplemental
SUCCESS = "SUCCESS"
FAILURE = "FAILURE"
CANCELLED = "CANCELLED"

TERMINAL_STATES = frozenset({SUCCESS, FAILURE, CANCELLED})

_ALLOWED_TRANSITIONS = {
    SCHEDULED: {WAITING, CANCELLED},
    WAITING: {EPOCH1, CANCELLED},
    EPOCH1: {SUCCESS, EPOCH2},
    EPOCH2: {SUCCESS, FAILURE},
}

OFFENSE_LEAK = "leaked-key"
OFFENSE_MISSING = "missing-reveal"
OFFENSE_FAKE = "fake-reveal"
OFFENSE_BOGUS_COMMITTEE = "bogus-committee"


def epoch_boundary(timer_start: int, timer_end: int) -> int:
    """Last block of the first phase (the frame is inclusive on both ends)."""
    return (timer_start + timer_end) // 2


def reveal_deadline(timer_start: int, timer_end: int) -> int:
    """Last block of the second-phase reveal window; reports open after it."""
    boundary = epoch_boundary(timer_start, timer_end)
    return boundary + max(1, (timer_end - boundary) // 2)


# ------------------------------------------------------------------ payloads

PAYLOAD_TRANSFER = b"transfer"
PAYLOAD_INVOKE = b"invoke"
PAYLOAD_CREATE = b"create"


@dataclass(frozen=True)
class Payload:
    """One deferred action held in escrow until the time frame.

    kind "transfer": send value_wei to `to`.
    kind "invoke": call `to` with data = selector || encoded args.
    kind "create": instantiate a contract, data = encoded [code kind, args...].
    """

    kind: bytes
    to: bytes
    value_wei: int
    data: bytes

    def to_bytes(self) -> bytes:
        return encoding.encode([self.kind, self.to, self.value_wei, self.data])

    @staticmethod
    def from_bytes(raw: bytes) -> "Payload":
        items = encoding.decode(raw)
        if (not isinstance(items, list) or len(items) != 4
                or not isinstance(items[0], bytes) or not isinstance(items[1], bytes)
                or not isinstance(items[2], int) or not isinstance(items[3], bytes)):
            raise SerializationError("bad payload encoding")
        return Payload(items[0], items[1], items[2], items[3])


def payload_commitment(payload_bytes: bytes) -> bytes:
    return keccak256(payload_bytes)


def payload_signing_digest(proxy: Address, payload_bytes: bytes) -> bytes:
    return keccak256(proxy + payload_bytes)


def supplemental_signing_digest(proxy: Address, code: bytes) -> bytes:
    return keccak256(proxy + code)


# ------------------------------------------------------------------- records

@dataclass
class ExecutorRecord:
    address: Address
    whisper_pk: bytes               # channel key for encrypted hand-offs
    deposit_wei: int
    unused_service_pks: list[bytes]
    locked_services: int = 0
    reputation: int = 1
    difficulty: int = 1             # successes needed for the next step up
    successes: int = 0
    blacklisted: bool = False

    def slots(self, deposit_unit_wei: int) -> int:
        return self.deposit_wei // deposit_unit_wei

    def is_available(self, deposit_unit_wei: int) -> bool:
        return (not self.blacklisted
                and self.locked_services < self.slots(deposit_unit_wei)
                and len(self.unused_service_pks) > 0)


def record_success(rec: ExecutorRecord, econ: Economics) -> None:
    # every completed streak raises reputation one step and lengthens the
    # next streak by one; progression gets harder the higher it goes
    rec.successes += 1
    if rec.successes >= rec.difficulty:
        rec.successes = 0
        rec.difficulty += 1
        rec.reputation = min(rec.reputation + econ.rep_step, econ.rep_ceiling)


@dataclass
class FollowerEntry:
    follower: Address
    commitment: bytes
    fee_wei: int
    fund_wei: int
    executed: bool = False
    spent_wei: int = 0


@dataclass
class ServiceRecord:
    proxy: Address
    leader: Address
    snapshot_block: int
    timer_start: int
    timer_end: int
    pk_user: bytes
    vrf_value: bytes
    vrf_proof: bytes
    group_size: int
    threshold: int
    share_count: int
    committee: list[Address]
    assigned_pks: list[bytes]       # one-time service key per slot
    pay_per_slot_wei: list[int]
    leader_deposit_wei: int
    pool_wei: int
    state: str = SCHEDULED
    convicted: dict[Address, str] = field(default_factory=dict)
    leader_convicted: bool = False
    settled: bool = False

    def slot_of(self, member: Address) -> int:
        return self.committee.index(member)

    def share_index_of_slot(self, slot: int) -> int:
        return slot // self.group_size + 1  # share indices are 1-based


# ------------------------------------------------------------- bulletin board

class BulletinBoard(Contract):
    kind = "bulletin"

    SEL_REGISTER = selector_of("register(bytes,bytes[])")
    SEL_TOPUP = selector_of("topup()")
    SEL_ADD_KEYS = selector_of("add_keys(bytes[])")
    SEL_LEAD = selector_of(
        "lead(address,uint,uint,bytes,bytes32,bytes,uint,uint,uint,address[])")
    SEL_INVALID = selector_of("invalid(address,uint)")
    SEL_WITHDRAW = selector_of("withdraw(uint)")
    SEL_NOTIFY = selector_of("notify()")
    SEL_CONVICT = selector_of("convict(address,bytes,address,uint)")

    HANDLERS = {
        SEL_REGISTER: "h_register",
        SEL_TOPUP: "h_topup",
        SEL_ADD_KEYS: "h_add_keys",
        SEL_LEAD: "h_lead",
        SEL_INVALID: "h_invalid",
        SEL_WITHDRAW: "h_withdraw",
        SEL_NOTIFY: "h_notify",
        SEL_CONVICT: "h_convict",
    }
    GAS_OPS = {
        SEL_REGISTER: "register",
        SEL_TOPUP: "topup",
        SEL_ADD_KEYS: "add_keys",
        SEL_LEAD: "lead",
        SEL_INVALID: "invalid",
        SEL_WITHDRAW: "withdraw",
        SEL_NOTIFY: "call_generic",
        SEL_CONVICT: "call_generic",
    }

    def __init__(self, address: Address, econ: Economics):
        super().__init__(address)
        self.econ = econ
        self.executors: dict[Address, ExecutorRecord] = {}
        self.registry_order: list[Address] = []
        self.services: dict[Address, ServiceRecord] = {}
        # proxy address -> (creation block, ((executor, available), ...))
        self.snapshots: dict[Address, tuple[int, tuple[tuple[Address, bool], ...]]] = {}
        self.credits: dict[Address, int] = {}
        self.banned_users: set[Address] = set()

    # -- registry ----------------------------------------------------------

    def h_register(self, ctx: CallContext, whisper_pk: bytes, service_pks: list) -> None:
        unit = self.econ.deposit_unit_wei
        if ctx.caller in self.executors:
            raise Revert("already-registered")
        if ctx.caller in self.banned_users:
            raise Revert("blacklisted")
        if ctx.value_wei < unit or ctx.value_wei % unit != 0:
            raise Revert("deposit-not-multiple")
        keys = self._checked_keys(service_pks)
        if not keys:
            raise Revert("no-service-keys")
        if len(whisper_pk) != 33:
            raise Revert("bad-key-length")
        rec = ExecutorRecord(
            address=ctx.caller, whisper_pk=whisper_pk,
            deposit_wei=ctx.value_wei, unused_service_pks=keys,
            reputation=self.econ.rep_floor,
        )
        self.executors[ctx.caller] = rec
        self.registry_order.append(ctx.caller)
        ctx.emit("ExecutorRegistered", executor=ctx.caller.hex(),
                 deposit_wei=ctx.value_wei, keys=len(keys))

    def h_topup(self, ctx: CallContext) -> None:
        rec = self._executor(ctx.caller)
        unit = self.econ.deposit_unit_wei
        if ctx.value_wei <= 0 or ctx.value_wei % unit != 0:
            raise Revert("deposit-not-multiple")
        rec.deposit_wei += ctx.value_wei
        ctx.emit("DepositRaised", executor=ctx.caller.hex(),
                 deposit_wei=rec.deposit_wei)

    def h_add_keys(self, ctx: CallContext, service_pks: list) -> None:
        rec = self._executor(ctx.caller)
        keys = self._checked_keys(service_pks)
        if not keys:
            raise Revert("no-service-keys")
        known = set(rec.unused_service_pks)
        for key in keys:
            if key in known:
                raise Revert("duplicate-service-key")
        rec.unused_service_pks.extend(keys)
        ctx.emit("KeysAdded", executor=ctx.caller.hex(), keys=len(keys))

    # -- service lifecycle -------------------------------------------------

    def h_notify(self, ctx: CallContext) -> None:
        # called by a proxy from its constructor; freezes the registry view
        # that later committee audits replay against
        if ctx.caller in self.snapshots:
            raise Revert("already-notified")
        unit = self.econ.deposit_unit_wei
        entries = tuple(
            (addr, self.executors[addr].is_available(unit))
            for addr in self.registry_order
        )
        self.snapshots[ctx.caller] = (ctx.block, entries)
        ctx.emit("ServiceNoticed", proxy=ctx.caller.hex(), block=ctx.block)

    def h_lead(self, ctx: CallContext, proxy: bytes, timer_start: int,
               timer_end: int, pk_user: bytes, vrf_value: bytes,
               vrf_proof: bytes, group_size: int, threshold: int,
               share_count: int, committee: list) -> None:
        if proxy not in self.snapshots:
            raise Revert("unknown-proxy")
        if proxy in self.services:
            raise Revert("already-led")
        proxy_obj = ctx.ledger.contracts.get(proxy)
        if not isinstance(proxy_obj, TimedProxy):
            raise Revert("unknown-proxy")
        if proxy_obj.leader != ctx.caller:
            raise Revert("not-proxy-leader")
        if ctx.caller in self.banned_users:
            raise Revert("blacklisted")
        if (timer_start, timer_end) != (proxy_obj.timer_start, proxy_obj.timer_end):
            raise Revert("timer-mismatch")
        if not (ctx.block < timer_start and timer_start < timer_end):
            raise Revert("bad-timer")
        if group_size < 1 or not 1 <= threshold <= share_count:
            raise Revert("bad-params")
        if len(pk_user) != 33 or len(vrf_value) != 32 or len(vrf_proof) != 97:
            raise Revert("bad-key-length")
        if len(committee) != group_size * share_count:
            raise Revert("committee-size-mismatch")

        unit = self.econ.deposit_unit_wei
        members: list[Address] = []
        assigned: list[bytes] = []
        pay: list[int] = []
        seen: set[Address] = set()
        for member in committee:
            if not isinstance(member, bytes) or len(member) != 20:
                raise Revert("bad-member-address")
            if member in seen:
                raise Revert("duplicate-member")
            seen.add(member)
            rec = self.executors.get(member)
            if rec is None or not rec.is_available(unit):
                raise Revert("member-unavailable")
            members.append(member)
            pay.append(rec.reputation * self.econ.pay_unit_wei)
        required = unit + sum(pay) + self.econ.bonus_wei
        if ctx.value_wei < required:
            raise Revert("insufficient-payment")
        # all checks passed: consume one key and one deposit slot per member
        for member in members:
            rec = self.executors[member]
            assigned.append(rec.unused_service_pks.pop(0))
            rec.locked_services += 1

        self.services[proxy] = ServiceRecord(
            proxy=proxy, leader=ctx.caller,
            snapshot_block=self.snapshots[proxy][0],
            timer_start=timer_start, timer_end=timer_end,
            pk_user=pk_user, vrf_value=vrf_value, vrf_proof=vrf_proof,
            group_size=group_size, threshold=threshold, share_count=share_count,
            committee=members, assigned_pks=assigned, pay_per_slot_wei=pay,
            leader_deposit_wei=unit, pool_wei=ctx.value_wei - unit,
        )
        ctx.emit("ServiceLed", proxy=proxy.hex(), leader=ctx.caller.hex(),
                 committee_size=len(members), pool_wei=ctx.value_wei - unit)

    def h_invalid(self, ctx: CallContext, proxy: bytes, slot: int) -> bool:
        rec = self.services.get(proxy)
        if rec is None:
            raise Revert("unknown-service")
        if rec.state not in (SCHEDULED, WAITING):
            raise Revert("wrong-state")
        if not 0 <= slot < len(rec.committee):
            raise Revert("bad-slot")
        snapshot_block, entries = self.snapshots[proxy]
        message = proxy + snapshot_block.to_bytes(8, "big")
        valid = True
        try:
            valid = vrf_verify(rec.pk_user, message, rec.vrf_proof) == rec.vrf_value
        except InvalidProof:
            valid = False
        if valid:
            order = [addr for addr, _ in entries]
            availability = dict(entries)
            try:
                replayed = committee_addresses(
                    order, slot + 1, rec.vrf_value,
                    available=lambda a: availability[a])
            except SelectionError:
                valid = False
            else:
                valid = replayed[slot] == rec.committee[slot]
        if valid:
            ctx.emit("ChallengeRejected", proxy=proxy.hex(), slot=slot)
            return False
        # committee does not match the published randomness: leader pays
        rec.leader_convicted = True
        rec.state = CANCELLED
        self.banned_users.add(rec.leader)
        leader_exec = self.executors.get(rec.leader)
        if leader_exec is not None:
            leader_exec.blacklisted = True
        self.credits[ctx.caller] = (self.credits.get(ctx.caller, 0)
                                    + rec.leader_deposit_wei)
        rec.leader_deposit_wei = 0
        ctx.emit("LeaderConvicted", proxy=proxy.hex(), leader=rec.leader.hex(),
                 offense=OFFENSE_BOGUS_COMMITTEE, reporter=ctx.caller.hex())
        return True

    def h_convict(self, ctx: CallContext, target: bytes, offense: bytes,
                  reporter: bytes, reimburse_fee_wei: int) -> None:
        rec = self._service_for_reporter_contract(ctx)
        if rec.state in TERMINAL_STATES:
            raise Revert("wrong-state")
        if target not in rec.committee:
            raise Revert("unknown-target")
        if target in rec.convicted:
            raise Revert("already-convicted")
        erec = self.executors[target]
        rec.convicted[target] = offense.decode("ascii", "replace")
        erec.blacklisted = True
        erec.locked_services -= 1  # the conviction ends this engagement
        confiscated = min(self.econ.deposit_unit_wei, erec.deposit_wei)
        erec.deposit_wei -= confiscated
        # gas reimbursement first, then the agreed split of the remainder
        reimbursed = min(reimburse_fee_wei, confiscated)
        rest = confiscated - reimbursed
        reporter_cut = reimbursed + rest * self.econ.reporter_share_bps // 10_000
        leader_cut = confiscated - reporter_cut
        self.credits[reporter] = self.credits.get(reporter, 0) + reporter_cut
        self.credits[rec.leader] = self.credits.get(rec.leader, 0) + leader_cut
        ctx.emit("ExecutorConvicted", proxy=rec.proxy.hex(),
                 executor=target.hex(), offense=rec.convicted[target],
                 reporter=reporter.hex(), reporter_wei=reporter_cut,
                 leader_wei=leader_cut)

    def h_withdraw(self, ctx: CallContext, amount_wei: int) -> None:
        if amount_wei <= 0:
            raise Revert("bad-amount")
        credit = self.credits.get(ctx.caller, 0)
        erec = self.executors.get(ctx.caller)
        free_deposit = 0
        if erec is not None:
            free_deposit = (erec.deposit_wei
                            - erec.locked_services * self.econ.deposit_unit_wei)
        if amount_wei > credit + free_deposit:
            raise Revert("locked-funds")
        take_credit = min(amount_wei, credit)
        if take_credit:
            self.credits[ctx.caller] = credit - take_credit
        if amount_wei > take_credit:
            erec.deposit_wei -= amount_wei - take_credit
        ctx.transfer(self.address, ctx.caller, amount_wei)
        ctx.emit("Withdrawn", account=ctx.caller.hex(), amount_wei=amount_wei)

    # -- runner-facing (not transactions) ----------------------------------

    def advance_service(self, proxy: Address, new_state: str) -> None:
        rec = self.services[proxy]
        if new_state not in _ALLOWED_TRANSITIONS.get(rec.state, set()):
            raise TimevaultError(
                f"bad-transition {rec.state} -> {new_state}")
        rec.state = new_state

    def is_available(self, addr: Address) -> bool:
        rec = self.executors.get(addr)
        return rec is not None and rec.is_available(self.econ.deposit_unit_wei)

    def credit_of(self, addr: Address) -> int:
        return self.credits.get(addr, 0)

    # -- internals ---------------------------------------------------------

    def _executor(self, addr: Address) -> ExecutorRecord:
        rec = self.executors.get(addr)
        if rec is None:
            raise Revert("not-registered")
        return rec

    @staticmethod
    def _checked_keys(service_pks: list) -> list[bytes]:
        keys: list[bytes] = []
        seen: set[bytes] = set()
        for key in service_pks:
            if not isinstance(key, bytes) or len(key) != 33:
                raise Revert("bad-key-length")
            if key in seen:
                raise Revert("duplicate-service-key")
            seen.add(key)
            keys.append(key)
        return keys

    def _service_for_reporter_contract(self, ctx: CallContext) -> ServiceRecord:
        """Resolve which service a convict() call speaks for.

        Only that service's proxy, or the supplemental the proxy itself
        deployed, may convict.
        """
        rec = self.services.get(ctx.caller)
        if rec is not None:
            return rec
        maybe = ctx.ledger.contracts.get(ctx.caller)
        if isinstance(maybe, SupplementalStore):
            proxy_obj = ctx.ledger.contracts.get(maybe.proxy)
            if (isinstance(proxy_obj, TimedProxy)
                    and proxy_obj.supplemental == ctx.caller
                    and maybe.proxy in self.services):
                return self.services[maybe.proxy]
        raise Revert("unauthorized")


# ------------------------------------------------------------------- proxy

class TimedProxy(Contract):
    kind = "proxy"

    SEL_FOLLOW = selector_of("follow(bytes32,uint)")
    SEL_LEAK = selector_of("leak(bytes32,bytes)")
    SEL_EXECUTE = selector_of("execute(bytes,bytes)")
    SEL_DEPLOY = selector_of("deploy(bytes,bytes)")

    HANDLERS = {
        SEL_FOLLOW: "h_follow",
        SEL_LEAK: "h_leak",
        SEL_EXECUTE: "h_execute",
        SEL_DEPLOY: "h_deploy",
    }
    GAS_OPS = {
        SEL_FOLLOW: "follow",
        SEL_LEAK: "leak",
        SEL_EXECUTE: "execute",
        SEL_DEPLOY: "deploy_supplemental",
    }

    def __init__(self, address: Address, leader: Address, bulletin: Address,
                 timer_start: int, timer_end: int):
        super().__init__(address)
        self.leader = leader
        self.bulletin = bulletin
        self.timer_start = timer_start
        self.timer_end = timer_end
        self.followers: list[FollowerEntry] = []
        self.executed: set[bytes] = set()
        self.leader_executed = False
        self.leaked_keys: dict[int, int] = {}  # slot -> published secret key
        self.supplemental: Optional[Address] = None
        self.watchdog: Optional[Address] = None
        self.executed_by: Optional[Address] = None
        self._busy = False

    def on_created(self, ctx: CallContext) -> None:
        # snapshot the registry now; selection is audited against this block
        ctx.call(self.bulletin, BulletinBoard.SEL_NOTIFY, [],
                 sender=self.address)

    # -- helpers -----------------------------------------------------------

    def _bulletin(self, ctx: CallContext) -> BulletinBoard:
        board = ctx.ledger.contracts.get(self.bulletin)
        if not isinstance(board, BulletinBoard):
            raise Revert("unknown-service")
        return board

    def _record(self, ctx: CallContext) -> ServiceRecord:
        rec = self._bulletin(ctx).services.get(self.address)
        if rec is None:
            raise Revert("service-not-led")
        return rec

    # -- handlers ----------------------------------------------------------

    def h_follow(self, ctx: CallContext, commitment: bytes, fee_wei: int) -> None:
        rec = self._record(ctx)
        econ = self._bulletin(ctx).econ
        if rec.state not in (SCHEDULED, WAITING):
            raise Revert("wrong-state")
        if ctx.block >= self.timer_start:
            raise Revert("window-closed")
        if len(commitment) != 32:
            raise Revert("bad-commitment")
        if fee_wei < econ.pool_fee_wei:
            raise Revert("fee-too-low")
        if ctx.value_wei < fee_wei:
            raise Revert("insufficient-fund")
        if any(entry.commitment == commitment for entry in self.followers):
            raise Revert("duplicate-commitment")
        self.followers.append(FollowerEntry(
            follower=ctx.caller, commitment=commitment,
            fee_wei=fee_wei, fund_wei=ctx.value_wei - fee_wei))
        ctx.emit("FollowerJoined", follower=ctx.caller.hex(),
                 commitment=commitment.hex(), fee_wei=fee_wei,
                 fund_wei=ctx.value_wei - fee_wei)

    def h_leak(self, ctx: CallContext, leaked_sk: bytes, service_pk: bytes) -> None:
        rec = self._record(ctx)
        if rec.state not in (SCHEDULED, WAITING):
            raise Revert("wrong-state")
        if len(leaked_sk) != 32:
            raise Revert("bad-key-length")
        try:
            slot = rec.assigned_pks.index(service_pk)
        except ValueError:
            raise Revert("unknown-key") from None
        member = rec.committee[slot]
        if member in rec.convicted:
            raise Revert("already-convicted")
        sk_int = int.from_bytes(leaked_sk, "big")
        try:
            genuine = sk_to_pk(sk_int) == service_pk
        except Exception:
            genuine = False
        if not genuine:
            raise Revert("bad-evidence")
        # evidence stands: the key is now public knowledge either way
        self.leaked_keys[slot] = sk_int
        ctx.call(self.bulletin, BulletinBoard.SEL_CONVICT,
                 [member, OFFENSE_LEAK.encode(), ctx.caller,
                  ctx.receipt.fee_wei],
                 sender=self.address)
        ctx.emit("KeyLeaked", slot=slot, executor=member.hex(),
                 reporter=ctx.caller.hex())

    def h_execute(self, ctx: CallContext, payload_bytes: bytes, sig: bytes) -> None:
        if self._busy:
            raise Revert("reentrant-call")
        self._busy = True
        try:
            self._execute_inner(ctx, payload_bytes, sig)
        finally:
            self._busy = False

    def _execute_inner(self, ctx: CallContext, payload_bytes: bytes,
                       sig: bytes) -> None:
        rec = self._record(ctx)
        if rec.state not in (EPOCH1, EPOCH2):
            raise Revert("wrong-state")
        if not self.timer_start <= ctx.block <= self.timer_end:
            raise Revert("outside-timer")
        if ctx.caller not in rec.committee or ctx.caller in rec.convicted:
            raise Revert("not-committee")
        digest = payload_commitment(payload_bytes)
        if digest in self.executed:
            raise Revert("payload-replay")
        try:
            payload = Payload.from_bytes(payload_bytes)
        except SerializationError:
            raise Revert("malformed-payload") from None

        entry: Optional[FollowerEntry] = None
        if sig:
            try:
                signer = verify(payload_signing_digest(self.address,
                                                       payload_bytes), sig)
            except MalformedSignature:
                raise Revert("bad-payload-signature") from None
            if signer != self.leader:
                raise Revert("bad-payload-signature")
            if self.leader_executed:
                raise Revert("payload-replay")
        else:
            for candidate in self.followers:
                if candidate.commitment == digest and not candidate.executed:
                    entry = candidate
                    break
            else:
                raise Revert("unauthorized-payload")
            if payload.value_wei > entry.fund_wei:
                raise Revert("payload-exceeds-fund")

        self._dispatch_payload(ctx, payload)

        self.executed.add(digest)
        if entry is None:
            self.leader_executed = True
        else:
            entry.executed = True
            entry.spent_wei = payload.value_wei
        if self.executed_by is None:
            self.executed_by = ctx.caller
        ctx.emit("PayloadExecuted", digest=digest.hex(),
                 source="leader" if entry is None else "follower",
                 by=ctx.caller.hex(), value_wei=payload.value_wei)

    def _dispatch_payload(self, ctx: CallContext, payload: Payload) -> None:
        if payload.kind == PAYLOAD_TRANSFER:
            if len(payload.to) != 20:
                raise Revert("bad-payload-target")
            ctx.transfer(self.address, payload.to, payload.value_wei)
        elif payload.kind == PAYLOAD_INVOKE:
            if len(payload.to) != 20 or len(payload.data) < 4:
                raise Revert("malformed-payload")
            args = encoding.decode(payload.data[4:]) if payload.data[4:] else []
            if not isinstance(args, list):
                raise Revert("malformed-payload")
            ctx.call(payload.to, payload.data[:4], args,
                     value_wei=payload.value_wei, sender=self.address)
        elif payload.kind == PAYLOAD_CREATE:
            try:
                items = encoding.decode(payload.data)
            except SerializationError:
                raise Revert("malformed-payload") from None
            if (not isinstance(items, list) or not items
                    or not isinstance(items[0], bytes)):
                raise Revert("malformed-payload")
            ctx.create(items[0].decode("ascii", "replace"), items[1:],
                       payload.value_wei, creator=self.address)
        else:
            raise Revert("bad-payload-kind")

    def h_deploy(self, ctx: CallContext, code: bytes, sig: bytes) -> None:
        rec = self._record(ctx)
        if rec.state != EPOCH2:
            raise Revert("wrong-state")
        if not (epoch_boundary(self.timer_start, self.timer_end) < ctx.block
                <= self.timer_end):
            raise Revert("outside-timer")
        if ctx.caller not in rec.committee or ctx.caller in rec.convicted:
            raise Revert("not-committee")
        if self.supplemental is not None:
            raise Revert("already-deployed")
        try:
            signer = verify(supplemental_signing_digest(self.address, code), sig)
        except MalformedSignature:
            raise Revert("bad-signature") from None
        if signer != self.leader:
            raise Revert("bad-signature")
        deadline = reveal_deadline(self.timer_start, self.timer_end)
        addr = ctx.create("supplemental",
                          [self.address, ctx.caller, deadline],
                          0, creator=self.address)
        self.supplemental = addr
        self.watchdog = ctx.caller
        ctx.emit("SupplementalDeployed", supplemental=addr.hex(),
                 watchdog=ctx.caller.hex(), reveal_deadline=deadline)


# -------------------------------------------------------------- supplemental

class SupplementalStore(Contract):
    kind = "supplemental"

    SEL_REVEAL = selector_of("reveal(bytes32)")
    SEL_MISSING = selector_of("missing(address)")
    SEL_FAKE = selector_of("fake(address)")

    HANDLERS = {
        SEL_REVEAL: "h_reveal",
        SEL_MISSING: "h_missing",
        SEL_FAKE: "h_fake",
    }
    GAS_OPS = {
        SEL_REVEAL: "reveal",
        SEL_MISSING: "missing",
        SEL_FAKE: "fake",
    }

    def __init__(self, address: Address, proxy: Address, watchdog: Address,
                 deadline: int):
        super().__init__(address)
        self.proxy = proxy
        self.watchdog = watchdog
        self.reveal_deadline = deadline
        self.revealed: dict[int, int] = {}  # slot -> claimed secret key

    def _record(self, ctx: CallContext) -> tuple[ServiceRecord, BulletinBoard]:
        proxy_obj = ctx.ledger.contracts.get(self.proxy)
        if not isinstance(proxy_obj, TimedProxy):
            raise Revert("unknown-service")
        board = ctx.ledger.contracts.get(proxy_obj.bulletin)
        if not isinstance(board, BulletinBoard):
            raise Revert("unknown-service")
        rec = board.services.get(self.proxy)
        if rec is None:
            raise Revert("unknown-service")
        return rec, board

    def h_reveal(self, ctx: CallContext, sk: bytes) -> None:
        rec, _ = self._record(ctx)
        if rec.state != EPOCH2:
            raise Revert("wrong-state")
        if ctx.block > self.reveal_deadline:
            raise Revert("reveal-window-closed")
        if ctx.caller not in rec.committee or ctx.caller in rec.convicted:
            raise Revert("not-committee")
        if len(sk) != 32:
            raise Revert("bad-key-length")
        slot = rec.slot_of(ctx.caller)
        # a later reveal replaces an earlier one; only the final value counts
        self.revealed[slot] = int.from_bytes(sk, "big")
        ctx.emit("KeyRevealed", slot=slot, executor=ctx.caller.hex())

    def _report_gate(self, ctx: CallContext, rec: ServiceRecord,
                     board: BulletinBoard, target: bytes) -> int:
        if rec.state != EPOCH2:
            raise Revert("wrong-state")
        if ctx.block <= self.reveal_deadline:
            raise Revert("reveal-window-open")
        if (ctx.caller != self.watchdog
                and ctx.block <= self.reveal_deadline
                + board.econ.watchdog_grace_blocks):
            raise Revert("watchdog-priority")
        if target not in rec.committee:
            raise Revert("unknown-target")
        if target in rec.convicted:
            raise Revert("already-convicted")
        return rec.slot_of(target)

    def h_missing(self, ctx: CallContext, target: bytes) -> None:
        rec, board = self._record(ctx)
        slot = self._report_gate(ctx, rec, board, target)
        if slot in self.revealed:
            raise Revert("key-was-revealed")
        ctx.call(board.address, BulletinBoard.SEL_CONVICT,
                 [target, OFFENSE_MISSING.encode(), ctx.caller,
                  ctx.receipt.fee_wei],
                 sender=self.address)
        ctx.emit("MissingReported", slot=slot, executor=target.hex(),
                 reporter=ctx.caller.hex())

    def h_fake(self, ctx: CallContext, target: bytes) -> None:
        rec, board = self._record(ctx)
        slot = self._report_gate(ctx, rec, board, target)
        sk = self.revealed.get(slot)
        if sk is None:
            raise Revert("no-key-stored")
        try:
            genuine = sk_to_pk(sk) == rec.assigned_pks[slot]
        except Exception:
            genuine = False
        if genuine:
            raise Revert("key-genuine")
        ctx.call(board.address, BulletinBoard.SEL_CONVICT,
                 [target, OFFENSE_FAKE.encode(), ctx.caller,
                  ctx.receipt.fee_wei],
                 sender=self.address)
        ctx.emit("FakeReported", slot=slot, executor=target.hex(),
                 reporter=ctx.caller.hex())


# ------------------------------------------------------------------- targets

class FlagBoard(Contract):
    """Trivial call target for scheduled invocations in tests and scenarios."""

    kind = "flag"

    SEL_SET = selector_of("set_flag(uint)")
    HANDLERS = {SEL_SET: "h_set"}
    GAS_OPS = {SEL_SET: "call_generic"}

    def __init__(self, address: Address):
        super().__init__(address)
        self.value = 0
        self.set_by: Optional[Address] = None
        self.set_count = 0

    def h_set(self, ctx: CallContext, value: int) -> None:
        self.value = value
        self.set_by = ctx.caller
        self.set_count += 1
        ctx.emit("FlagSet", value=value, by=ctx.caller.hex())


# ----------------------------------------------------------------- settlement

def settle_service(ledger: Ledger, bulletin_addr: Address,
                   proxy_addr: Address) -> list[tuple[str, dict]]:
    """Distribute escrowed funds once a service reached a terminal state.

    Runs as an internal routine (no transaction, no gas): remuneration for
    honest members, the execution bonus, leader deposit and pool release,
    follower refunds, leftovers to the leader. Idempotence is enforced via
    the record's settled flag.
    """
    board = ledger.contracts[bulletin_addr]
    proxy = ledger.contracts[proxy_addr]
    assert isinstance(board, BulletinBoard) and isinstance(proxy, TimedProxy)
    rec = board.services[proxy_addr]
    if rec.state not in TERMINAL_STATES:
        raise TimevaultError("settle before terminal state")
    if rec.settled:
        raise TimevaultError("service already settled")
    econ = board.econ
    events: list[tuple[str, dict]] = []

    for slot, member in enumerate(rec.committee):
        if member in rec.convicted:
            continue  # conviction already released the lock and the deposit
        erec = board.executors[member]
        erec.locked_services -= 1
        if rec.state == SUCCESS:
            pay = min(rec.pay_per_slot_wei[slot], rec.pool_wei)
            rec.pool_wei -= pay
            board.credits[member] = board.credits.get(member, 0) + pay
            record_success(erec, econ)
            events.append(("MemberPaid", {
                "executor": member.hex(), "slot": slot, "amount_wei": pay,
                "reputation": erec.reputation}))

    if rec.state == SUCCESS and proxy.executed_by is not None:
        bonus = min(econ.bonus_wei, rec.pool_wei)
        rec.pool_wei -= bonus
        board.credits[proxy.executed_by] = (
            board.credits.get(proxy.executed_by, 0) + bonus)
        events.append(("ExecutionBonus", {
            "executor": proxy.executed_by.hex(), "amount_wei": bonus}))

    released = rec.leader_deposit_wei + rec.pool_wei
    board.credits[rec.leader] = board.credits.get(rec.leader, 0) + released
    rec.leader_deposit_wei = 0
    rec.pool_wei = 0

    for entry in proxy.followers:
        refund = entry.fund_wei - entry.spent_wei
        if not entry.executed:
            refund += entry.fee_wei  # fee only sticks when the job was done
        if refund:
            ledger.internal_transfer(proxy_addr, entry.follower, refund)
        events.append(("FollowerSettled", {
            "follower": entry.follower.hex(), "executed": entry.executed,
            "refund_wei": refund}))

    # whatever is left in escrow (fees earned, unspent leader funding)
    remainder = ledger.balance_of(proxy_addr)
    if remainder:
        ledger.internal_transfer(proxy_addr, bulletin_addr, remainder)
        board.credits[rec.leader] = board.credits.get(rec.leader, 0) + remainder
    events.append(("ServiceSettled", {
        "proxy": proxy_addr.hex(), "state": rec.state,
        "leader_released_wei": released + remainder}))
    rec.settled = True
    return events


# ----------------------------------------------------------------- installers

BULLETIN_ADDRESS: Address = keccak256(b"executor-bulletin-board")[12:]


def proxy_factory(address: Address, ctor_args: list, ctx: CallContext) -> TimedProxy:
    if len(ctor_args) != 4:
        raise Revert("malformed-creation")
    leader, bulletin, timer_start, timer_end = ctor_args
    if (not isinstance(leader, bytes) or len(leader) != 20
            or not isinstance(bulletin, bytes) or len(bulletin) != 20
            or not isinstance(timer_start, int) or not isinstance(timer_end, int)):
        raise Revert("malformed-creation")
    if not ctx.block < timer_start < timer_end:
        raise Revert("bad-timer")
    return TimedProxy(address, leader, bulletin, timer_start, timer_end)


def supplemental_factory(address: Address, ctor_args: list,
                         ctx: CallContext) -> SupplementalStore:
    if len(ctor_args) != 3:
        raise Revert("malformed-creation")
    proxy, watchdog, deadline = ctor_args
    # only a proxy may instantiate its own supplemental store
    if ctx.caller != proxy:
        raise Revert("unauthorized")
    return SupplementalStore(address, proxy, watchdog, deadline)


def flag_factory(address: Address, ctor_args: list, ctx: CallContext) -> FlagBoard:
    return FlagBoard(address)


def install_protocol(ledger: Ledger, econ: Economics | None = None) -> Address:
    """Place the bulletin board as a genesis contract and register factories."""
    econ = econ or Economics()
    board = BulletinBoard(BULLETIN_ADDRESS, econ)
    ledger.install_genesis_contract(board)
    ledger.register_factory("proxy", proxy_factory)
    ledger.register_factory("supplemental", supplemental_factory)
    ledger.register_factory("flag", flag_factory)
    return BULLETIN_ADDRESS
