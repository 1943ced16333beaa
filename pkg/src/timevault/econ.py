"""Cost analytics: per-path USD totals, committee-size scaling, pooling.

Everything here is closed-form over the gas schedule; the simulator is the
cross-check (a run's metered fees must reproduce the analytic totals for
the same operation counts). Reports render as aligned text or as tab
separated records; both layouts are frozen.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .chain import WEI_PER_ETHER, GasSchedule
from .economics import Economics
from .errors import ConfigError

PATH_OPT = "OPT"
PATH_PES = "PES"
PATH_POOL = "POOL"

_PATHS = (PATH_OPT, PATH_PES, PATH_POOL)


@dataclass(frozen=True)
class CostLine:
    op: str
    count: int
    gas_each: int

    @property
    def gas(self) -> int:
        return self.count * self.gas_each


@dataclass(frozen=True)
class CostReport:
    path: str
    committee_size: int
    payload_count: int
    lines: tuple[CostLine, ...]
    schedule: GasSchedule

    @property
    def total_gas(self) -> int:
        return sum(line.gas for line in self.lines)

    @property
    def total_usd(self) -> float:
        return self.schedule.gas_to_usd(self.total_gas)

    def usd_of(self, line: CostLine) -> float:
        return self.schedule.gas_to_usd(line.gas)

    def party_usd(self) -> dict[str, float]:
        """Who funds which calls: the scheduling leader, the committee, or
        a pooling follower."""
        parties = {"leader": 0, "executors": 0, "follower": 0}
        for line in self.lines:
            if line.op in ("deploy_proxy", "lead"):
                parties["leader"] += line.gas
            elif line.op == "follow":
                parties["follower"] += line.gas
            else:
                parties["executors"] += line.gas
        return {who: self.schedule.gas_to_usd(gas)
                for who, gas in parties.items()}


def path_cost(path: str, committee_size: int, payload_count: int = 1,
              schedule: Optional[GasSchedule] = None,
              report_ops: Sequence[str] = ()) -> CostReport:
    """Gas and USD ledger for one execution path.

    The optimistic path is one escrow deployment, one committee
    registration, and one execution per payload. The pessimistic path adds
    the fallback store deployment and an on-chain key reveal per committee
    member (plus any conviction reports). A pooling follower only ever pays
    for its single join call.
    """
    schedule = schedule or GasSchedule()
    if path not in _PATHS:
        raise ConfigError(f"unknown path {path!r}")
    if committee_size < 1 or payload_count < 1:
        raise ConfigError("committee and payload counts must be positive")
    lines: list[CostLine] = []
    if path == PATH_POOL:
        lines.append(CostLine("follow", 1, schedule.gas_for("follow")))
    else:
        lines.append(CostLine("deploy_proxy", 1, schedule.gas_for("deploy_proxy")))
        lines.append(CostLine("lead", 1, schedule.gas_for("lead", committee_size)))
        lines.append(CostLine("execute", payload_count, schedule.gas_for("execute")))
        if path == PATH_PES:
            lines.append(CostLine("deploy_supplemental", 1,
                                  schedule.gas_for("deploy_supplemental")))
            lines.append(CostLine("reveal", committee_size,
                                  schedule.gas_for("reveal")))
            for op in report_ops:
                lines.append(CostLine(op, 1, schedule.gas_for(op)))
    return CostReport(path, committee_size, payload_count, tuple(lines), schedule)


def scaling_curve(path: str, sizes: Iterable[int], payload_count: int = 1,
                  schedule: Optional[GasSchedule] = None) -> list[tuple[int, float]]:
    """Total USD as a function of committee size."""
    return [(size, path_cost(path, size, payload_count, schedule).total_usd)
            for size in sizes]


def curve_slope(points: Sequence[tuple[int, float]]) -> float:
    """Least-squares slope in USD per committee member."""
    if len(points) < 2:
        raise ConfigError("need at least two points for a slope")
    n = len(points)
    mean_x = sum(x for x, _ in points) / n
    mean_y = sum(y for _, y in points) / n
    num = sum((x - mean_x) * (y - mean_y) for x, y in points)
    den = sum((x - mean_x) ** 2 for x, _ in points)
    return num / den


# ------------------------------------------------------------------- pooling

@dataclass(frozen=True)
class PoolingReport:
    committee_size: int
    follower_count: int
    fee_usd: float              # join fee each follower pays the leader
    follow_usd: float           # gas of the join call itself
    execute_usd: float          # gas of executing one more payload
    leader_total_usd: float     # what scheduling alone costs the leader
    leader_adjusted_usd: float  # leader total after collected join fees
    per_follower_usd: float     # a follower's own outlay: join gas + fee
    per_request_usd: float      # marginal cost of one more pooled request
    average_usd: float          # pooled run total over all requests


def pooling_report(committee_size: int, follower_count: int,
                   schedule: Optional[GasSchedule] = None,
                   economics: Optional[Economics] = None,
                   fee_usd: Optional[float] = None) -> PoolingReport:
    """Cost sharing when followers attach to one scheduled service.

    A pool with f followers executes f + 1 payloads inside one committee
    setup, so the setup cost amortizes: the average charges every request
    its own execution plus, for followers, the join call and the join fee,
    while the whole deployment-and-registration overhead is carried once.
    The leader-side view nets the collected fees against the setup cost.
    """
    if follower_count < 0:
        raise ConfigError("follower count must be non-negative")
    schedule = schedule or GasSchedule()
    economics = economics or Economics()
    if fee_usd is None:
        fee_usd = (economics.pool_fee_wei / WEI_PER_ETHER) * schedule.ether_usd
    follow_usd = schedule.gas_to_usd(schedule.gas_for("follow"))
    execute_usd = schedule.gas_to_usd(schedule.gas_for("execute"))
    leader_total = path_cost(PATH_OPT, committee_size, 1, schedule).total_usd
    f = follower_count
    per_request = follow_usd + fee_usd + execute_usd
    return PoolingReport(
        committee_size=committee_size,
        follower_count=f,
        fee_usd=fee_usd,
        follow_usd=follow_usd,
        execute_usd=execute_usd,
        leader_total_usd=leader_total,
        leader_adjusted_usd=leader_total - f * fee_usd,
        per_follower_usd=follow_usd + fee_usd,
        per_request_usd=per_request,
        average_usd=(leader_total + f * per_request) / (f + 1),
    )


def pooling_table(committee_size: int, follower_counts: Iterable[int],
                  schedule: Optional[GasSchedule] = None,
                  economics: Optional[Economics] = None,
                  fee_usd: Optional[float] = None) -> list[PoolingReport]:
    return [pooling_report(committee_size, f, schedule, economics, fee_usd)
            for f in follower_counts]


# ---------------------------------------------------------------- run checks

def run_total_usd(fees_by_account: dict[str, int],
                  schedule: Optional[GasSchedule] = None) -> float:
    """USD value of every fee a run actually burned."""
    schedule = schedule or GasSchedule()
    total_wei = sum(fees_by_account.values())
    return total_wei / WEI_PER_ETHER * schedule.ether_usd


def report_from_run(gas_by_op: dict[str, int],
                    schedule: Optional[GasSchedule] = None) -> list[CostLine]:
    """Metered per-op gas recast as cost lines (count folded into gas)."""
    schedule = schedule or GasSchedule()
    return [CostLine(op, 1, gas) for op, gas in sorted(gas_by_op.items())]


# ----------------------------------------------------------------- rendering

def _format_cell(value: object) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def render_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Aligned text table: two-space gutters, dashes under the header."""
    cells = [[_format_cell(v) for v in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    out = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    out.append("  ".join("-" * widths[i] for i in range(len(headers))))
    for row in cells:
        out.append("  ".join(cell.ljust(widths[i])
                             for i, cell in enumerate(row)).rstrip())
    return "\n".join(out) + "\n"


def render_tsv(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    out = ["\t".join(headers)]
    for row in rows:
        out.append("\t".join(_format_cell(v) for v in row))
    return "\n".join(out) + "\n"
