# EFX Donation Copyright (C) 2026 The EFX Donation Authors
#
# This program is free software: you can redistribute it and/or modify it under the terms
# of the GNU General Public License as published by the Free Software Foundation, either
# version 3 of the License, or (at your option) any later version.
#
# This program is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A
# PARTICULAR PURPOSE.  See the GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License along with this
# program. If not, see <http://www.gnu.org/licenses/>.

"""
Donation from an allocation that need not be Nash-optimal.

A step either ends with an EFX allocation whose agents each keep at least a
1/(2 + delta_1) share of their input value, or discovers an allocation whose Nash
welfare beats the input by a factor (1 + delta)^(1/n) and hands it back.  The driver
restarts on every such improvement until a step ends with EFX.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from efx_donation.alg1 import (
    RoundRecord,
    RunTrace,
    check_complete_input,
    matched_allocation,
)
from efx_donation.config import Settings
from efx_donation.core import (
    Allocation,
    Instance,
    agent_values,
    bundle_value,
    check_efx,
    format_rational,
    nw_pow_n,
    parse_rational,
)
from efx_donation.efx_graph import (
    AugPath,
    Matching,
    WorkingBundles,
    build_graph,
    path_demand,
    priority_matching,
)
from efx_donation.errors import InputError, InvariantError, MatchingError

logger = logging.getLogger("efx_donation.alg2")


@dataclass(frozen=True)
class DeltaSchedule:
    """delta and delta_1 = 2 delta / (1 - delta), tied by (2 + 2 d1) / (2 + d1) = 1 + delta."""

    delta: Fraction

    def __post_init__(self) -> None:
        if not 0 < self.delta < 1:
            raise InputError(f"delta must lie in (0, 1), got {self.delta}")
        if (2 + 2 * self.delta1) / (2 + self.delta1) != 1 + self.delta:
            raise InvariantError(f"delta_1 {self.delta1} does not match delta {self.delta}")

    @classmethod
    def default(cls, n: int) -> "DeltaSchedule":
        """delta = 1/(2n+1), which makes delta_1 = 1/n."""
        return cls(Fraction(1, 2 * n + 1))

    @classmethod
    def parse(cls, value, n: int) -> "DeltaSchedule":
        return cls.default(n) if value is None else cls(parse_rational(value))

    @property
    def delta1(self) -> Fraction:
        return 2 * self.delta / (1 - self.delta)


@dataclass
class Alg2Outcome:
    """Either an EFX allocation (kind "efx") or an improved complete allocation
    (kind "improved") together with the path and demanded slot that produced it.
    """

    kind: str
    output: Allocation
    trace: RunTrace
    path: Optional[AugPath] = None
    j_star: Optional[int] = None

    @property
    def is_efx(self) -> bool:
        return self.kind == "efx"


@dataclass
class DriverResult:
    output: Allocation
    restarts: int
    trace: RunTrace
    final_input: Allocation
    pow_n_ledger: List[Fraction] = field(default_factory=list)


def improved_allocation(
    x: Allocation, Z: WorkingBundles, path: AugPath, j_star: int
) -> Allocation:
    """Shift bundles one step down the path and give j_star's shrunk bundle to its end.

    X^_{j1} = X_{j1} + Z_{j2};  X^_{ji} = X_{ji} - Z_{ji} + Z_{j(i+1)};
    X^_{jk} = X_{jk} - Z_{jk} + Z_{j*};  X^_{j*} = X_{j*} - Z_{j*}.
    A path of one agent collapses to X^_{j1} = X_{j1} + Z_{j*}.
    """
    X, Zb = x.bundles, Z.bundles
    hat = list(X)
    js = path.agents
    if path.k == 1:
        hat[js[0]] = X[js[0]] | Zb[j_star]
    else:
        hat[js[0]] = X[js[0]] | Zb[js[1]]
        for pos in range(1, path.k - 1):
            j = js[pos]
            hat[j] = (X[j] - Zb[j]) | Zb[js[pos + 1]]
        end = js[-1]
        hat[end] = (X[end] - Zb[end]) | Zb[j_star]
    hat[j_star] = X[j_star] - Zb[j_star]
    return Allocation(x.m, tuple(hat))


def _efx_outcome(
    inst: Instance, x: Allocation, Z: WorkingBundles, matching: Matching, sched, trace
) -> Alg2Outcome:
    y = matched_allocation(Z, matching, inst.m)
    if not check_efx(inst, y):
        raise InvariantError(f"output {y} is not EFX", trace)
    factor = 2 + sched.delta1
    before = agent_values(inst, x)
    after = agent_values(inst, y)
    if not all(factor * a >= b for a, b in zip(after, before)):
        raise InvariantError(f"some agent keeps less than 1/{factor} of her value", trace)
    if not Z.untouched_slots:
        raise InvariantError("every bundle was touched", trace)
    logger.info("EFX after %d rounds, donated %s", len(trace), y.donated.items)
    return Alg2Outcome("efx", y, trace)


def alg2_step(inst: Instance, x: Allocation, sched: DeltaSchedule) -> Alg2Outcome:
    """Donate items from x until the priority matching is perfect, or stop early when a
    slot falls below 1/(2 + delta_1) of its input value.

    Arguments:
        inst: the instance
        x: a complete allocation of inst
        sched: delta and delta_1

    Returns:
        Alg2Outcome: kind "efx" with the EFX output, or kind "improved" with an allocation
        whose Nash product is at least (1 + delta) times that of x
    """
    check_complete_input(inst, x)
    Z = WorkingBundles.start(x)
    trace = RunTrace()
    factor = 2 + sched.delta1
    while True:
        if len(trace) > inst.m:
            raise InvariantError(f"no perfect matching after {inst.m + 1} rounds", trace)
        graph = build_graph(inst, Z)
        touched = Z.touched_slots
        try:
            matching = priority_matching(graph, touched)
        except MatchingError as err:
            raise InvariantError(f"round {len(trace) + 1}: {err}", trace) from err
        record = RoundRecord(len(trace), graph.edge_count, matching, touched)
        trace.rounds.append(record)
        if matching.is_perfect(inst.n):
            return _efx_outcome(inst, x, Z, matching, sched, trace)

        try:
            demand = path_demand(inst, Z, graph, matching)
        except InvariantError as err:
            raise InvariantError(f"round {len(trace)}: {err}", trace) from err
        record.matching = demand.matching
        record.swaps.extend(demand.swaps)
        path, j_k, j_star, item = demand.path, demand.agent, demand.slot, demand.item

        Z = Z.remove(j_star, item)
        record.removal = (j_k, j_star, item)
        logger.debug("round %d: agent %d donates %d from slot %d", record.index, j_k, item, j_star)
        kept = bundle_value(inst, j_star, Z.bundles[j_star])
        if factor * kept < bundle_value(inst, j_star, x.bundles[j_star]):
            x_hat = improved_allocation(x, Z, path, j_star)
            if nw_pow_n(inst, x_hat) < (1 + sched.delta) * nw_pow_n(inst, x):
                raise InvariantError(f"improved allocation {x_hat} gains too little", trace)
            logger.info("slot %d fell below 1/%s of its value: %s", j_star, factor, x_hat)
            return Alg2Outcome("improved", x_hat, trace, path, j_star)


def restart_cap(n: int, rho_bound: Fraction, factor: int) -> int:
    return math.ceil(factor * n * n * Fraction(rho_bound))


def alg2_driver(
    inst: Instance,
    x0: Allocation,
    delta: Optional[Fraction] = None,
    rho_bound: Fraction = Fraction(1),
    restart_factor: Optional[int] = None,
) -> DriverResult:
    """Run alg2_step, replacing the input with each improved allocation, until a step ends
    with EFX.

    rho_bound is any upper bound on rho, the factor by which x0 falls short of optimal in
    Nash welfare; opt^n / NW(x0)^n qualifies.  It only sizes the restart tripwire
    ceil(c * n^2 * rho_bound).
    """
    sched = DeltaSchedule.parse(delta, inst.n)
    factor = Settings.from_env().restart_factor if restart_factor is None else restart_factor
    cap = restart_cap(inst.n, rho_bound, factor)
    trace = RunTrace()
    x = x0
    ledger = [nw_pow_n(inst, x0)]
    restarts = 0
    while True:
        outcome = alg2_step(inst, x, sched)
        trace.extend(outcome.trace)
        if outcome.is_efx:
            logger.info("driver finished after %d restarts", restarts)
            return DriverResult(outcome.output, restarts, trace, x, ledger)
        restarts += 1
        ledger.append(nw_pow_n(inst, outcome.output))
        trace.restarts.append(_restart_entry(restarts, outcome, ledger))
        if restarts > cap:
            raise InvariantError(f"more than {cap} restarts", trace)
        x = outcome.output


def _restart_entry(number: int, outcome: Alg2Outcome, ledger: List[Fraction]) -> Dict:
    return {
        "restart": number,
        "after_round": len(outcome.trace),
        "path": list(outcome.path.agents),
        "j_star": outcome.j_star,
        "nw_pow_n": format_rational(ledger[-1]),
    }
