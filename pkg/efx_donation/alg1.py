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
Donation from a Nash-welfare-optimal allocation.

Starting from the input bundles, every round builds the EFX feasibility graph and its
priority matching.  A perfect matching ends the run.  Otherwise the agent at the end of the
alternating path from the lowest free slot names her robust demand, and her least valued
item in it is donated.  Algorithm 2 picks its agent the same way, so on an optimal input
the two runs remove the same items.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from efx_donation.core import (
    Allocation,
    Instance,
    agent_values,
    check_efx,
    nw_pow_n,
)
from efx_donation.efx_graph import (
    FeasibilityGraph,
    Matching,
    WorkingBundles,
    build_graph,
    path_demand,
    priority_matching,
)
from efx_donation.errors import InputError, InvariantError, MatchingError
from efx_donation.oracle import opt_bruteforce

logger = logging.getLogger("efx_donation.alg1")


@dataclass
class RoundRecord:
    """What one round saw and did."""

    index: int
    edge_count: int
    matching: Matching
    touched: FrozenSet[int]
    removal: Optional[Tuple[int, int, int]] = None  # (agent, slot, item)
    swaps: List[Tuple[int, int, int]] = field(default_factory=list)  # (old, new, slot)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "round": self.index,
            "edges": self.edge_count,
            "matching": [list(p) for p in self.matching.pairs],
            "touched": sorted(self.touched),
            "removal": list(self.removal) if self.removal else None,
            "swaps": [list(s) for s in self.swaps],
        }


@dataclass
class RunTrace:
    """Per-round ledger of a donation run, plus the restarts of the Algorithm 2 driver."""

    rounds: List[RoundRecord] = field(default_factory=list)
    restarts: List[Dict[str, Any]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rounds)

    @property
    def removals(self) -> List[Tuple[int, int, int]]:
        return [r.removal for r in self.rounds if r.removal is not None]

    def extend(self, other: "RunTrace") -> None:
        offset = len(self.rounds)
        for record in other.rounds:
            record.index += offset
            self.rounds.append(record)
        self.restarts.extend(other.restarts)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rounds": [r.to_dict() for r in self.rounds],
            "restarts": list(self.restarts),
        }

    def to_rows(self) -> List[List[str]]:
        """Table rows with 1-based agents, slots and items."""
        rows = []
        for record in self.rounds:
            matching = " ".join(f"{a + 1}->Z{s + 1}" for a, s in record.matching.pairs)
            touched = ",".join(f"Z{j + 1}" for j in sorted(record.touched)) or "-"
            swaps = " ".join(f"Z{s + 1}:{o + 1}->{w + 1}" for o, w, s in record.swaps) or "-"
            if record.removal:
                agent, slot, item = record.removal
                removal = f"agent {agent + 1} drops item {item + 1} from Z{slot + 1}"
            else:
                removal = "-"
            rows.append(
                [str(record.index + 1), str(record.edge_count), matching, touched, swaps, removal]
            )
        return rows


@dataclass
class Alg1Result:
    output: Allocation
    trace: RunTrace
    rounds: int
    final_matching: Matching
    untouched: FrozenSet[int]
    lemma_bounds_hold: bool

    @property
    def donated(self):
        return self.output.donated


def check_complete_input(inst: Instance, x: Allocation) -> None:
    x.check_fits(inst)
    if not x.is_complete:
        raise InputError(f"input allocation leaves items {x.donated.items} unallocated")


def matched_allocation(Z: WorkingBundles, matching: Matching, m: int) -> Allocation:
    """Y_i = Z_{M(i)} for a perfect matching M."""
    return Allocation(m, tuple(Z.bundles[matching.slot_of(i)] for i in range(Z.n)))


def check_round_transition(
    previous: FeasibilityGraph,
    current: FeasibilityGraph,
    removal: Tuple[int, int, int],
    trace: RunTrace,
) -> None:
    """Edges away from the shrunk slot survive a removal, and the demanding agent gains
    an edge to the slot she shrank.
    """
    agent, slot, _ = removal
    lost = {e for e in previous.edges if e[1] != slot} - current.edges
    if lost:
        raise InvariantError(f"edges {sorted(lost)} vanished after a removal from {slot}", trace)
    if not current.has_edge(agent, slot):
        raise InvariantError(f"agent {agent} has no edge to the slot {slot} she shrank", trace)


def lemma_bounds(inst: Instance, x: Allocation, y: Allocation) -> bool:
    """2 v_i(Y_i) >= v_i(X_i) for all i, with v_i(Y_i) >= v_i(X_i) for some i."""
    before = agent_values(inst, x)
    after = agent_values(inst, y)
    halves = all(2 * a >= b for a, b in zip(after, before))
    keeper = any(a >= b for a, b in zip(after, before))
    return halves and keeper


def run_alg1(
    inst: Instance,
    x: Allocation,
    assert_optimal: bool = False,
    oracle_cap: Optional[int] = None,
) -> Alg1Result:
    """Donate items from x until the feasibility graph has a perfect priority matching.

    With assert_optimal the oracle first certifies that x maximizes Nash welfare, and the
    efficiency guarantees become hard errors; otherwise a failed guarantee is only logged,
    since it depends on the optimality of x.
    """
    check_complete_input(inst, x)
    if assert_optimal:
        best = opt_bruteforce(inst, cap=oracle_cap).best_pow_n
        if nw_pow_n(inst, x) != best:
            raise InputError(f"input allocation has NW^n {nw_pow_n(inst, x)}, optimum is {best}")

    Z = WorkingBundles.start(x)
    trace = RunTrace()
    previous: Optional[FeasibilityGraph] = None
    last_removal: Optional[Tuple[int, int, int]] = None
    while True:
        if len(trace) > inst.m:
            raise InvariantError(f"no perfect matching after {inst.m + 1} rounds", trace)
        graph = build_graph(inst, Z)
        if previous is not None:
            check_round_transition(previous, graph, last_removal, trace)
        touched = Z.touched_slots
        try:
            matching = priority_matching(graph, touched)
        except MatchingError as err:
            raise InvariantError(f"round {len(trace) + 1}: {err}", trace) from err
        record = RoundRecord(len(trace), graph.edge_count, matching, touched)
        trace.rounds.append(record)
        if matching.is_perfect(inst.n):
            break

        try:
            demand = path_demand(inst, Z, graph, matching)
        except InvariantError as err:
            raise InvariantError(f"round {len(trace)}: {err}", trace) from err
        record.matching = demand.matching
        record.swaps.extend(demand.swaps)
        agent, slot, item = demand.agent, demand.slot, demand.item
        size_before = Z.size
        Z = Z.remove(slot, item)
        if Z.size >= size_before:
            raise InvariantError("a round removed nothing", trace)
        record.removal = (agent, slot, item)
        logger.debug("round %d: agent %d donates %d from slot %d", record.index, agent, item, slot)
        previous, last_removal = graph, record.removal

    y = matched_allocation(Z, matching, inst.m)
    if not check_efx(inst, y):
        raise InvariantError(f"output {y} is not EFX", trace)
    untouched = Z.untouched_slots

    guaranteed = (
        lemma_bounds(inst, x, y) and bool(untouched) and matching == Matching.identity(inst.n)
    )
    if not guaranteed:
        if assert_optimal:
            raise InvariantError("efficiency guarantee failed on an optimal input", trace)
        logger.warning("efficiency bound not guaranteed: input %s is not Nash-optimal", x)
    logger.info(
        "donated %s in %d rounds, NW^n %s -> %s",
        y.donated.items,
        len(trace),
        nw_pow_n(inst, x),
        nw_pow_n(inst, y),
    )
    return Alg1Result(y, trace, len(trace), matching, untouched, guaranteed)
