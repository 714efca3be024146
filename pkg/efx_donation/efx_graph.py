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
Working bundles, the EFX feasibility graph between agents and bundle slots, robust
demand, the priority matching both donation algorithms compute every round, and the
alternating-path walk that picks the agent who demands the next removal.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import AbstractSet, Dict, FrozenSet, Iterable, Optional, Tuple

import networkx as nx

from efx_donation.core import Allocation, Bundle, Instance, bundle_value
from efx_donation.errors import InputError, InvariantError, MatchingError, NoDemandError

logger = logging.getLogger("efx_donation.efx_graph")


@dataclass(frozen=True)
class WorkingBundles:
    """The bundles Z_1..Z_n carved out of an input allocation by removing items.

    removed[j] lists the items taken out of slot j in removal order; a slot is touched
    once anything has been removed from it.
    """

    origin: Allocation
    bundles: Tuple[Bundle, ...]
    removed: Tuple[Tuple[int, ...], ...]

    @classmethod
    def start(cls, x: Allocation) -> "WorkingBundles":
        return cls(x, x.bundles, tuple(() for _ in x.bundles))

    @property
    def n(self) -> int:
        return len(self.bundles)

    @property
    def touched_slots(self) -> FrozenSet[int]:
        return frozenset(j for j, r in enumerate(self.removed) if r)

    @property
    def untouched_slots(self) -> FrozenSet[int]:
        return frozenset(j for j, r in enumerate(self.removed) if not r)

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.bundles)

    def remove(self, slot: int, item: int) -> "WorkingBundles":
        bundles = list(self.bundles)
        bundles[slot] = bundles[slot].without(item)
        removed = list(self.removed)
        removed[slot] = removed[slot] + (item,)
        return WorkingBundles(self.origin, tuple(bundles), tuple(removed))


@dataclass(frozen=True)
class FeasibilityGraph:
    """Bipartite agent -> slot graph; (i, j) is an edge when slot j is EFX feasible for
    agent i and, off the diagonal, strictly better for i than her own slot.
    """

    n: int
    edges: FrozenSet[Tuple[int, int]]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def has_edge(self, agent: int, slot: int) -> bool:
        return (agent, slot) in self.edges

    def edges_of_slot(self, slot: int) -> FrozenSet[Tuple[int, int]]:
        return frozenset(e for e in self.edges if e[1] == slot)


@dataclass(frozen=True)
class Matching:
    """A partial injective agent -> slot assignment, kept sorted by agent."""

    pairs: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        agents = [a for a, _ in self.pairs]
        slots = [s for _, s in self.pairs]
        if len(set(agents)) != len(agents) or len(set(slots)) != len(slots):
            raise InputError(f"matching is not injective: {self.pairs}")
        if list(self.pairs) != sorted(self.pairs):
            raise InputError(f"matching pairs must be sorted by agent: {self.pairs}")

    @classmethod
    def of(cls, pairs: Iterable[Tuple[int, int]]) -> "Matching":
        return cls(tuple(sorted(pairs)))

    @classmethod
    def identity(cls, n: int) -> "Matching":
        return cls(tuple((i, i) for i in range(n)))

    def __len__(self) -> int:
        return len(self.pairs)

    def as_dict(self) -> Dict[int, int]:
        return dict(self.pairs)

    def slot_of(self, agent: int) -> Optional[int]:
        return self.as_dict().get(agent)

    def agent_of(self, slot: int) -> Optional[int]:
        for agent, matched in self.pairs:
            if matched == slot:
                return agent
        return None

    @property
    def matched_slots(self) -> FrozenSet[int]:
        return frozenset(s for _, s in self.pairs)

    @property
    def matched_agents(self) -> FrozenSet[int]:
        return frozenset(a for a, _ in self.pairs)

    @property
    def identity_count(self) -> int:
        return sum(1 for a, s in self.pairs if a == s)

    def is_perfect(self, n: int) -> bool:
        return len(self.pairs) == n

    def reassign(self, slot: int, agent: int) -> "Matching":
        """Hand slot to agent, dropping whichever pair held the slot before."""
        pairs = [(a, s) for a, s in self.pairs if s != slot and a != agent]
        return Matching.of(pairs + [(agent, slot)])


def robust_score(inst: Instance, agent: int, bundle: Bundle) -> Fraction:
    """max over c in bundle of v_agent(bundle - c); 0 for the empty bundle."""
    if not bundle.items:
        return Fraction(0)
    row = inst.values[agent]
    return bundle_value(inst, agent, bundle) - min(row[g] for g in bundle)


def efx_threshold(inst: Instance, Z: WorkingBundles, agent: int) -> Fraction:
    return max(robust_score(inst, agent, b) for b in Z.bundles)


def efx_feasible(inst: Instance, Z: WorkingBundles, i: int, j: int) -> bool:
    """True iff v_i(Z_j) >= max_k max_{g in Z_k} v_i(Z_k - g)."""
    if not (0 <= i < inst.n and 0 <= j < Z.n):
        raise InputError(f"agent {i} / slot {j} out of range")
    return bundle_value(inst, i, Z.bundles[j]) >= efx_threshold(inst, Z, i)


def build_graph(inst: Instance, Z: WorkingBundles) -> FeasibilityGraph:
    """Build the EFX feasibility graph of the working bundles.

    Arguments:
        inst: the instance whose valuations decide feasibility
        Z: the current working bundles, one slot per agent

    Returns:
        FeasibilityGraph: every (agent, slot) pair whose slot is EFX feasible for the
        agent and, for a slot other than her own, worth strictly more to her than her own
    """
    edges = set()
    for i in range(inst.n):
        threshold = efx_threshold(inst, Z, i)
        own = bundle_value(inst, i, Z.bundles[i])
        for j, bundle in enumerate(Z.bundles):
            worth = bundle_value(inst, i, bundle)
            if worth >= threshold and (i == j or worth > own):
                edges.add((i, j))
    return FeasibilityGraph(inst.n, frozenset(edges))


def robust_demand(inst: Instance, Z: WorkingBundles, i: int) -> Tuple[int, int]:
    """The slot maximizing i's value after dropping its single worst item, and that item.

    Ties go to the lowest slot, then to the lowest item id.  Empty slots have no item to
    give up and are never demanded.
    """
    best_slot: Optional[int] = None
    best_score = Fraction(-1)
    for j, bundle in enumerate(Z.bundles):
        if not bundle.items:
            continue
        score = robust_score(inst, i, bundle)
        if score > best_score:
            best_slot, best_score = j, score
    if best_slot is None:
        raise NoDemandError(f"agent {i} has no robust demand: every bundle is empty")
    row = inst.values[i]
    item = min(Z.bundles[best_slot], key=lambda g: (row[g], g))
    return best_slot, item


def edge_weight(n: int, agent: int, slot: int, touched: AbstractSet[int]) -> int:
    """1 + n^2 [identity] + n^4 [touched slot]: covering touched slots beats any number of
    identity pairs, which beats any number of extra pairs.
    """
    return 1 + n**2 * (agent == slot) + n**4 * (slot in touched)


def priority_matching(g: FeasibilityGraph, touched: AbstractSet[int]) -> Matching:
    """Matching that (a) covers every touched slot, (b) then maximizes identity pairs and
    (c) then maximizes its size; among those, the lexicographically smallest pair list.

    The priorities are the integer weights of edge_weight.  Each weight is scaled by
    (n+1)^n and a tie-break term (n - slot) * (n+1)^(n-1-agent) is added, which is
    largest for the lexicographically smallest pair list and never outweighs a unit of
    the priority weight, so a single maximum-weight matching answers all four criteria.
    """
    n = g.n
    base = n + 1
    scale = base**n
    graph = nx.Graph()
    for agent, slot in sorted(g.edges):
        tie = (n - slot) * base ** (n - 1 - agent)
        weight = edge_weight(n, agent, slot, touched) * scale + tie
        graph.add_edge(("agent", agent), ("slot", slot), weight=weight)
    pairs = []
    for u, v in nx.max_weight_matching(graph, maxcardinality=False, weight="weight"):
        agent_node, slot_node = (u, v) if u[0] == "agent" else (v, u)
        pairs.append((agent_node[1], slot_node[1]))
    matching = Matching.of(pairs)
    missing = set(touched) - matching.matched_slots
    if missing:
        raise MatchingError(
            f"no matching covers touched slots {sorted(missing)}", graph=g, touched=touched
        )
    logger.debug("matched %d of %d agents: %s", len(matching), n, matching.pairs)
    return matching


@dataclass(frozen=True)
class AugPath:
    """Alternating path from an unmatched slot Z_{j1}: identity edge to agent j1, matching
    edge to Z_{j2}, identity edge to j2, ... ending at the unmatched agent j_k.
    """

    agents: Tuple[int, ...]
    slots: Tuple[int, ...]
    m_edges: Tuple[Tuple[int, int], ...]

    @property
    def k(self) -> int:
        return len(self.agents)

    @property
    def end(self) -> int:
        return self.agents[-1]

    def owner_on_path(self, slot: int) -> Optional[int]:
        """Agent holding slot through a matching edge of the path, if any."""
        for agent, matched in self.m_edges:
            if matched == slot:
                return agent
        return None


def augmenting_path(m: Matching, start_slot: int) -> AugPath:
    """Walk the union of m with the identity matching from a free slot.

    Arguments:
        m: the current matching
        start_slot: a slot that m leaves unmatched

    Returns:
        AugPath: the agents j1 = start_slot, j2 = m(j1), ... up to the first agent that m
        leaves unmatched
    """
    if m.agent_of(start_slot) is not None:
        raise InputError(f"slot {start_slot} is matched; a path must start from a free slot")
    agents = [start_slot]
    m_edges = []
    matched = m.as_dict()
    while agents[-1] in matched:
        nxt = matched[agents[-1]]
        m_edges.append((agents[-1], nxt))
        if nxt in agents:
            raise InvariantError(f"alternating walk from slot {start_slot} revisits {nxt}")
        agents.append(nxt)
    return AugPath(tuple(agents), tuple(agents), tuple(m_edges))


@dataclass(frozen=True)
class Demand:
    """The item a round removes, who demanded it, and the matching after any swaps."""

    agent: int
    slot: int
    item: int
    path: AugPath
    matching: Matching
    swaps: Tuple[Tuple[int, int, int], ...] = ()  # (old, new, slot)


def path_demand(
    inst: Instance, Z: WorkingBundles, graph: FeasibilityGraph, matching: Matching
) -> Demand:
    """Choose the demanding agent of a round whose matching is not perfect.

    The walk starts at the lowest free slot j1.  While the robust demand of the path's
    end lies on the path, the end agent takes that slot over and the walk is repeated on
    the shorter path.  The agent left at the end demands a slot off the path.

    Arguments:
        inst: the instance
        Z: the working bundles of this round
        graph: the feasibility graph of Z
        matching: the priority matching of graph

    Returns:
        Demand: the agent, the slot and item she removes, the final path and matching
    """
    free = sorted(set(range(inst.n)) - matching.matched_slots)
    if not free:
        raise InputError("a perfect matching has no demanding agent")
    stray = Z.touched_slots & set(free)
    if stray:
        raise InvariantError(f"touched slots {sorted(stray)} are free")
    j1 = free[0]
    path = augmenting_path(matching, j1)
    swaps = []
    while True:
        j_k = path.end
        j_star, item = robust_demand(inst, Z, j_k)
        j_old = path.owner_on_path(j_star)
        if j_old is None:
            break
        if not graph.has_edge(j_k, j_star):
            raise InvariantError(f"swap edge ({j_k}, {j_star}) is not in the graph")
        matching = matching.reassign(j_star, j_k)
        swaps.append((j_old, j_k, j_star))
        shorter = augmenting_path(matching, j1)
        if shorter.k >= path.k or len(swaps) > inst.n:
            raise InvariantError("a swap did not shorten the augmenting path")
        path = shorter
    if j_star == j1:
        raise InvariantError(f"agent {j_k} demands the free slot {j1}")
    return Demand(j_k, j_star, item, path, matching, tuple(swaps))
