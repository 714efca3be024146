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

"""Complete allocations to feed the donation algorithms."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

import numpy as np

from efx_donation.core import Allocation, Bundle, Instance, nw_pow_n
from efx_donation.errors import InputError
from efx_donation.oracle import opt_bruteforce

logger = logging.getLogger("efx_donation.seeding")


@dataclass(frozen=True)
class SeedReport:
    """A complete allocation, its NW^n, the method that produced it and how many
    improving moves it took.
    """

    allocation: Allocation
    pow_n: Fraction
    method: str
    moves: int = 0

    @classmethod
    def of(cls, inst: Instance, allocation: Allocation, method: str, moves: int = 0):
        return cls(allocation, nw_pow_n(inst, allocation), method, moves)


def oracle_seed(inst: Instance, cap: Optional[int] = None) -> SeedReport:
    result = opt_bruteforce(inst, cap=cap)
    return SeedReport(result.argmax, result.best_pow_n, "oracle")


def file_seed(inst: Instance, allocation: Allocation) -> SeedReport:
    allocation.check_fits(inst)
    if not allocation.is_complete:
        raise InputError(f"seed allocation leaves items {allocation.donated.items} unallocated")
    return SeedReport.of(inst, allocation, "file")


def round_robin_seed(inst: Instance) -> SeedReport:
    """Agents 0..n-1 take turns picking their most valued remaining item (lowest id on
    ties) until nothing is left.
    """
    remaining = list(range(inst.m))
    held: List[List[int]] = [[] for _ in range(inst.n)]
    turn = 0
    while remaining:
        row = inst.values[turn]
        pick = max(remaining, key=lambda g: (row[g], -g))
        remaining.remove(pick)
        held[turn].append(pick)
        turn = (turn + 1) % inst.n
    return SeedReport.of(inst, Allocation.of(inst.m, held), "round-robin")


def _owners(a: Allocation) -> List[int]:
    return [a.owner(g) for g in range(a.m)]


def _from_owners(inst: Instance, owners: List[int]) -> Allocation:
    held: List[List[int]] = [[] for _ in range(inst.n)]
    for g, owner in enumerate(owners):
        held[owner].append(g)
    return Allocation(inst.m, tuple(Bundle(tuple(b)) for b in held))


def _first_improvement(inst: Instance, owners: List[int], current: Fraction) -> Optional[List[int]]:
    """Scan single-item moves, then pairwise swaps, in lexicographic order; return the
    first neighbour with a strictly larger product.
    """
    for g in range(inst.m):
        for target in range(inst.n):
            if target == owners[g]:
                continue
            candidate = list(owners)
            candidate[g] = target
            if nw_pow_n(inst, _from_owners(inst, candidate)) > current:
                return candidate
    for g in range(inst.m):
        for h in range(g + 1, inst.m):
            if owners[g] == owners[h]:
                continue
            candidate = list(owners)
            candidate[g], candidate[h] = owners[h], owners[g]
            if nw_pow_n(inst, _from_owners(inst, candidate)) > current:
                return candidate
    return None


def local_search_seed(inst: Instance, start: Allocation) -> SeedReport:
    """Hill-climb Nash welfare from start with first-improvement moves and swaps."""
    file_seed(inst, start)
    owners = _owners(start)
    current = nw_pow_n(inst, start)
    moves = 0
    while True:
        better = _first_improvement(inst, owners, current)
        if better is None:
            break
        owners = better
        current = nw_pow_n(inst, _from_owners(inst, owners))
        moves += 1
    logger.debug("local search stopped after %d moves at NW^n %s", moves, current)
    return SeedReport(_from_owners(inst, owners), current, "local-search", moves)


def perturbed_seed(inst: Instance, start: Allocation, moves: int, seed: int) -> SeedReport:
    """Move `moves` random items to random other agents, keeping the allocation complete.

    Used to build deliberately suboptimal inputs from an optimum.
    """
    file_seed(inst, start)
    if inst.n < 2 or inst.m == 0:
        return SeedReport.of(inst, start, "perturbed")
    rng = np.random.Generator(np.random.PCG64(seed))
    owners = _owners(start)
    for _ in range(moves):
        g = int(rng.integers(0, inst.m))
        shift = int(rng.integers(1, inst.n))
        owners[g] = (owners[g] + shift) % inst.n
    return SeedReport.of(inst, _from_owners(inst, owners), "perturbed", moves)
