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
Instance generators, large-market checks and the envy-cycle completion of donated items.

Random instances come from numpy's PCG64 generator seeded with the caller's integer, so a
seed pins the valuation matrix on every platform.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from efx_donation.core import (
    Allocation,
    Bundle,
    Instance,
    RationalLike,
    bundle_value,
    check_ef1,
    nw_pow_n,
    parse_rational,
)
from efx_donation.errors import GenerationError, InputError, InvariantError

logger = logging.getLogger("efx_donation.instances")


@dataclass(frozen=True)
class LargeMarketCheck:
    """Result of a large-market test.

    tightest_eps is the smallest parameter for which the condition holds and witness the
    (agent, item) pair attaining it.  flagged lists agents skipped because their bundle is
    empty.
    """

    holds: bool
    tightest_eps: Fraction
    witness: Optional[Tuple[int, int]] = None
    flagged: Tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.holds


def _check_eps(eps: Fraction) -> Fraction:
    eps = parse_rational(eps)
    if not 0 < eps < 1:
        raise InputError(f"eps must lie in (0, 1), got {eps}")
    return eps


def lower_bound_instance(n: int, eps: RationalLike) -> Instance:
    """2n - 1 items; every agent values items 0..n-2 at 1, agent i values item 2n - 2 - i
    at 1 - eps and everything else at eps / 2n.

    No EFX allocation, partial or complete, reaches more than a 2^(1 - 1/n) fraction of
    the optimal Nash welfare on this family as eps goes to 0.
    """
    if n < 2:
        raise InputError(f"the lower-bound family needs n >= 2, got {n}")
    eps = _check_eps(eps)
    m = 2 * n - 1
    small = eps / (2 * n)
    rows = []
    for i in range(n):
        row = []
        for g in range(m):
            if g < n - 1:
                row.append(Fraction(1))
            elif g == 2 * n - 2 - i:
                row.append(1 - eps)
            else:
                row.append(small)
        rows.append(tuple(row))
    return Instance(tuple(rows))


def lower_bound_reference_allocation(n: int) -> Allocation:
    """Agent i < n-1 gets {i, 2n-2-i}; the last agent gets {n-1}."""
    if n < 2:
        raise InputError(f"the lower-bound family needs n >= 2, got {n}")
    bundles = [Bundle.of((i, 2 * n - 2 - i)) for i in range(n - 1)]
    bundles.append(Bundle((n - 1,)))
    return Allocation(2 * n - 1, tuple(bundles))


def lower_bound_opt_pow_n(n: int, eps: RationalLike) -> Fraction:
    eps = _check_eps(eps)
    return (2 - eps) ** (n - 1) * (1 - eps)


def check_large_market(inst: Instance, eps: RationalLike) -> LargeMarketCheck:
    """v_i(g) <= (eps / n) v_i(M) for every agent i and item g."""
    eps = parse_rational(eps)
    if inst.m == 0:
        return LargeMarketCheck(True, Fraction(0))
    tightest = Fraction(-1)
    witness = None
    for i, row in enumerate(inst.values):
        total = sum(row, Fraction(0))
        for g, value in enumerate(row):
            ratio = inst.n * value / total
            if ratio > tightest:
                tightest, witness = ratio, (i, g)
    return LargeMarketCheck(tightest <= eps, tightest, witness)


def check_large_market_wrt(inst: Instance, x: Allocation, eps: RationalLike) -> LargeMarketCheck:
    """v_i(g) <= eps v_i(X_i) for every agent i and item g in X_i.

    Agents with an empty bundle impose nothing; they are skipped and listed in flagged.
    """
    eps = parse_rational(eps)
    x.check_fits(inst)
    if not x.is_complete:
        raise InputError(f"allocation leaves items {x.donated.items} unallocated")
    tightest = Fraction(0)
    witness = None
    flagged = []
    for i, bundle in enumerate(x.bundles):
        if not bundle.items:
            flagged.append(i)
            continue
        own = bundle_value(inst, i, bundle)
        for g in bundle:
            ratio = inst.values[i][g] / own
            if ratio > tightest:
                tightest, witness = ratio, (i, g)
    if flagged:
        logger.warning("agents %s hold empty bundles and were skipped", flagged)
    return LargeMarketCheck(tightest <= eps, tightest, witness, tuple(flagged))


def eps_convert(eps: RationalLike, n: int) -> Fraction:
    """eps' = eps / (1 - ((n - 1) / n) eps): a market large with eps in total value is
    large with eps' with respect to every Nash-optimal bundle.
    """
    eps = parse_rational(eps)
    if not 0 < eps <= 1 or n < 1:
        raise InputError(f"eps_convert needs 0 < eps <= 1 and n >= 1, got eps={eps}, n={n}")
    denominator = 1 - Fraction(n - 1, n) * eps
    if denominator <= 0:
        raise InputError(f"eps' is undefined for eps={eps}, n={n}")
    return eps / denominator


def grid_root(eps: RationalLike, step: RationalLike = Fraction(1, 20)) -> Fraction:
    """Smallest positive multiple s of step with s^2 >= eps."""
    eps = parse_rational(eps)
    step = parse_rational(step)
    if step <= 0:
        raise InputError("grid step must be positive")
    s = step
    while s * s < eps:
        s += step
    return s


def large_market_guarantee_holds(
    inst: Instance, x: Allocation, y: Allocation, s: RationalLike
) -> bool:
    """(1 + 8s)^n NW(y)^n >= NW(x)^n, for a market large with eps = s^2."""
    s = parse_rational(s)
    return (1 + 8 * s) ** inst.n * nw_pow_n(inst, y) >= nw_pow_n(inst, x)


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _draw_row(rng: np.random.Generator, m: int, max_value: int) -> Tuple[Fraction, ...]:
    return tuple(Fraction(int(v)) for v in rng.integers(1, max_value + 1, size=m))


def random_instance(n: int, m: int, max_value: int, seed: int) -> Instance:
    """Valuations drawn uniformly from 1..max_value, row by row, with PCG64(seed)."""
    if n < 1 or m < 1 or max_value < 1:
        raise InputError(f"need n, m, max_value >= 1, got {n}, {m}, {max_value}")
    rng = _generator(seed)
    return Instance(tuple(_draw_row(rng, m, max_value) for _ in range(n)))


def random_large_market_instance(
    n: int,
    m: int,
    eps: RationalLike,
    seed: int,
    max_value: int = 20,
    max_attempts: int = 1000,
) -> Instance:
    """Like random_instance, but every row is redrawn until it satisfies the large-market
    condition with eps.
    """
    eps = parse_rational(eps)
    if n < 1 or m < 1 or max_value < 1:
        raise InputError(f"need n, m, max_value >= 1, got {n}, {m}, {max_value}")
    if eps < Fraction(n, m):
        raise GenerationError(f"no instance with {n} agents and {m} items is large with eps={eps}")
    rng = _generator(seed)
    rows: List[Tuple[Fraction, ...]] = []
    attempts = 0
    while len(rows) < n:
        if attempts >= max_attempts:
            raise GenerationError(
                f"gave up after {max_attempts} draws for n={n}, m={m}, eps={eps}"
            )
        attempts += 1
        row = _draw_row(rng, m, max_value)
        if n * max(row) <= eps * sum(row):
            rows.append(row)
    logger.debug("large-market instance after %d row draws", attempts)
    return Instance(tuple(rows))


def envy_graph(inst: Instance, a: Allocation) -> nx.DiGraph:
    """Edge i -> j whenever agent i strictly prefers X_j to X_i."""
    a.check_fits(inst)
    graph = nx.DiGraph()
    graph.add_nodes_from(range(inst.n))
    own = [bundle_value(inst, i, b) for i, b in enumerate(a.bundles)]
    for i in range(inst.n):
        for j in range(inst.n):
            if i != j and bundle_value(inst, i, a.bundles[j]) > own[i]:
                graph.add_edge(i, j)
    return graph


def _eliminate_cycles(inst: Instance, bundles: List[Bundle]) -> List[Bundle]:
    while True:
        graph = envy_graph(inst, Allocation(inst.m, tuple(bundles)))
        try:
            cycle = nx.find_cycle(graph)
        except nx.NetworkXNoCycle:
            return bundles
        rotated = list(bundles)
        for envier, envied in cycle:
            rotated[envier] = bundles[envied]
        logger.debug("rotated bundles along %s", [u for u, _ in cycle])
        bundles = rotated


def ef1_complete(inst: Instance, y: Allocation) -> Allocation:
    """Hand every donated item, lowest id first, to an agent nobody envies.

    Envy cycles are rotated away before each placement, so an unenvied agent always
    exists; ties go to the lowest agent index.
    """
    y.check_fits(inst)
    if not check_ef1(inst, y):
        raise InputError(f"{y} is not EF1; the envy-cycle completion needs an EF1 start")
    donated: Sequence[int] = y.donated.items
    if not donated:
        return y
    bundles = list(y.bundles)
    for item in donated:
        bundles = _eliminate_cycles(inst, bundles)
        graph = envy_graph(inst, Allocation(inst.m, tuple(bundles)))
        sources = [i for i in range(inst.n) if graph.in_degree(i) == 0]
        if not sources:
            raise InvariantError(f"no unenvied agent for item {item}")
        receiver = min(sources)
        bundles[receiver] = bundles[receiver] | Bundle((item,))
        logger.debug("item %d goes to agent %d", item, receiver)
    completed = Allocation(inst.m, tuple(bundles))
    if not check_ef1(inst, completed):
        raise InvariantError(f"completion {completed} is not EF1")
    return completed

