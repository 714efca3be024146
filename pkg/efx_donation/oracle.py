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
Brute-force ground truth for small instances.

Assignments are item -> agent vectors enumerated as a mixed-radix counter in
lexicographic order, so the first maximizer met is the lexicographically smallest one.
Searches run on integer-scaled valuation rows (see core.integer_rows) and translate the
winning product back to the instance's own units.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

from efx_donation.config import default_oracle_cap
from efx_donation.core import (
    Allocation,
    Bundle,
    Instance,
    bundles_from_assignment,
    integer_rows,
)
from efx_donation.errors import InputError, ResourceError

logger = logging.getLogger("efx_donation.oracle")


@dataclass(frozen=True)
class OracleResult:
    """Best product found, the allocation attaining it, and how many assignments were
    examined.  argmax is None only when a restricted search admits no candidate.
    """

    best_pow_n: Fraction
    argmax: Optional[Allocation]
    enumerated: int
    assignment: Optional[Tuple[int, ...]] = None

    @staticmethod
    def merge(parts: Sequence["OracleResult"]) -> "OracleResult":
        """Combine results of disjoint ranges of one search.  Ties go to the
        lexicographically smallest assignment vector, as in a sequential scan.
        """
        best: Optional[OracleResult] = None
        for part in parts:
            if part.assignment is None:
                continue
            if (
                best is None
                or part.best_pow_n > best.best_pow_n
                or (part.best_pow_n == best.best_pow_n and part.assignment < best.assignment)
            ):
                best = part
        enumerated = sum(part.enumerated for part in parts)
        if best is None:
            return OracleResult(Fraction(0), None, enumerated, None)
        return OracleResult(best.best_pow_n, best.argmax, enumerated, best.assignment)


def _guard(required: int, cap: Optional[int]) -> None:
    cap = default_oracle_cap() if cap is None else cap
    if required > cap:
        raise ResourceError(required, cap)


def _ranges(total: int, chunks: int) -> List[Tuple[int, int]]:
    chunks = max(1, min(chunks, total)) if total else 1
    step = math.ceil(total / chunks) if total else 0
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)] or [(0, 0)]


def _assignments(radix: int, length: int, lo: int, hi: int) -> Iterator[Tuple[int, ...]]:
    return itertools.islice(itertools.product(range(radix), repeat=length), lo, hi)


def _products(rows: List[List[int]], items: Sequence[int], assignment: Sequence[int]) -> List[int]:
    totals = [0] * len(rows)
    for g, owner in zip(items, assignment):
        if owner < len(rows):
            totals[owner] += rows[owner][g]
    return totals


def _is_efx(rows: List[List[int]], held: List[List[int]], totals: List[int]) -> bool:
    n = len(rows)
    for i in range(n):
        row = rows[i]
        for j in range(n):
            if i == j or not held[j]:
                continue
            # the largest v_i(X_j - g) drops i's least valued item of X_j
            worth = sum(row[g] for g in held[j]) - min(row[g] for g in held[j])
            if totals[i] < worth:
                return False
    return True


def _scan(
    inst: Instance,
    items: Sequence[int],
    radix: int,
    lo: int,
    hi: int,
    efx_only: bool,
) -> OracleResult:
    rows, scales = integer_rows(inst)
    n = inst.n
    best_int = -1
    best_vec: Optional[Tuple[int, ...]] = None
    count = 0
    for vec in _assignments(radix, len(items), lo, hi):
        count += 1
        totals = _products(rows, items, vec)
        product = math.prod(totals)
        if product <= best_int:
            continue
        if efx_only:
            held: List[List[int]] = [[] for _ in range(n)]
            for g, owner in zip(items, vec):
                if owner < n:
                    held[owner].append(g)
            if not _is_efx(rows, held, totals):
                continue
        best_int = product
        best_vec = vec
    if best_vec is None:
        return OracleResult(Fraction(0), None, count, None)
    best = Fraction(best_int, math.prod(scales))
    argmax = bundles_from_assignment(n, inst.m, items, best_vec)
    return OracleResult(best, argmax, count, tuple(best_vec))


def _search(
    inst: Instance, items: Sequence[int], radix: int, efx_only: bool, chunks: int
) -> OracleResult:
    total = radix ** len(items)
    parts = [_scan(inst, items, radix, lo, hi, efx_only) for lo, hi in _ranges(total, chunks)]
    return OracleResult.merge(parts)


def opt_bruteforce(
    inst: Instance, S: Optional[Bundle] = None, cap: Optional[int] = None, chunks: int = 1
) -> OracleResult:
    """Maximum Nash welfare (as NW^n) over all complete allocations of S.

    S defaults to every item.  The search covers n^|S| assignments; ResourceError is
    raised when that exceeds the cap (EFX_ORACLE_CAP unless given).
    """
    items = list(range(inst.m)) if S is None else list(S)
    for g in items:
        if not 0 <= g < inst.m:
            raise InputError(f"item {g} out of range for {inst.m} items")
    _guard(inst.n ** len(items), cap)
    result = _search(inst, items, inst.n, efx_only=False, chunks=chunks)
    logger.debug(
        "opt over %d items: %s after %d assignments",
        len(items),
        result.best_pow_n,
        result.enumerated,
    )
    return result


def best_efx_bruteforce(
    inst: Instance, cap: Optional[int] = None, chunks: int = 1, complete_only: bool = False
) -> OracleResult:
    """Best Nash product among EFX allocations.

    By default every item may also be donated, so (n+1)^m partial assignments are
    searched and digit n means "donated".  With complete_only only the n^m complete
    assignments are searched and argmax is None when no complete EFX allocation exists.
    """
    radix = inst.n if complete_only else inst.n + 1
    _guard(radix**inst.m, cap)
    result = _search(inst, list(range(inst.m)), radix, efx_only=True, chunks=chunks)
    logger.debug("best EFX product %s after %d assignments", result.best_pow_n, result.enumerated)
    return result


def pareto_optimal_bruteforce(
    inst: Instance, a: Allocation, cap: Optional[int] = None
) -> Tuple[bool, Optional[Allocation]]:
    """Decide whether some allocation of a's item set Pareto-dominates a.

    Returns (True, None) when a is Pareto-optimal, else (False, first dominator found).
    """
    a.check_fits(inst)
    items = list(a.allocated_set)
    _guard(inst.n ** len(items), cap)
    rows, _ = integer_rows(inst)
    current = _products(rows, items, [a.owner(g) for g in items])
    for vec in itertools.product(range(inst.n), repeat=len(items)):
        totals = _products(rows, items, vec)
        if all(x >= y for x, y in zip(totals, current)) and any(
            x > y for x, y in zip(totals, current)
        ):
            dominator = bundles_from_assignment(inst.n, inst.m, items, vec)
            logger.debug("%s is dominated by %s", a, dominator)
            return False, dominator
    return True, None
