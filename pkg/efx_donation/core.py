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
Exact-rational data model shared by the rest of the package: instances, bundles and
allocations, the EF / EF1 / EFX checkers, Nash welfare arithmetic and Pareto dominance.

Nash welfare is never rooted.  Every comparison is made on its n-th power, the product
of the agents' bundle values, which keeps all arithmetic inside Fraction.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from efx_donation.errors import InputError, UndefinedRatioError

RationalLike = Union[Fraction, int, str]


def parse_rational(value: RationalLike) -> Fraction:
    """Parse "p/q", a decimal literal or an integer into an exact Fraction.

    Decimal literals are read as exact decimal fractions, so "0.1" is 1/10.
    """
    if isinstance(value, bool):
        raise InputError(f"not a rational literal: {value!r}")
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as err:
            raise InputError(f"not a rational literal: {value!r}") from err
    raise InputError(f"not a rational literal: {value!r}")


def format_rational(value: Fraction) -> str:
    """Serialize as "p/q", always with an explicit denominator."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Instance:
    """n agents with additive, strictly positive valuations over m items."""

    values: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise InputError("an instance needs at least one agent")
        width = len(self.values[0])
        for row_idx, row in enumerate(self.values):
            if len(row) != width:
                raise InputError(
                    f"valuation row {row_idx} has {len(row)} entries, expected {width}"
                )
            for col_idx, value in enumerate(row):
                if not isinstance(value, Fraction):
                    raise InputError(f"valuation [{row_idx}][{col_idx}] is not a Fraction")
                if value <= 0:
                    raise InputError(
                        f"valuation [{row_idx}][{col_idx}] = {value} is not strictly positive"
                    )

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[RationalLike]]) -> "Instance":
        return cls(tuple(tuple(parse_rational(v) for v in row) for row in rows))

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return len(self.values[0])

    def value(self, agent: int, item: int) -> Fraction:
        return self.values[agent][item]

    def scale_agent(self, agent: int, factor: Fraction) -> "Instance":
        """Return a copy with one agent's row multiplied by a positive factor."""
        if factor <= 0:
            raise InputError("scaling factor must be positive")
        rows = list(self.values)
        rows[agent] = tuple(v * factor for v in rows[agent])
        return Instance(tuple(rows))

    def __repr__(self) -> str:
        return self.__class__.__name__ + f"(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class Bundle:
    """A set of items kept as a strictly increasing tuple of item ids."""

    items: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for prev, cur in zip(self.items, self.items[1:]):
            if cur <= prev:
                raise InputError(f"bundle items must be strictly increasing: {self.items}")
        if self.items and self.items[0] < 0:
            raise InputError(f"negative item id in bundle {self.items}")

    @classmethod
    def of(cls, items: Iterable[int]) -> "Bundle":
        items = list(items)
        if len(set(items)) != len(items):
            raise InputError(f"duplicate item ids in bundle {items}")
        return cls(tuple(sorted(items)))

    def __iter__(self):
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, item: object) -> bool:
        return item in self.items

    def __or__(self, other: "Bundle") -> "Bundle":
        return Bundle(tuple(sorted(set(self.items) | set(other.items))))

    def __sub__(self, other: "Bundle") -> "Bundle":
        drop = set(other.items)
        return Bundle(tuple(g for g in self.items if g not in drop))

    def without(self, item: int) -> "Bundle":
        if item not in self.items:
            raise InputError(f"item {item} is not in bundle {self.items}")
        return Bundle(tuple(g for g in self.items if g != item))

    def issubset(self, other: "Bundle") -> bool:
        return set(self.items) <= set(other.items)

    def __repr__(self) -> str:
        return "{" + ", ".join(str(g) for g in self.items) + "}"


@dataclass(frozen=True)
class Allocation:
    """Ordered, pairwise disjoint bundles over the items [0, m).  Items held by nobody
    are the donated ones.
    """

    m: int
    bundles: Tuple[Bundle, ...]

    def __post_init__(self) -> None:
        seen = set()
        for idx, bundle in enumerate(self.bundles):
            for g in bundle:
                if g >= self.m:
                    raise InputError(f"bundle {idx} holds item {g}, but there are {self.m} items")
                if g in seen:
                    raise InputError(f"item {g} appears in more than one bundle")
                seen.add(g)

    @classmethod
    def of(cls, m: int, bundles: Iterable[Iterable[int]]) -> "Allocation":
        return cls(m, tuple(b if isinstance(b, Bundle) else Bundle.of(b) for b in bundles))

    @classmethod
    def empty(cls, n: int, m: int) -> "Allocation":
        return cls(m, tuple(Bundle() for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.bundles)

    @property
    def allocated_set(self) -> Bundle:
        return Bundle.of(g for b in self.bundles for g in b)

    @property
    def donated(self) -> Bundle:
        held = set(self.allocated_set)
        return Bundle(tuple(g for g in range(self.m) if g not in held))

    @property
    def is_complete(self) -> bool:
        return not self.donated.items

    def owner(self, item: int) -> Optional[int]:
        for agent, bundle in enumerate(self.bundles):
            if item in bundle:
                return agent
        return None

    def replace(self, agent: int, bundle: Bundle) -> "Allocation":
        bundles = list(self.bundles)
        bundles[agent] = bundle
        return Allocation(self.m, tuple(bundles))

    def check_fits(self, inst: Instance) -> None:
        """Raise InputError unless this allocation is shaped for inst."""
        if self.m != inst.m:
            raise InputError(f"allocation covers {self.m} items, instance has {inst.m}")
        if self.n != inst.n:
            raise InputError(f"allocation has {self.n} bundles, instance has {inst.n} agents")

    def __repr__(self) -> str:
        return "(" + ", ".join(repr(b) for b in self.bundles) + ")"


@dataclass(frozen=True)
class FairnessVerdict:
    """Outcome of a fairness check.  A failed check names the first violating
    (envier, envied, item) triple; item is None for plain envy-freeness.
    """

    holds: bool
    witness: Optional[Tuple[int, int, Optional[int]]] = None

    def __bool__(self) -> bool:
        return self.holds


def _check_agent(inst: Instance, agent: int) -> None:
    if not 0 <= agent < inst.n:
        raise InputError(f"agent {agent} out of range for {inst.n} agents")


def bundle_value(inst: Instance, agent: int, b: Iterable[int]) -> Fraction:
    """Additive value v_agent(b); the empty bundle is worth 0."""
    _check_agent(inst, agent)
    row = inst.values[agent]
    total = Fraction(0)
    for g in b:
        if not 0 <= g < inst.m:
            raise InputError(f"item {g} out of range for {inst.m} items")
        total += row[g]
    return total


def agent_values(inst: Instance, a: Allocation) -> List[Fraction]:
    """Each agent's value for her own bundle."""
    a.check_fits(inst)
    return [bundle_value(inst, i, b) for i, b in enumerate(a.bundles)]


def nw_pow_n(inst: Instance, a: Allocation) -> Fraction:
    """NW(a)^n, the exact product of the agents' bundle values."""
    return Fraction(math.prod(agent_values(inst, a), start=Fraction(1)))


def _envy_terms(inst: Instance, envier: int, bundle: Bundle) -> List[Tuple[int, Fraction]]:
    """(g, v_envier(bundle - g)) for every g in bundle, in item order."""
    full = bundle_value(inst, envier, bundle)
    return [(g, full - inst.values[envier][g]) for g in bundle]


def check_ef(inst: Instance, a: Allocation) -> FairnessVerdict:
    """Envy-freeness: no agent values another bundle above her own.

    Arguments:
        inst: the instance
        a: an allocation shaped for inst; donated items take no part

    Returns:
        FairnessVerdict: holds, or the first (envier, envied, None) in agent order
    """
    own = agent_values(inst, a)
    for i in range(inst.n):
        for j in range(inst.n):
            if i != j and own[i] < bundle_value(inst, i, a.bundles[j]):
                return FairnessVerdict(False, (i, j, None))
    return FairnessVerdict(True)


def check_ef1(inst: Instance, a: Allocation) -> FairnessVerdict:
    """Envy-free up to one item.  A violation means every single removal leaves envy, so
    the witness carries the lowest item id of the envied bundle.
    """
    own = agent_values(inst, a)
    for i in range(inst.n):
        for j in range(inst.n):
            if i == j or not a.bundles[j].items:
                continue
            terms = _envy_terms(inst, i, a.bundles[j])
            if own[i] < min(value for _, value in terms):
                return FairnessVerdict(False, (i, j, terms[0][0]))
    return FairnessVerdict(True)


def check_efx(inst: Instance, a: Allocation) -> FairnessVerdict:
    """Envy-free up to any item.  The witness item is the lowest id whose removal still
    leaves envy.
    """
    own = agent_values(inst, a)
    for i in range(inst.n):
        for j in range(inst.n):
            if i == j:
                continue
            for g, value in _envy_terms(inst, i, a.bundles[j]):
                if own[i] < value:
                    return FairnessVerdict(False, (i, j, g))
    return FairnessVerdict(True)


def pareto_dominates(inst: Instance, a: Allocation, b: Allocation) -> bool:
    """True iff a is at least as good as b for everyone and strictly better for someone."""
    if set(a.allocated_set) != set(b.allocated_set):
        raise InputError("pareto comparison needs allocations of the same item set")
    va = agent_values(inst, a)
    vb = agent_values(inst, b)
    return all(x >= y for x, y in zip(va, vb)) and any(x > y for x, y in zip(va, vb))


def alpha_pow_n(inst: Instance, a: Allocation, opt_pow_n: Fraction) -> Fraction:
    """alpha^n = opt_pow_n / NW(a)^n; a is alpha-efficient iff the result is <= alpha^n."""
    welfare = nw_pow_n(inst, a)
    if welfare == 0:
        raise UndefinedRatioError("efficiency ratio is undefined for zero Nash welfare")
    return Fraction(opt_pow_n) / welfare


def efficiency_bound_pow_n(kind: str, n: int, param: Optional[Fraction] = None) -> Fraction:
    """n-th power of the efficiency factor each algorithm guarantees.

    alg1 -- 2^(n-1), for a Nash-optimal input
    alg2 -- (2 + param)^(n-1), param being delta_1
    driver -- (2 + 1/n)^(n-1), the default restart driver
    large-market -- (1 + 8 param)^n, param being sqrt(eps)
    """
    if n < 1:
        raise InputError("n must be positive")
    if kind == "alg1":
        return Fraction(2) ** (n - 1)
    if kind == "alg2":
        if param is None or param <= 0:
            raise InputError("alg2 bound needs a positive delta_1")
        return (2 + Fraction(param)) ** (n - 1)
    if kind == "driver":
        return (2 + Fraction(1, n)) ** (n - 1)
    if kind == "large-market":
        if param is None or param <= 0:
            raise InputError("large-market bound needs a positive sqrt(eps)")
        return (1 + 8 * Fraction(param)) ** n
    raise InputError(f"unknown efficiency bound {kind!r}")


def integer_rows(inst: Instance) -> Tuple[List[List[int]], List[int]]:
    """Scale each agent's row by the lcm of its denominators.

    Rescaling a row changes no comparison between that agent's bundles, and multiplies
    every Nash product by the same constant, so searches may run on integers.
    """
    rows: List[List[int]] = []
    scales: List[int] = []
    for row in inst.values:
        scale = math.lcm(*(v.denominator for v in row)) if row else 1
        rows.append([int(v * scale) for v in row])
        scales.append(scale)
    return rows, scales


def bundles_from_assignment(
    n: int, m: int, items: Sequence[int], assignment: Sequence[int]
) -> Allocation:
    """Build an allocation from an item -> agent vector; digit n means donated."""
    held: List[List[int]] = [[] for _ in range(n)]
    for g, owner in zip(items, assignment):
        if owner < n:
            held[owner].append(g)
    return Allocation(m, tuple(Bundle(tuple(sorted(b))) for b in held))
