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
Shared instances for the test suite.

The heirloom instance has three siblings (Alice, Bob, Carol) dividing a car, a ring, a
painting and a necklace; every row sums to 29 and the instance has three Nash-optimal
allocations, one per sibling holding the car together with a second item.
"""

from typing import Iterator

import numpy as np

from efx_donation.core import Allocation, Instance
from efx_donation.instances import random_instance

ALICE, BOB, CAROL = 0, 1, 2
CAR, RING, PAINTING, NECKLACE = 0, 1, 2, 3

HEIRLOOM_ROWS = [
    [10, 9, 4, 6],
    [10, 6, 9, 4],
    [10, 4, 6, 9],
]

# Nash-optimal, product 19 * 9 * 9 = 1539, but not EFX.
HEIRLOOM_MNW = Allocation.of(4, [[RING], [CAR, PAINTING], [NECKLACE]])
# The lexicographically first optimum, the one the oracle returns.
HEIRLOOM_LEX_MNW = Allocation.of(4, [[CAR, RING], [PAINTING], [NECKLACE]])
# Complete and EFX, product 9 * 10 * 15 = 1350.
HEIRLOOM_EFX = Allocation.of(4, [[RING], [CAR], [PAINTING, NECKLACE]])

HEIRLOOM_TEXT = """{
  "agents": 3,
  "items": 4,
  "valuations": [
    ["10", "9", "4", "6"],
    ["10", "6", "9", "4"],
    ["10", "4", "6", "9"]
  ]
}
"""

# The -4 sits on line 6, column 11.
NEGATIVE_ENTRY = """{
  "agents": 2,
  "items": 2,
  "valuations": [
    ["1", "2"],
    ["3", -4]
  ]
}
"""

# Two agents where the input is far from optimal and Algorithm 2 improves it once.
SKEWED_ROWS = [[1, 3, 1], [10, 5, 1]]
SKEWED_START = Allocation.of(3, [[0, 1], [2]])


def heirlooms() -> Instance:
    return Instance.from_rows(HEIRLOOM_ROWS)


def skewed() -> Instance:
    return Instance.from_rows(SKEWED_ROWS)


def instance_pool(count: int, seed: int = 2026, max_n: int = 4) -> Iterator[Instance]:
    """Seeded random instances with 2..max_n agents, n..7 items (n..6 for four agents) and
    values in 1..20.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    for k in range(count):
        n = int(rng.integers(2, max_n + 1))
        top = 6 if n == 4 else 7
        m = int(rng.integers(n, top + 1))
        yield random_instance(n, m, 20, seed * 1000 + k)
