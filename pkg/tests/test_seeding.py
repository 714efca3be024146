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
Unit testing for the seed allocations.
"""

from unittest import TestCase

from efx_donation.core import Allocation, Instance, nw_pow_n
from efx_donation.errors import InputError
from efx_donation.oracle import opt_bruteforce
from efx_donation.seeding import (
    file_seed,
    local_search_seed,
    oracle_seed,
    perturbed_seed,
    round_robin_seed,
)
from tests.fixtures import HEIRLOOM_LEX_MNW, heirlooms, instance_pool


class TestRoundRobin(TestCase):
    """The draft."""

    @staticmethod
    def test_heirlooms() -> None:
        """Alice takes the car, Bob the painting, Carol the necklace, then Alice the ring"""
        report = round_robin_seed(heirlooms())
        assert report.allocation == HEIRLOOM_LEX_MNW
        assert report.pow_n == 1539
        assert report.method == "round-robin"

    @staticmethod
    def test_degenerate() -> None:
        """No items leaves everyone empty; one agent takes everything"""
        empty = round_robin_seed(Instance(((), ())))
        assert empty.allocation == Allocation.empty(2, 0)
        assert empty.pow_n == 0
        alone = round_robin_seed(Instance.from_rows([[3, 1, 2]]))
        assert alone.allocation == Allocation.of(3, [[0, 1, 2]])


class TestLocalSearch(TestCase):
    """First-improvement hill climbing."""

    @staticmethod
    def test_optimal_start_is_kept() -> None:
        """A global optimum has no improving neighbour"""
        report = local_search_seed(heirlooms(), round_robin_seed(heirlooms()).allocation)
        assert report.moves == 0
        assert report.pow_n == 1539
        assert report.method == "local-search"

    @staticmethod
    def test_swap_improves() -> None:
        """Two agents holding each other's favourite swap"""
        inst = Instance.from_rows([[1, 2], [2, 1]])
        report = local_search_seed(inst, Allocation.of(2, [[0], [1]]))
        assert report.allocation == Allocation.of(2, [[1], [0]])
        assert report.pow_n == 4
        assert report.moves >= 1

    @staticmethod
    def test_single_agent() -> None:
        """With one agent there is no neighbour"""
        inst = Instance.from_rows([[1, 2]])
        report = local_search_seed(inst, Allocation.of(2, [[0, 1]]))
        assert report.moves == 0

    def test_needs_complete_start(self) -> None:
        """Starts with donated items are rejected"""
        with self.assertRaises(InputError):
            local_search_seed(heirlooms(), Allocation.of(4, [[0], [1], [2]]))

    @staticmethod
    def test_pool() -> None:
        """Local search never loses welfare and never beats the optimum"""
        for inst in instance_pool(40, seed=3):
            start = round_robin_seed(inst)
            report = local_search_seed(inst, start.allocation)
            assert start.pow_n <= report.pow_n <= opt_bruteforce(inst).best_pow_n
            assert report.pow_n == nw_pow_n(inst, report.allocation)
            assert report.allocation.is_complete


class TestOtherSeeds(TestCase):
    """Oracle, file and perturbed seeds."""

    @staticmethod
    def test_oracle_seed() -> None:
        """The oracle seed is the certified optimum"""
        report = oracle_seed(heirlooms())
        assert report.allocation == HEIRLOOM_LEX_MNW
        assert report.pow_n == 1539
        assert report.method == "oracle"

    def test_file_seed(self) -> None:
        """File seeds must be complete and fit the instance"""
        assert file_seed(heirlooms(), HEIRLOOM_LEX_MNW).pow_n == 1539
        with self.assertRaises(InputError):
            file_seed(heirlooms(), Allocation.of(4, [[0, 1], [2], []]))
        with self.assertRaises(InputError):
            file_seed(heirlooms(), Allocation.of(4, [[0, 1], [2, 3]]))

    @staticmethod
    def test_perturbed_is_deterministic() -> None:
        """Same seed, same allocation; the result stays complete"""
        inst = heirlooms()
        first = perturbed_seed(inst, HEIRLOOM_LEX_MNW, moves=3, seed=42)
        second = perturbed_seed(inst, HEIRLOOM_LEX_MNW, moves=3, seed=42)
        assert first == second
        assert first.allocation.is_complete
        assert first.pow_n <= 1539
        assert first.moves == 3
