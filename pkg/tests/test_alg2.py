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
Unit and property testing for donation from an arbitrary complete allocation.
"""

from fractions import Fraction
from unittest import TestCase

from efx_donation.alg1 import run_alg1
from efx_donation.alg2 import (
    DeltaSchedule,
    DriverResult,
    alg2_driver,
    alg2_step,
    improved_allocation,
    restart_cap,
)
from efx_donation.core import (
    Allocation,
    agent_values,
    check_efx,
    efficiency_bound_pow_n,
    nw_pow_n,
)
from efx_donation.efx_graph import AugPath, WorkingBundles
from efx_donation.errors import InputError, InvariantError
from efx_donation.oracle import opt_bruteforce
from efx_donation.seeding import local_search_seed, perturbed_seed, round_robin_seed
from tests.fixtures import (
    HEIRLOOM_LEX_MNW,
    HEIRLOOM_MNW,
    SKEWED_START,
    heirlooms,
    instance_pool,
    skewed,
)


class TestDeltaSchedule(TestCase):
    """delta and delta_1."""

    @staticmethod
    def test_default() -> None:
        """The default delta makes delta_1 exactly 1/n"""
        for n in range(1, 9):
            sched = DeltaSchedule.default(n)
            assert sched.delta == Fraction(1, 2 * n + 1)
            assert sched.delta1 == Fraction(1, n)

    def test_parse(self) -> None:
        """Explicit deltas must lie strictly between 0 and 1"""
        assert DeltaSchedule.parse("1/3", 2).delta1 == 1
        assert DeltaSchedule.parse(None, 4).delta == Fraction(1, 9)
        for bad in ("0", "1", "-1/2"):
            with self.assertRaises(InputError):
                DeltaSchedule.parse(bad, 2)

    @staticmethod
    def test_restart_cap() -> None:
        """ceil(c n^2 rho_bound)"""
        assert restart_cap(3, Fraction(3, 2), 64) == 864
        assert restart_cap(2, Fraction(1), 1) == 4


class TestImprovedAllocation(TestCase):
    """Bundles shifted along an alternating path."""

    @staticmethod
    def test_improved_allocation_collapsed_path() -> None:
        """A one-agent path hands the shrunk slot to the free slot's owner"""
        x = SKEWED_START
        z = WorkingBundles.start(x).remove(0, 1)
        path = AugPath((1,), (1,), ())
        assert improved_allocation(x, z, path, 0) == Allocation.of(3, [[1], [0, 2]])

    @staticmethod
    def test_improved_allocation_two_agents() -> None:
        """Bundles shift one step down the path"""
        x = Allocation.of(5, [[0, 1], [2], [3, 4]])
        z = WorkingBundles.start(x).remove(0, 1).remove(2, 4)
        path = AugPath((1, 0), (1, 0), ((1, 0),))
        assert improved_allocation(x, z, path, 2) == Allocation.of(5, [[1, 3], [0, 2], [4]])


class TestStep(TestCase):
    """Single steps of the algorithm."""

    @staticmethod
    def test_improving_step() -> None:
        """Agent 0 falls below 1/(2 + 1/2) of her value and the step returns a better input"""
        inst = skewed()
        outcome = alg2_step(inst, SKEWED_START, DeltaSchedule.default(2))
        assert outcome.kind == "improved"
        assert not outcome.is_efx
        assert outcome.output == Allocation.of(3, [[1], [0, 2]])
        assert outcome.path.agents == (1,)
        assert outcome.j_star == 0
        assert outcome.trace.removals == [(1, 0, 1)]
        assert nw_pow_n(inst, outcome.output) == 33 >= Fraction(6, 5) * 4

    @staticmethod
    def test_efx_step() -> None:
        """From an optimum the step ends with EFX"""
        outcome = alg2_step(heirlooms(), HEIRLOOM_MNW, DeltaSchedule.default(3))
        assert outcome.is_efx
        assert outcome.output == Allocation.of(4, [[1], [0], [3]])

    def test_incomplete_input(self) -> None:
        """Steps need complete inputs"""
        with self.assertRaises(InputError):
            alg2_step(heirlooms(), Allocation.of(4, [[1], [0], [3]]), DeltaSchedule.default(3))


class TestDriver(TestCase):
    """The restart loop."""

    @staticmethod
    def test_one_restart() -> None:
        """The skewed input is improved once, then ends with EFX"""
        result = alg2_driver(skewed(), SKEWED_START)
        assert result.restarts == 1
        assert result.output == Allocation.of(3, [[1], [0, 2]])
        assert result.final_input == Allocation.of(3, [[1], [0, 2]])
        assert result.pow_n_ledger == [4, 33]
        assert result.trace.restarts[0]["path"] == [1]
        assert result.trace.restarts[0]["nw_pow_n"] == "33/1"
        assert [r.index for r in result.trace.rounds] == [0, 1]

    @staticmethod
    def test_heirlooms_match_alg1() -> None:
        """On the heirloom optima both algorithms return the same allocation"""
        inst = heirlooms()
        for seed in (HEIRLOOM_MNW, HEIRLOOM_LEX_MNW):
            result = alg2_driver(inst, seed)
            assert result.restarts == 0
            assert result.output == run_alg1(inst, seed).output

    def test_restart_tripwire(self) -> None:
        """A zero restart budget turns the first improvement into an invariant error"""
        with self.assertRaises(InvariantError) as ctx:
            alg2_driver(skewed(), SKEWED_START, rho_bound=Fraction(0), restart_factor=1)
        assert ctx.exception.trace is not None


class TestSeededProperties(TestCase):
    """Every guarantee of the restart driver, on the random pool."""

    @staticmethod
    def _check(inst, seed_alloc, opt_pow_n) -> DriverResult:
        seed_pow_n = nw_pow_n(inst, seed_alloc)
        rho_pow_n = opt_pow_n / seed_pow_n
        sched = DeltaSchedule.default(inst.n)
        result = alg2_driver(inst, seed_alloc, rho_bound=rho_pow_n)
        y, x = result.output, result.final_input

        assert check_efx(inst, y)
        assert all(yb.issubset(xb) for yb, xb in zip(y.bundles, x.bundles))
        factor = 2 + sched.delta1
        assert all(
            factor * a >= b for a, b in zip(agent_values(inst, y), agent_values(inst, x))
        )
        ledger = result.pow_n_ledger
        assert ledger[0] == seed_pow_n
        assert all(nxt >= (1 + sched.delta) * cur for cur, nxt in zip(ledger, ledger[1:]))
        assert nw_pow_n(inst, x) == ledger[-1]
        bound = efficiency_bound_pow_n("driver", inst.n)
        assert bound * nw_pow_n(inst, y) * rho_pow_n >= opt_pow_n
        assert result.restarts <= restart_cap(inst.n, rho_pow_n, 64)
        return result

    def test_pool(self) -> None:
        """Local-search seeds, perturbed optima and optima; optima never restart and end
        exactly where the first algorithm does
        """
        for k, inst in enumerate(instance_pool(500)):
            optimum = opt_bruteforce(inst)
            opt_pow_n = optimum.best_pow_n

            local = local_search_seed(inst, round_robin_seed(inst).allocation)
            self._check(inst, local.allocation, opt_pow_n)

            perturbed = perturbed_seed(inst, optimum.argmax, moves=2, seed=k)
            if perturbed.pow_n > 0:
                self._check(inst, perturbed.allocation, opt_pow_n)

            from_optimum = self._check(inst, optimum.argmax, opt_pow_n)
            assert from_optimum.restarts == 0
            first = run_alg1(inst, optimum.argmax)
            assert from_optimum.output == first.output
            assert from_optimum.trace.removals == first.trace.removals
