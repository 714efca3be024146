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
Defines the runner that turns command line requests into seeded pipelines, checker runs
and the report dictionaries written back to disk.
"""

import logging
from fractions import Fraction
from typing import Any, Dict, Iterable, Optional, Tuple

from tabulate import tabulate

from efx_donation.alg1 import RunTrace, run_alg1
from efx_donation.alg2 import DeltaSchedule, alg2_driver
from efx_donation.config import Settings
from efx_donation.core import (
    Allocation,
    FairnessVerdict,
    Instance,
    alpha_pow_n,
    check_ef,
    check_ef1,
    check_efx,
    efficiency_bound_pow_n,
    nw_pow_n,
    parse_rational,
)
from efx_donation.errors import InputError, ResourceError, UndefinedRatioError
from efx_donation.instances import (
    check_large_market,
    check_large_market_wrt,
    ef1_complete,
    lower_bound_instance,
    random_instance,
    random_large_market_instance,
)
from efx_donation.oracle import (
    OracleResult,
    best_efx_bruteforce,
    opt_bruteforce,
    pareto_optimal_bruteforce,
)
from efx_donation.records import INDEXING_NOTE, instance_digest
from efx_donation.seeding import (
    SeedReport,
    file_seed,
    local_search_seed,
    oracle_seed,
    round_robin_seed,
)

ALGORITHMS = ("alg1", "alg2")
SEED_METHODS = ("oracle", "local-search", "round-robin", "file")
GENERATORS = ("lower-bound", "random", "large-market")
CHECKS = ("ef", "ef1", "efx", "pareto", "large-market", "ratio")
ORACLE_MODES = ("opt", "efx", "efx-complete")

NOT_GUARANTEED = "efficiency bound not guaranteed"

TRACE_HEADERS = ["Round", "Edges", "Matching", "Touched", "Swaps", "Donation"]
RESTART_HEADERS = ["Restart", "After round", "Path", "Shrunk", "NW^n"]


def _verdict(verdict: FairnessVerdict) -> Dict[str, Any]:
    return {"holds": verdict.holds, "witness": list(verdict.witness) if verdict.witness else None}


def _ratio(inst: Instance, a: Allocation, reference: Optional[Fraction]) -> Optional[Fraction]:
    if reference is None:
        return None
    try:
        return alpha_pow_n(inst, a, reference)
    except UndefinedRatioError:
        return None


def _subset(inner: Allocation, outer: Allocation) -> bool:
    return all(y.issubset(x) for y, x in zip(inner.bundles, outer.bundles))


class ExperimentRunner:
    """Runs generators, seeders, the donation algorithms and the checkers for the command
    line, and packs every result into a report dictionary with exact rational values.
    """

    def __init__(self, settings: Optional[Settings] = None, oracle_cap: Optional[int] = None):
        self.settings = settings or Settings.from_env()
        self.oracle_cap = oracle_cap or self.settings.oracle_cap
        self.logger.debug("ExperimentRunner initialized with oracle cap %d", self.oracle_cap)

    @property
    def logger(self):
        return logging.getLogger("efx_donation.runner")

    def generate(
        self,
        kind: str,
        n: int,
        m: Optional[int] = None,
        eps: Optional[str] = None,
        max_value: int = 20,
        rng_seed: int = 0,
    ) -> Instance:
        self.logger.debug("Generating %s instance with n=%s m=%s eps=%s", kind, n, m, eps)
        if kind == "lower-bound":
            if eps is None:
                raise InputError("the lower-bound generator needs --eps")
            return lower_bound_instance(n, eps)
        if m is None:
            raise InputError(f"the {kind} generator needs --m")
        if kind == "random":
            return random_instance(n, m, max_value, rng_seed)
        if kind == "large-market":
            if eps is None:
                raise InputError("the large-market generator needs --eps")
            return random_large_market_instance(n, m, eps, rng_seed, max_value=max_value)
        raise InputError(f"unknown generator {kind!r}")

    def _try_oracle(self, inst: Instance) -> Optional[OracleResult]:
        try:
            return opt_bruteforce(inst, cap=self.oracle_cap)
        except ResourceError as err:
            self.logger.info("Skipping the optimum: %s", err)
            return None

    def seed(
        self, inst: Instance, method: str, seed_allocation: Optional[Allocation] = None
    ) -> SeedReport:
        self.logger.debug("Seeding with %s", method)
        if method == "oracle":
            return oracle_seed(inst, cap=self.oracle_cap)
        if method == "round-robin":
            return round_robin_seed(inst)
        if method == "local-search":
            return local_search_seed(inst, round_robin_seed(inst).allocation)
        if method == "file":
            if seed_allocation is None:
                raise InputError("seed method 'file' needs --seed-file")
            return file_seed(inst, seed_allocation)
        raise InputError(f"unknown seed method {method!r}")

    def solve(
        self,
        inst: Instance,
        algorithm: str = "alg1",
        seed_method: str = "oracle",
        seed_allocation: Optional[Allocation] = None,
        delta: Optional[str] = None,
        trace: bool = False,
    ) -> Tuple[Dict[str, Any], RunTrace]:
        """Seed, run one donation algorithm and report on the outcome.

        The optimum is computed when the oracle cap allows; reports then carry the
        efficiency ratio against it as well as against the seed.
        """
        if algorithm not in ALGORITHMS:
            raise InputError(f"unknown algorithm {algorithm!r}")
        seed = self.seed(inst, seed_method, seed_allocation)
        optimum = self._try_oracle(inst)
        opt_pow_n = optimum.best_pow_n if optimum else None
        notes = []
        if algorithm == "alg1":
            result = run_alg1(inst, seed.allocation)
            output, run_trace, reference = result.output, result.trace, seed.allocation
            restarts = 0
            bound = efficiency_bound_pow_n("alg1", inst.n)
            certified = seed_method == "oracle" or (
                opt_pow_n is not None and seed.pow_n == opt_pow_n
            )
            if not (certified and result.lemma_bounds_hold):
                notes.append(NOT_GUARANTEED)
        else:
            sched = DeltaSchedule.parse(delta, inst.n)
            # rho^n = opt^n / NW(seed)^n is itself an upper bound on rho.
            rho_bound = Fraction(1)
            if opt_pow_n is not None and seed.pow_n > 0:
                rho_bound = opt_pow_n / seed.pow_n
            result = alg2_driver(
                inst,
                seed.allocation,
                delta=sched.delta,
                rho_bound=rho_bound,
                restart_factor=self.settings.restart_factor,
            )
            output, run_trace, reference = result.output, result.trace, result.final_input
            restarts = result.restarts
            bound = efficiency_bound_pow_n("alg2", inst.n, sched.delta1)

        out_pow_n = nw_pow_n(inst, output)
        report: Dict[str, Any] = {
            "pipeline": f"{seed.method}+{algorithm}",
            "instance_digest": instance_digest(inst),
            "indexing": INDEXING_NOTE,
            "input": seed.allocation,
            "output": output,
            "donated": list(output.donated.items),
            "nw_pow_n": {"input": seed.pow_n, "output": out_pow_n, "oracle": opt_pow_n},
            "ratio": {
                "vs_input": _ratio(inst, output, seed.pow_n),
                "vs_oracle": _ratio(inst, output, opt_pow_n),
            },
            "bound_pow_n": bound,
            "fairness": {
                "efx": _verdict(check_efx(inst, output)),
                "ef1": _verdict(check_ef1(inst, output)),
            },
            "subset_of_input": _subset(output, reference),
            "rounds": len(run_trace),
            "restarts": restarts,
            "seed_moves": seed.moves,
            "notes": notes,
        }
        if algorithm == "alg2":
            report["delta"] = DeltaSchedule.parse(delta, inst.n).delta
        if trace:
            report["trace"] = run_trace.to_dict()
        self.logger.info(
            "Solved %s: NW^n %s -> %s in %d rounds",
            report["pipeline"],
            seed.pow_n,
            out_pow_n,
            len(run_trace),
        )
        return report, run_trace

    def verify(
        self,
        inst: Instance,
        a: Allocation,
        checks: Iterable[str],
        eps: Optional[str] = None,
        alpha_pow_n_bound: Optional[str] = None,
    ) -> Tuple[bool, Dict[str, Any]]:
        """Run the requested checkers on a; the first value is True iff all of them pass."""
        a.check_fits(inst)
        results: Dict[str, Any] = {}
        for check in checks:
            if check == "ef":
                results[check] = _verdict(check_ef(inst, a))
            elif check == "ef1":
                results[check] = _verdict(check_ef1(inst, a))
            elif check == "efx":
                results[check] = _verdict(check_efx(inst, a))
            elif check == "pareto":
                optimal, dominator = pareto_optimal_bruteforce(inst, a, cap=self.oracle_cap)
                results[check] = {"holds": optimal, "dominator": dominator}
            elif check == "large-market":
                results[check] = self._large_market(inst, a, eps)
            elif check == "ratio":
                results[check] = self._ratio_check(inst, a, alpha_pow_n_bound)
            else:
                raise InputError(f"unknown check {check!r}")
        passed = all(result["holds"] for result in results.values())
        report = {
            "instance_digest": instance_digest(inst),
            "indexing": INDEXING_NOTE,
            "allocation": a,
            "nw_pow_n": nw_pow_n(inst, a),
            "checks": results,
            "passed": passed,
        }
        self.logger.info("Verified %s: passed=%s", sorted(results), passed)
        return passed, report

    @staticmethod
    def _large_market(inst: Instance, a: Allocation, eps: Optional[str]) -> Dict[str, Any]:
        if eps is None:
            raise InputError("the large-market check needs --eps")
        market = check_large_market(inst, eps)
        result: Dict[str, Any] = {
            "holds": market.holds,
            "market": {"tightest_eps": market.tightest_eps, "witness": market.witness},
        }
        if a.is_complete:
            own = check_large_market_wrt(inst, a, eps)
            result["holds"] = own.holds
            result["allocation"] = {
                "tightest_eps": own.tightest_eps,
                "witness": own.witness,
                "flagged": list(own.flagged),
            }
        return result

    def _ratio_check(
        self, inst: Instance, a: Allocation, bound: Optional[str]
    ) -> Dict[str, Any]:
        limit = (
            efficiency_bound_pow_n("alg1", inst.n) if bound is None else parse_rational(bound)
        )
        optimum = opt_bruteforce(inst, cap=self.oracle_cap).best_pow_n
        try:
            measured = alpha_pow_n(inst, a, optimum)
        except UndefinedRatioError:
            return {"holds": False, "alpha_pow_n": None, "bound": limit, "oracle": optimum}
        return {
            "holds": measured <= limit,
            "alpha_pow_n": measured,
            "bound": limit,
            "oracle": optimum,
        }

    def oracle(self, inst: Instance, mode: str = "opt", chunks: int = 1) -> Dict[str, Any]:
        if mode == "opt":
            result = opt_bruteforce(inst, cap=self.oracle_cap, chunks=chunks)
        elif mode in ("efx", "efx-complete"):
            result = best_efx_bruteforce(
                inst, cap=self.oracle_cap, chunks=chunks, complete_only=mode == "efx-complete"
            )
        else:
            raise InputError(f"unknown oracle mode {mode!r}")
        return {
            "instance_digest": instance_digest(inst),
            "indexing": INDEXING_NOTE,
            "mode": mode,
            "best_pow_n": result.best_pow_n,
            "argmax": result.argmax,
            "enumerated": result.enumerated,
        }

    def complete(self, inst: Instance, y: Allocation) -> Dict[str, Any]:
        completed = ef1_complete(inst, y)
        return {
            "instance_digest": instance_digest(inst),
            "indexing": INDEXING_NOTE,
            "input": y,
            "output": completed,
            "nw_pow_n": {"input": nw_pow_n(inst, y), "output": nw_pow_n(inst, completed)},
            "ef1": _verdict(check_ef1(inst, completed)),
        }

    @staticmethod
    def trace_table(trace: RunTrace) -> str:
        """The per-round trace as a github-style table with 1-based numbering."""
        table = tabulate(trace.to_rows(), TRACE_HEADERS, tablefmt="github")
        if not trace.restarts:
            return table
        rows = []
        for entry in trace.restarts:
            path = " ".join(str(agent + 1) for agent in entry["path"])
            shrunk = entry["j_star"] + 1
            rows.append([entry["restart"], entry["after_round"], path, shrunk, entry["nw_pow_n"]])
        restarts = tabulate(rows, RESTART_HEADERS, tablefmt="github")
        return f"{table}\n\n{restarts}"
