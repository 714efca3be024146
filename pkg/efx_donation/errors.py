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

"""Exceptions raised by the package.  Each class carries the process exit code the
command line maps it to.
"""

from typing import Any, Optional


class EfxError(Exception):
    """Base class for every error raised by efx_donation."""

    exit_code = 1


class InputError(EfxError, ValueError):
    """An instance, allocation, file or parameter does not satisfy its contract."""

    exit_code = 3

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ResourceError(EfxError):
    """A brute-force search would exceed the configured cap."""

    exit_code = 4

    def __init__(self, required: int, cap: int) -> None:
        super().__init__(f"search space of {required} assignments exceeds the cap of {cap}")
        self.required = required
        self.cap = cap


class UndefinedRatioError(EfxError, ZeroDivisionError):
    """An efficiency ratio was requested against an allocation of zero Nash welfare."""

    exit_code = 3


class NoDemandError(EfxError):
    """Robust demand is undefined because every working bundle is empty."""

    exit_code = 5


class MatchingError(EfxError):
    """No matching of the feasibility graph covers all touched bundles."""

    exit_code = 5

    def __init__(self, message: str, graph: Any = None, touched: Any = None) -> None:
        super().__init__(message)
        self.graph = graph
        self.touched = touched


class InvariantError(EfxError):
    """A property that the algorithms guarantee did not hold at runtime."""

    exit_code = 5

    def __init__(self, message: str, trace: Any = None) -> None:
        super().__init__(message)
        self.trace = trace


class GenerationError(EfxError):
    """An instance generator could not satisfy its post-condition."""

    exit_code = 6
