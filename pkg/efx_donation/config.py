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

"""Settings read from the environment."""

import os
from dataclasses import dataclass

from efx_donation.errors import InputError

DEFAULT_ORACLE_CAP = 10**8
DEFAULT_RESTART_FACTOR = 64
DEFAULT_LOG_DIR = "logs"


def _int_from_env(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError as err:
        raise InputError(f"{name} must be an integer, got {raw!r}") from err
    if value <= 0:
        raise InputError(f"{name} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    """Runtime knobs.

    EFX_ORACLE_CAP -- largest search space the brute-force oracles will enumerate
    EFX_RESTART_FACTOR -- constant c of the Algorithm 2 restart tripwire c * n^2 * rho_bound
    EFX_LOG_DIR -- directory that receives the rotating log file of the command line
    """

    oracle_cap: int = DEFAULT_ORACLE_CAP
    restart_factor: int = DEFAULT_RESTART_FACTOR
    log_dir: str = DEFAULT_LOG_DIR

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            oracle_cap=_int_from_env("EFX_ORACLE_CAP", DEFAULT_ORACLE_CAP),
            restart_factor=_int_from_env("EFX_RESTART_FACTOR", DEFAULT_RESTART_FACTOR),
            log_dir=os.environ.get("EFX_LOG_DIR") or DEFAULT_LOG_DIR,
        )


def default_oracle_cap() -> int:
    return Settings.from_env().oracle_cap
