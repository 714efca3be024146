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
JSON files for instances, allocations and reports.

An instance file holds "agents", "items" and a "valuations" matrix of rational literals;
an allocation file holds "bundles" and "donated" item lists.  Every Fraction is written
as a "p/q" string, and bare JSON numbers in input files are read as exact decimals.
"""

import hashlib
import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Optional, Tuple, Union

from efx_donation.core import Allocation, Bundle, Instance, format_rational, parse_rational
from efx_donation.errors import InputError

logger = logging.getLogger("efx_donation.records")

PathLike = Union[str, Path]

INDEXING_NOTE = "agents and items are 0-based in files; trace tables number them from 1"


class RationalEncoder(json.JSONEncoder):
    """
    Teaches the json module the package's value types.  Fractions become "p/q" strings,
    bundles become item lists and instances and allocations become the dictionaries of
    their file formats.  Anything else goes to the superclass.
    """

    def default(self, o: Any) -> Any:
        if isinstance(o, Fraction):
            return format_rational(o)
        if isinstance(o, Bundle):
            return list(o.items)
        if isinstance(o, Allocation):
            return {"bundles": list(o.bundles), "donated": list(o.donated.items)}
        if isinstance(o, Instance):
            return {"agents": o.n, "items": o.m, "valuations": [list(row) for row in o.values]}
        return super().default(o)


def _offset_to_line_col(text: str, offset: int) -> Tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column


def _locate_entry(text: str, key: str, row: int, col: int) -> Optional[Tuple[int, int]]:
    """Line and column of key[row][col] in the raw text, when it can be found."""
    start = text.find(f'"{key}"')
    if start < 0:
        return None
    pos = text.find("[", start)
    depth, cur_row, cur_col = 0, -1, 0
    in_string = False
    expecting = False
    while 0 <= pos < len(text):
        ch = text[pos]
        if in_string:
            if ch == "\\":
                pos += 1
            elif ch == '"':
                in_string = False
        elif ch == "[":
            depth += 1
            if depth == 2:
                cur_row += 1
                cur_col = 0
                expecting = True
        elif ch == "]":
            depth -= 1
            if depth == 0:
                return None
        elif ch == "," and depth == 2:
            cur_col += 1
            expecting = True
        elif expecting and not ch.isspace():
            if (cur_row, cur_col) == (row, col):
                return _offset_to_line_col(text, pos)
            expecting = False
            if ch == '"':
                in_string = True
        elif ch == '"':
            in_string = True
        pos += 1
    return None


def dict_to_instance(a_dict: dict) -> Instance:
    """Build an Instance from the dictionary of an instance file.

    A non-positive value raises InputError with its (row, column) in the entry attribute.
    """
    for key in ("agents", "items", "valuations"):
        if key not in a_dict:
            raise InputError(f"instance file has no {key!r} field")
    n, m, rows = a_dict["agents"], a_dict["items"], a_dict["valuations"]
    if not isinstance(rows, list) or len(rows) != n:
        raise InputError(f"expected {n} valuation rows")
    parsed = []
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != m:
            raise InputError(f"valuation row {r} must list {m} values")
        values = []
        for c, raw in enumerate(row):
            value = parse_rational(raw)
            if value <= 0:
                err = InputError(f"valuations[{r}][{c}] = {raw!r} is not strictly positive")
                err.entry = ("valuations", r, c)
                raise err
            values.append(value)
        parsed.append(tuple(values))
    return Instance(tuple(parsed))


def _item_ids(raw: Any, row: Optional[int] = None) -> List[int]:
    """Item ids of one bundle (row) or of the donated list (row None).

    Integers and integer strings are accepted.  A bad entry inside a bundle raises
    InputError with its (row, column) in the entry attribute.
    """
    name = "donated" if row is None else f"bundles[{row}]"
    if not isinstance(raw, list):
        raise InputError(f"{name} must be a list of item ids")
    ids = []
    for c, g in enumerate(raw):
        try:
            if isinstance(g, bool) or not isinstance(g, (int, str)):
                raise ValueError(g)
            ids.append(int(g))
        except ValueError as cause:
            err = InputError(f"{name}[{c}] = {g!r} is not an item id")
            if row is not None:
                err.entry = ("bundles", row, c)
            raise err from cause
    return ids


def dict_to_allocation(a_dict: dict, m: Optional[int] = None) -> Allocation:
    """Build an Allocation from the dictionary of an allocation file.

    The item count is bundles plus donated items unless m is given, and the two lists
    together must cover the items 0..m-1 exactly.
    """
    if "bundles" not in a_dict:
        raise InputError("allocation file has no 'bundles' field")
    raw_bundles = a_dict["bundles"]
    if not isinstance(raw_bundles, list):
        raise InputError("'bundles' must be a list of item lists")
    bundles = [Bundle.of(_item_ids(b, r)) for r, b in enumerate(raw_bundles)]
    donated = _item_ids(a_dict.get("donated", []))
    held = [g for b in bundles for g in b]
    if m is None:
        m = len(held) + len(donated)
    if sorted(held + donated) != list(range(m)):
        raise InputError(f"bundles and donated items must cover items 0..{m - 1} exactly once")
    return Allocation(m, tuple(bundles))


def _load_json(text: str) -> Any:
    try:
        return json.loads(text, parse_float=str)
    except json.JSONDecodeError as err:
        raise InputError(err.msg, err.lineno, err.colno) from err


def _reraise_located(text: str, err: InputError) -> None:
    """Raise err again, with a line and column when its entry can be found in text."""
    entry = getattr(err, "entry", None)
    position = _locate_entry(text, *entry) if entry else None
    if position is None:
        raise err
    raise InputError(str(err), *position) from err


def read_instance(text: str) -> Instance:
    data = _load_json(text)
    if not isinstance(data, dict):
        raise InputError("an instance file must hold a JSON object")
    try:
        return dict_to_instance(data)
    except InputError as err:
        _reraise_located(text, err)


def read_allocation(text: str, m: Optional[int] = None) -> Allocation:
    data = _load_json(text)
    if not isinstance(data, dict):
        raise InputError("an allocation file must hold a JSON object")
    try:
        return dict_to_allocation(data, m)
    except InputError as err:
        _reraise_located(text, err)


def load_instance(path: PathLike) -> Instance:
    logger.debug("Loading instance from %s", path)
    with open(path, "r", encoding="utf-8") as file_ptr:
        return read_instance(file_ptr.read())


def load_allocation(path: PathLike, m: Optional[int] = None) -> Allocation:
    logger.debug("Loading allocation from %s", path)
    with open(path, "r", encoding="utf-8") as file_ptr:
        return read_allocation(file_ptr.read(), m)


def to_json(value: Any) -> str:
    """Canonical text: sorted keys, two-space indent and a trailing newline."""
    return json.dumps(value, cls=RationalEncoder, sort_keys=True, indent=2) + "\n"


def save(value: Any, path: PathLike) -> None:
    logger.debug("Saving %s to %s", type(value).__name__, path)
    with open(path, "w", encoding="utf-8") as file_ptr:
        file_ptr.write(to_json(value))


def instance_digest(inst: Instance) -> str:
    canonical = json.dumps(inst, cls=RationalEncoder, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

