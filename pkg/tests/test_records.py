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
Unit testing for the JSON file formats.
"""

import json
import os
import tempfile
from fractions import Fraction
from unittest import TestCase

from efx_donation.core import Allocation
from efx_donation.errors import InputError
from efx_donation.records import (
    RationalEncoder,
    dict_to_allocation,
    instance_digest,
    load_allocation,
    load_instance,
    read_allocation,
    read_instance,
    save,
    to_json,
)
from tests.fixtures import HEIRLOOM_MNW, HEIRLOOM_TEXT, NEGATIVE_ENTRY, heirlooms, skewed


class TestEncoder(TestCase):
    """RationalEncoder and the canonical text."""

    @staticmethod
    def test_values() -> None:
        """Fractions are p/q strings, allocations list their donated items"""
        assert to_json(Fraction(1, 2)) == '"1/2"\n'
        assert to_json(Fraction(3)) == '"3/1"\n'
        data = json.loads(to_json(Allocation.of(4, [[1], [0], [3]])))
        assert data == {"bundles": [[1], [0], [3]], "donated": [2]}
        data = json.loads(to_json(heirlooms()))
        assert data["agents"] == 3
        assert data["valuations"][0] == ["10/1", "9/1", "4/1", "6/1"]

    def test_unknown_type(self) -> None:
        """Anything else is left to the json module"""
        with self.assertRaises(TypeError):
            json.dumps(object(), cls=RationalEncoder)

    @staticmethod
    def test_canonical() -> None:
        """Sorted keys and a trailing newline"""
        text = to_json({"b": 1, "a": Fraction(1, 3)})
        assert text == '{\n  "a": "1/3",\n  "b": 1\n}\n'


class TestInstanceFiles(TestCase):
    """Reading instance files."""

    @staticmethod
    def test_read() -> None:
        """The heirloom file reads back exactly, and so does its own output"""
        assert read_instance(HEIRLOOM_TEXT) == heirlooms()
        assert read_instance(to_json(skewed())) == skewed()

    @staticmethod
    def test_numbers() -> None:
        """Bare JSON numbers are exact decimals"""
        inst = read_instance('{"agents": 1, "items": 3, "valuations": [[0.1, 3, "2/7"]]}')
        assert inst.values[0] == (Fraction(1, 10), Fraction(3), Fraction(2, 7))

    def test_non_positive_entry(self) -> None:
        """The offending entry is reported with its line and column"""
        with self.assertRaises(InputError) as ctx:
            read_instance(NEGATIVE_ENTRY)
        assert (ctx.exception.line, ctx.exception.column) == (6, 11)
        assert "valuations[1][1]" in str(ctx.exception)

    def test_syntax_error(self) -> None:
        """Broken JSON is an input error with a position"""
        with self.assertRaises(InputError) as ctx:
            read_instance('{"agents": 1,')
        assert ctx.exception.line == 1

    def test_shape_errors(self) -> None:
        """Missing fields and ragged rows are rejected"""
        for text in (
            '{"agents": 1, "items": 1}',
            '{"agents": 2, "items": 1, "valuations": [["1"]]}',
            '{"agents": 1, "items": 2, "valuations": [["1"]]}',
            '{"agents": 1, "items": 1, "valuations": [["one"]]}',
            "[1, 2]",
        ):
            with self.assertRaises(InputError):
                read_instance(text)

    @staticmethod
    def test_digest() -> None:
        """The digest depends on the values only, not on how the file spells them"""
        digest = instance_digest(heirlooms())
        assert len(digest) == 64
        assert digest == instance_digest(read_instance(HEIRLOOM_TEXT))
        assert digest != instance_digest(skewed())


class TestAllocationFiles(TestCase):
    """Reading allocation files."""

    def test_coverage(self) -> None:
        """Bundles and donated items cover every item exactly once"""
        a = dict_to_allocation({"bundles": [[1], [0], [3]], "donated": [2]})
        assert a == Allocation.of(4, [[1], [0], [3]])
        assert dict_to_allocation({"bundles": [[1], [0], [3]], "donated": [2]}, 4) == a
        for bad, m in (
            ({"bundles": [[0], [2]]}, None),
            ({"bundles": [[0], [2]], "donated": [1]}, 4),
            ({"bundles": [[0], [0]], "donated": [1]}, None),
            ({"donated": [0]}, None),
        ):
            with self.assertRaises(InputError):
                dict_to_allocation(bad, m)

    def test_bad_item_ids(self) -> None:
        """Non-integer ids and non-list bundles are input errors, located when possible"""
        with self.assertRaises(InputError) as ctx:
            read_allocation('{"bundles": [[0], [1.5]], "donated": []}')
        assert (ctx.exception.line, ctx.exception.column) == (1, 20)
        assert "bundles[1][0]" in str(ctx.exception)
        for text in (
            '{"bundles": [[0], 1], "donated": []}',
            '{"bundles": [[0], [true]], "donated": []}',
            '{"bundles": [[0]], "donated": ["x"]}',
            '{"bundles": {"0": [0]}}',
            "[[0]]",
        ):
            with self.assertRaises(InputError):
                read_allocation(text)
        assert read_allocation('{"bundles": [["1"], [0]]}') == Allocation.of(2, [[1], [0]])


class TestFiles(TestCase):
    """Saving and loading through the filesystem."""

    @staticmethod
    def test_save_and_load() -> None:
        """What is saved loads back unchanged"""
        with tempfile.TemporaryDirectory() as tmp:
            inst_path = os.path.join(tmp, "heirlooms.json")
            alloc_path = os.path.join(tmp, "mnw.json")
            save(heirlooms(), inst_path)
            save(HEIRLOOM_MNW, alloc_path)
            assert load_instance(inst_path) == heirlooms()
            assert load_allocation(alloc_path, 4) == HEIRLOOM_MNW
            with open(inst_path, "r", encoding="utf-8") as file_ptr:
                assert file_ptr.read() == to_json(heirlooms())
