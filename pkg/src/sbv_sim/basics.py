"""

    sbv-sim: Sub-band vectoring simulator for multi-operator VDSL2

    Basic classes module

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.


    This module contains the exception hierarchy shared by all modules,
    the LineReader class that feeds configuration files to the settings
    parser, and the ResultTable class that holds CSV-bound results.

"""

from typing import Any, Iterator, List, Optional, Sequence, Tuple

import csv
import dataclasses
import io
import os
import importlib.resources


class SbvSimError(Exception):

    """Base class of all exceptions raised by sbv-sim"""


class ConfigError(SbvSimError):

    """Error in a configuration file or in configuration values.
    The offending key is kept so that callers can report it, and
    the position within the file is added by the reader."""

    def __init__(self, s: str, key: Optional[str] = None) -> None:
        super().__init__(s)
        self.key = key
        self.fname: Optional[str] = None
        self.line = 0

    def set_pos(self, fname: Optional[str], line: int) -> None:
        """Set file name and line information, if not already set"""
        if not self.fname:
            self.fname = fname
            self.line = line

    def __str__(self) -> str:
        """Return a string representation of this exception"""
        s = Exception.__str__(self)
        if self.key and "'{0}'".format(self.key) not in s:
            s = "{0}: {1}".format(self.key, s)
        if not self.fname:
            return s
        return "File {0}, line {1}: {2}".format(self.fname, self.line, s)


class ScenarioError(ConfigError):

    """A scenario that cannot be simulated, for instance an operator
    that owns no tones in a region where it must transmit"""


class ParameterError(SbvSimError, ValueError):

    """An argument outside the domain of an operation"""


class ModelRangeError(ParameterError):

    """A frequency outside the validated range of a cable model"""


class LineReader:

    """Read lines from a text file, a package resource or a string,
    recognizing $include directives. The fname() and line() methods
    report the position of the line most recently returned."""

    def __init__(
        self,
        fname: Optional[str] = None,
        *,
        text: Optional[str] = None,
        package_name: Optional[str] = None,
        _chain: Tuple[str, ...] = (),
    ) -> None:
        if fname is None and text is None:
            raise ValueError("LineReader needs either a file name or a text")
        self._fname = fname
        self._text = text
        self._package_name = package_name
        self._line = 0
        self._inner_rdr: Optional[LineReader] = None
        # Files being read by the enclosing readers, outermost first
        self._chain = _chain + ((self._source_id(),) if fname else ())

    def fname(self) -> str:
        """The name of the file currently being read"""
        if self._inner_rdr is not None:
            return self._inner_rdr.fname()
        return self._fname or "<string>"

    def line(self) -> int:
        """The number of the line most recently read"""
        if self._inner_rdr is not None:
            return self._inner_rdr.line()
        return self._line

    def _read(self) -> str:
        if self._text is not None:
            return self._text
        assert self._fname is not None
        if self._package_name:
            resource = importlib.resources.files(self._package_name)
            return resource.joinpath(self._fname).read_text(encoding="utf-8")
        with open(self._fname, "r", encoding="utf-8") as f:
            return f.read()

    def _source_id(self) -> str:
        assert self._fname is not None
        if self._package_name:
            return "{0}:{1}".format(self._package_name, self._fname)
        return os.path.abspath(self._fname)

    def _include_path(self, name: str) -> str:
        if os.path.isabs(name) or not self._fname or self._package_name:
            return name
        return os.path.join(os.path.dirname(self._fname), name)

    def lines(self) -> Iterator[str]:
        """Generator yielding lines from the source, with $include
        directives replaced by the lines of the included file"""
        self._line = 0
        try:
            text = self._read()
        except OSError:
            raise ConfigError("Error while opening or reading config file")
        for s in text.splitlines():
            self._line += 1
            stripped = s.strip()
            if stripped.startswith("$include"):
                name = stripped[len("$include") :].strip()
                if not name:
                    raise ConfigError("$include directive is missing a file name")
                inner = LineReader(
                    self._include_path(name),
                    package_name=self._package_name,
                    _chain=self._chain,
                )
                if inner._chain[-1] in self._chain:
                    raise ConfigError(
                        "$include of '{0}' would include it recursively".format(name)
                    )
                self._inner_rdr = inner
                yield from self._inner_rdr.lines()
                self._inner_rdr = None
            else:
                yield s


def format_value(v: Any) -> str:
    """Format a single cell of a CSV row"""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if v.is_integer() and abs(v) < 1e15:
            return str(int(v))
        return repr(v)
    return str(v)


class ResultTable:

    """A table of result rows with a fixed header. The first
    `key_count` columns identify a row, and rows are sorted on
    them before output so that file content does not depend on
    the order in which grid points were computed."""

    def __init__(self, columns: Sequence[str], key_count: int = 0) -> None:
        self.columns: Tuple[str, ...] = tuple(columns)
        self.key_count = key_count
        self.rows: List[Tuple[Any, ...]] = []

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, *row: Any) -> None:
        if len(row) != len(self.columns):
            raise ValueError(
                "Row has {0} cells, table has {1} columns".format(
                    len(row), len(self.columns)
                )
            )
        self.rows.append(tuple(row))

    def extend(self, other: "ResultTable") -> None:
        assert other.columns == self.columns
        self.rows.extend(other.rows)

    def column(self, name: str) -> List[Any]:
        """Return the values of a single column"""
        ix = self.columns.index(name)
        return [row[ix] for row in self.rows]

    def where(self, **values: Any) -> List[Tuple[Any, ...]]:
        """Return the rows whose cells equal the given column values"""
        ixs = [(self.columns.index(k), v) for k, v in values.items()]
        return [row for row in self.rows if all(row[ix] == v for ix, v in ixs)]

    def sorted(self) -> "ResultTable":
        """Return a copy of this table with rows sorted by key columns"""
        t = ResultTable(self.columns, self.key_count)
        n = self.key_count or len(self.columns)
        t.rows = sorted(self.rows, key=lambda row: tuple(row[:n]))
        return t

    def to_csv(self, comment: Optional[str] = None) -> str:
        """Return the table as CSV text: a header row, an optional
        comment row starting with '#', and one line per row"""
        f = io.StringIO()
        w = csv.writer(f, lineterminator="\n")
        w.writerow(self.columns)
        if comment:
            f.write("# {0}\n".format(comment))
        w.writerows([format_value(v) for v in row] for row in self.rows)
        return f.getvalue()


def coerce_float_fields(obj: Any) -> None:
    """Convert the float-annotated fields of a frozen dataclass to float,
    so that 100 and 100.0 give equal instances and equal serializations"""
    for fld in dataclasses.fields(obj):
        if fld.type is float or fld.type == "float":
            v = getattr(obj, fld.name)
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                object.__setattr__(obj, fld.name, float(v))
