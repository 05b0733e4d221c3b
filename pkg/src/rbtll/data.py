"""Observation samples and the two embedded lifetime datasets."""
import csv
import io
from pathlib import Path

import numpy as np

# time (thousands of hours) between failures of secondary reactor pumps
PUMP = (
    2.160, 0.746, 0.402, 0.954, 0.491, 6.560, 4.992, 0.347, 0.150, 0.358, 0.101, 1.359,
    3.465, 1.060, 0.614, 1.921, 4.082, 0.199, 0.605, 0.273, 0.070, 0.062, 5.320,
)

# petroleum rock samples, shape perimeter / sqrt(area)
ROCK = (
    0.0903296, 0.2036540, 0.2043140, 0.2808870, 0.1976530, 0.3286410, 0.1486220, 0.1623940,
    0.2627270, 0.1794550, 0.3266350, 0.2300810, 0.1833120, 0.1509440, 0.2000710, 0.1918020,
    0.1541920, 0.4641250, 0.1170630, 0.1481410, 0.1448100, 0.1330830, 0.2760160, 0.4204770,
    0.1224170, 0.2285950, 0.1138520, 0.2252140, 0.1769690, 0.2007440, 0.1670450, 0.2316230,
    0.2910290, 0.3412730, 0.4387120, 0.2626510, 0.1896510, 0.1725670, 0.2400770, 0.3116460,
    0.1635860, 0.1824530, 0.1641270, 0.1534810, 0.1618650, 0.2760160, 0.2538320, 0.2004470,
)

BUILTIN = {"pump": PUMP, "rock": ROCK}


class DataError(ValueError):
    """Unreadable or invalid observations."""


class Sample:
    """Immutable positive observations with the ascending order cached.

    ``values`` keeps the original order; ``sorted`` and ``log_sorted`` are
    read-only arrays computed once.
    """

    __slots__ = ("name", "source", "_values", "_sorted", "_log_sorted")

    def __init__(self, values, name="sample", source="array"):
        v = np.array(values, dtype=float).ravel()
        if v.size == 0:
            raise DataError("empty sample")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise DataError("observations must be finite and > 0")
        v.setflags(write=False)
        s = np.sort(v)
        s.setflags(write=False)
        ls = np.log(s)
        ls.setflags(write=False)
        self._values, self._sorted, self._log_sorted = v, s, ls
        self.name = name
        self.source = source

    @property
    def values(self):
        return self._values

    @property
    def sorted(self):
        return self._sorted

    @property
    def log_sorted(self):
        return self._log_sorted

    def __len__(self):
        return self._values.size

    def __iter__(self):
        return iter(self._values)

    def __repr__(self):
        return f"Sample(name={self.name!r}, n={len(self)})"

    def scaled(self, c):
        return Sample(self._values * c, name=f"{self.name}*{c:g}", source=self.source)


def builtin(name):
    try:
        return Sample(BUILTIN[name], name=name, source="builtin")
    except KeyError:
        raise DataError(f"unknown builtin dataset {name!r}; choose from {sorted(BUILTIN)}") from None


def parse_text(text, name="file"):
    """One observation per line; ``#`` comments and a single CSV header allowed."""
    values = []
    rows = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(rows, 1):
        cells = [c.split("#", 1)[0].strip() for c in row]
        cells = [c for c in cells if c]
        if not cells:
            continue
        if len(cells) != 1:
            raise DataError(f"line {lineno}: expected one value per line")
        try:
            values.append(float(cells[0]))
        except ValueError:
            if values:
                raise DataError(f"line {lineno}: not a number: {cells[0]!r}") from None
            continue  # header
    return Sample(values, name=name, source="file")


def load(ref):
    """Resolve ``builtin:<name>`` or a file path to a :class:`Sample`."""
    ref = str(ref)
    if ref.startswith("builtin:"):
        return builtin(ref.split(":", 1)[1])
    path = Path(ref)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {ref}: {exc}") from None
    return parse_text(text, name=path.stem)
