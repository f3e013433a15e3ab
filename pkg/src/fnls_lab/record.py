"""Time-series diagnostics of an evolution run.

A RunRecord is the persistent face of every run: sampled times with mass,
energy and whichever norms were requested.  Serialization is a CSV with
columns t, mass, energy, then one column per norm, plus a JSON metadata
sidecar (equation parameters, grid, step size, code version).
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DimensionError, RecordError
from .ioutil import write_csv_atomic, write_json_atomic


def sobolev_column(s: float) -> str:
    return f"h_{s:g}"


def winf_column(s: float) -> str:
    return f"winf_{s:g}"


def modified_column(n: int) -> str:
    return f"menergy_{n}"


@dataclass
class RunRecord:
    """Sampled diagnostics along a single evolution."""

    times: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    linf: np.ndarray
    sobolev: dict = dc_field(default_factory=dict)   # s -> array
    winf: dict = dc_field(default_factory=dict)      # s -> array of sup|..D..^s u|
    modified: dict = dc_field(default_factory=dict)  # n -> array
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0.0):
            raise DimensionError("record times must be strictly increasing")
        n = len(self.times)
        for name, arr in self._all_columns():
            if len(arr) != n:
                raise DimensionError(f"column {name} has {len(arr)} entries, expected {n}")

    def _all_columns(self):
        yield "mass", self.mass
        yield "energy", self.energy
        yield "linf", self.linf
        for s in sorted(self.sobolev):
            yield sobolev_column(s), self.sobolev[s]
        for s in sorted(self.winf):
            yield winf_column(s), self.winf[s]
        for n in sorted(self.modified):
            yield modified_column(n), self.modified[n]

    @property
    def header(self):
        return ["t"] + [name for name, _ in self._all_columns()]

    def column(self, name: str) -> np.ndarray:
        if name == "t":
            return self.times
        for col, arr in self._all_columns():
            if col == name:
                return np.asarray(arr, dtype=float)
        raise RecordError(f"record has no column {name!r}; available: {self.header}")

    def rows(self):
        cols = [self.times] + [np.asarray(a, dtype=float) for _, a in self._all_columns()]
        for i in range(len(self.times)):
            yield [float(c[i]) for c in cols]

    def write_csv(self, path):
        write_csv_atomic(path, self.header, self.rows())

    def write_meta(self, path):
        write_json_atomic(path, self.meta)

    @classmethod
    def from_csv_columns(cls, header, data, meta=None):
        """Rebuild from parsed CSV content (used by readers and tests)."""
        cols = {h: np.asarray(col, dtype=float) for h, col in zip(header, data)}
        if "t" not in cols:
            raise RecordError("CSV is missing the t column")
        sob, wnf, mod = {}, {}, {}
        for h, arr in cols.items():
            if h.startswith("h_"):
                sob[float(h[2:])] = arr
            elif h.startswith("winf_"):
                wnf[float(h[5:])] = arr
            elif h.startswith("menergy_"):
                mod[int(h[8:])] = arr
        return cls(
            times=cols["t"],
            mass=cols.get("mass", np.full_like(cols["t"], np.nan)),
            energy=cols.get("energy", np.full_like(cols["t"], np.nan)),
            linf=cols.get("linf", np.full_like(cols["t"], np.nan)),
            sobolev=sob, winf=wnf, modified=mod, meta=meta or {},
        )
