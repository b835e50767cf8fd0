"""Run configuration and CSV/JSON file contracts for the command-line tool.

File layouts (all CSV written with full round-trip precision):

* data:    ``t,y,x1..xp``
* truth:   ``t,theta1..thetap``
* results: ``t,coord,method,mean,sd``
* bands:   ``t,coord,method,mean,lower,upper`` with lower/upper = mean -/+ sd
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import DynProbitError
from .model import ModelSpec

SCHEMA_VERSION = 1


class ConfigError(DynProbitError):
    """Configuration document failed validation."""


class DataError(DynProbitError):
    """Input CSV does not satisfy the data contract."""


def _schema():
    return json.loads(resources.files("dynprobit").joinpath("config_schema.json").read_text())


@dataclass
class RunConfig:
    p: int | None = None
    P0: list | None = None
    G: list | None = None
    W: list | None = None
    method: str = "pfm"
    reference: str = "iid"
    draws: int = 10_000
    seed: int = 0
    sampler: dict = field(default_factory=dict)
    cavi: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)
    data: str | None = None
    out: str | None = None
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, doc):
        try:
            jsonschema.validate(doc, _schema())
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {where}: {exc.message}") from None
        return cls(**doc)

    @classmethod
    def load(cls, path):
        if path is None:
            return cls()
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(doc)

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "p": self.p,
            "P0": self.P0,
            "G": self.G,
            "W": self.W,
            "method": self.method,
            "reference": self.reference,
            "draws": self.draws,
            "seed": self.seed,
            "sampler": self.sampler,
            "cavi": self.cavi,
            "simulate": self.simulate,
        }

    def model_spec(self, x):
        """ModelSpec for covariates ``x`` (n, p) with the configured or default G, W, P0."""
        p = x.shape[1]
        if self.p is not None and p != self.p:
            raise DataError(f"config p={self.p} but data has {p} covariates")
        try:
            return ModelSpec.time_invariant(
                x,
                G=None if self.G is None else np.asarray(self.G, dtype=float),
                W=None if self.W is None else np.asarray(self.W, dtype=float),
                P0=None if self.P0 is None else np.asarray(self.P0, dtype=float),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def fmt(v):
    """Shortest string that parses back to the same double."""
    return repr(float(v))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_data(path, y, x):
    p = x.shape[1]
    header = ["t", "y"] + [f"x{j + 1}" for j in range(p)]
    rows = ([t + 1, int(y[t])] + [fmt(v) for v in x[t]] for t in range(len(y)))
    write_csv(path, header, rows)


def write_truth(path, theta):
    header = ["t"] + [f"theta{j + 1}" for j in range(theta.shape[1])]
    write_csv(path, header, ([t + 1] + [fmt(v) for v in theta[t]] for t in range(theta.shape[0])))


def read_data(path):
    """Parse a data CSV into (y, x); errors name the offending line."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read data {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        p = len(header) - 2
        expected = ["t", "y"] + [f"x{j + 1}" for j in range(p)]
        if p < 1 or header != expected:
            raise DataError(f"{path}: header must be t,y,x1..xp, got {','.join(header)}")
        ys, xs = [], []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != p + 2:
                raise DataError(f"{path} line {line}: expected {p + 2} fields, got {len(row)}")
            try:
                t = int(row[0])
            except ValueError:
                raise DataError(f"{path} line {line}: t must be an integer") from None
            if t != len(ys) + 1:
                raise DataError(f"{path} line {line}: t must run 1..n consecutively, got {t}")
            if row[1].strip() not in ("0", "1"):
                raise DataError(f"{path} line {line}: y must be 0 or 1, got {row[1]!r}")
            try:
                x = [float(v) for v in row[2:]]
            except ValueError:
                raise DataError(f"{path} line {line}: covariates must be numeric") from None
            if not all(math.isfinite(v) for v in x):
                raise DataError(f"{path} line {line}: covariates must be finite")
            ys.append(int(row[1]))
            xs.append(x)
    if not ys:
        raise DataError(f"{path}: no data rows")
    return np.array(ys, dtype=np.int64), np.array(xs, dtype=float)


def summary_rows(summary, p):
    mean, sd = summary.by_time(p)
    for t in range(mean.shape[0]):
        for j in range(p):
            yield [t + 1, j + 1, summary.method, fmt(mean[t, j]), fmt(sd[t, j])]


def band_rows(summary, p):
    mean, sd = summary.by_time(p)
    for t in range(mean.shape[0]):
        for j in range(p):
            m, s = mean[t, j], sd[t, j]
            yield [t + 1, j + 1, summary.method, fmt(m), fmt(m - s), fmt(m + s)]


def write_results(path, summaries, p):
    rows = [r for s in summaries for r in summary_rows(s, p)]
    write_csv(path, ["t", "coord", "method", "mean", "sd"], rows)


def write_bands(path, summaries, p):
    rows = [r for s in summaries for r in band_rows(s, p)]
    write_csv(path, ["t", "coord", "method", "mean", "lower", "upper"], rows)


def read_results(path):
    """Results CSV back into {method: (mean (n, p), sd (n, p))}."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = {}
    for method in dict.fromkeys(r["method"] for r in rows):
        sub = [r for r in rows if r["method"] == method]
        n = max(int(r["t"]) for r in sub)
        p = max(int(r["coord"]) for r in sub)
        mean = np.empty((n, p))
        sd = np.empty((n, p))
        for r in sub:
            mean[int(r["t"]) - 1, int(r["coord"]) - 1] = float(r["mean"])
            sd[int(r["t"]) - 1, int(r["coord"]) - 1] = float(r["sd"])
        out[method] = (mean, sd)
    return out
