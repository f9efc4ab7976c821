"""Seeded synthetic sample streams for tests, benchmarks, and demos.

Every preset is deterministic given (n, seed) and emits already-normalized
values in [-1, 1] (codes for categorical attributes), so the streams can
feed the tree directly or be written out as CSV through the schema layer.

The bimodal preset is the discriminating case for distribution estimators:
both classes share mean and near-equal variance on the informative
attribute, so a Gaussian fit sees them as the same distribution while the
CDF shapes differ sharply.
"""

from __future__ import annotations

import csv
from typing import Callable, Iterator

import numpy as np

from .schema import (
    CATEGORICAL,
    NUMERIC,
    AttributeSpec,
    DatasetSchema,
    Sample,
    denormalize,
)


def _threshold(n: int, rng: np.random.Generator) -> Iterator[Sample]:
    # label = [a0 > 0.2], 5% label noise, one distractor attribute
    a = rng.uniform(-1.0, 1.0, (n, 2))
    flip = rng.random(n) < 0.05
    for k in range(n):
        y = 1 if a[k, 0] > 0.2 else 0
        if flip[k]:
            y = 1 - y
        yield Sample([float(a[k, 0]), float(a[k, 1])], y)


def _xor(n: int, rng: np.random.Generator) -> Iterator[Sample]:
    # label = sign(a0) xor sign(a1): no single split separates it
    a = rng.uniform(-1.0, 1.0, (n, 2))
    for k in range(n):
        y = int((a[k, 0] > 0.0) != (a[k, 1] > 0.0))
        yield Sample([float(a[k, 0]), float(a[k, 1])], y)


def _bimodal(n: int, rng: np.random.Generator) -> Iterator[Sample]:
    # class 0: mixture of N(-0.6, 0.1) and N(+0.6, 0.1) -> mean 0, var ~0.37
    # class 1: uniform(-1, 1)                           -> mean 0, var ~0.33
    ys = rng.integers(0, 2, n)
    sides = rng.integers(0, 2, n) * 2 - 1
    g = rng.normal(0.0, 0.1, n)
    u = rng.uniform(-1.0, 1.0, n)
    d = rng.uniform(-1.0, 1.0, n)  # uninformative distractor
    for k in range(n):
        if ys[k] == 0:
            x = float(np.clip(sides[k] * 0.6 + g[k], -1.0, 1.0))
        else:
            x = float(u[k])
        yield Sample([x, float(d[k])], int(ys[k]))


def _gauss_shift(n: int, rng: np.random.Generator) -> Iterator[Sample]:
    # classic Gaussian-friendly case: class means at -0.4 / +0.4
    ys = rng.integers(0, 2, n)
    x = rng.normal(0.0, 0.2, n) + (ys * 2 - 1) * 0.4
    x = np.clip(x, -1.0, 1.0)
    d = rng.uniform(-1.0, 1.0, n)
    for k in range(n):
        yield Sample([float(x[k]), float(d[k])], int(ys[k]))


def _categorical(n: int, rng: np.random.Generator) -> Iterator[Sample]:
    # code 0/1 -> class 0 (90%), code 2/3 -> class 1 (90%)
    codes = rng.integers(0, 4, n)
    flip = rng.random(n) < 0.1
    d = rng.uniform(-1.0, 1.0, n)
    for k in range(n):
        y = 0 if codes[k] < 2 else 1
        if flip[k]:
            y = 1 - y
        yield Sample([int(codes[k]), float(d[k])], y)


def _uniform_noise(n: int, rng: np.random.Generator) -> Iterator[Sample]:
    a = rng.uniform(-1.0, 1.0, (n, 2))
    ys = rng.integers(0, 2, n)
    for k in range(n):
        yield Sample([float(a[k, 0]), float(a[k, 1])], int(ys[k]))


_TWO_NUMERIC = (
    AttributeSpec("a0", NUMERIC, declared_min=-1.0, declared_max=1.0),
    AttributeSpec("a1", NUMERIC, declared_min=-1.0, declared_max=1.0),
)

PRESETS: dict[str, tuple[DatasetSchema, Callable]] = {
    "threshold": (DatasetSchema(_TWO_NUMERIC, 2), _threshold),
    "xor": (DatasetSchema(_TWO_NUMERIC, 2), _xor),
    "bimodal": (DatasetSchema(_TWO_NUMERIC, 2), _bimodal),
    "gauss-shift": (DatasetSchema(_TWO_NUMERIC, 2), _gauss_shift),
    "categorical": (
        DatasetSchema(
            (
                AttributeSpec("c0", CATEGORICAL, cardinality=4),
                AttributeSpec("a1", NUMERIC, declared_min=-1.0, declared_max=1.0),
            ),
            2,
        ),
        _categorical,
    ),
    "uniform-noise": (DatasetSchema(_TWO_NUMERIC, 2), _uniform_noise),
}


def preset_schema(name: str) -> DatasetSchema:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name][0]


def generate(name: str, n: int, seed: int = 0) -> Iterator[Sample]:
    """Yield n samples from a named preset, deterministic in (n, seed)."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    _, gen = PRESETS[name]
    return gen(n, np.random.default_rng(seed))


def write_csv(path: str, name: str, n: int, seed: int = 0) -> DatasetSchema:
    """Materialize a preset as a raw CSV the schema layer can re-ingest."""
    schema = preset_schema(name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        for s in generate(name, n, seed):
            row = []
            for v, spec in zip(s.values, schema.attributes):
                if spec.kind == NUMERIC:
                    row.append(repr(denormalize(v, spec)))
                else:
                    row.append(str(v))
            row.append(str(s.label))
            w.writerow(row)
    return schema
