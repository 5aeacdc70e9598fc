"""Training data: loading, preprocessing, thresholds and cuts.

Example subsets are represented as Python ints used as bitsets over the
dense example ids ``0..n-1``.
"""
from __future__ import annotations

import csv
import io
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class ClassLabel(IntEnum):
    RED = 0
    BLUE = 1

    @property
    def other(self) -> "ClassLabel":
        return ClassLabel(1 - self)

    def __str__(self) -> str:
        return self.name.lower()


RED = ClassLabel.RED
BLUE = ClassLabel.BLUE


class ParseError(ValueError):
    pass


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class Cut:
    dim: int
    thr: float

    def __str__(self) -> str:
        return f"(d{self.dim}, {self.thr:g})"


@dataclass(frozen=True)
class Example:
    id: int
    coords: tuple[float, ...]
    label: ClassLabel


def bits(mask: int) -> Iterable[int]:
    """Yield the set positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(ids: Iterable[int]) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def compute_thresholds(values: Iterable[float]) -> list[float]:
    """Minimal threshold list: every distinct value except the largest."""
    distinct = sorted(set(values))
    return distinct[:-1]


class DataSet:
    """Immutable two-class data set with thresholds and cut masks.

    ``left_masks[i][k]`` is the bitset of examples with value at most
    ``thresholds[i][k]`` in dimension ``i``.
    """

    def __init__(
        self,
        X: Sequence[Sequence[float]],
        labels: Sequence[int],
        feature_names: Sequence[str] | None = None,
    ):
        self.X: tuple[tuple[float, ...], ...] = tuple(tuple(float(v) for v in row) for row in X)
        self.labels: tuple[ClassLabel, ...] = tuple(ClassLabel(int(y)) for y in labels)
        if len(self.X) != len(self.labels):
            raise InstanceError("row count and label count differ")
        self.n = len(self.X)
        if self.n:
            self.d = len(self.X[0])
            if any(len(row) != self.d for row in self.X):
                raise InstanceError("ragged example matrix")
        else:
            self.d = len(feature_names) if feature_names is not None else 0
        if feature_names is None:
            feature_names = [f"d{i}" for i in range(self.d)]
        if len(feature_names) != self.d:
            raise InstanceError("feature name count does not match dimension")
        self.feature_names = tuple(feature_names)

        seen: dict[tuple[float, ...], ClassLabel] = {}
        for row, y in zip(self.X, self.labels):
            if seen.setdefault(row, y) != y:
                raise InstanceError(f"conflicting duplicate example {row}")

        self.thresholds: tuple[tuple[float, ...], ...] = tuple(
            tuple(compute_thresholds(row[i] for row in self.X)) for i in range(self.d)
        )
        # rank[e][i]: position of X[e][i] among the distinct values of dimension i
        self.rank: tuple[tuple[int, ...], ...] = tuple(
            tuple(bisect_left(self.thresholds[i], row[i]) for i in range(self.d)) for row in self.X
        )
        masks = []
        for i in range(self.d):
            col = [row[i] for row in self.X]
            dim_masks = []
            for t in self.thresholds[i]:
                dim_masks.append(to_mask(e for e, v in enumerate(col) if v <= t))
            masks.append(tuple(dim_masks))
        self.left_masks: tuple[tuple[int, ...], ...] = tuple(masks)
        self.all_mask = (1 << self.n) - 1
        self.label_masks = (
            to_mask(e for e, y in enumerate(self.labels) if y == RED),
            to_mask(e for e, y in enumerate(self.labels) if y == BLUE),
        )

    # -- stats -------------------------------------------------------------

    @property
    def c(self) -> int:
        return sum(len(t) for t in self.thresholds)

    @property
    def D(self) -> int:
        return max((len(t) + 1 for t in self.thresholds), default=0)

    @cached_property
    def delta(self) -> int:
        red = [e for e in range(self.n) if self.labels[e] == RED]
        blue = [e for e in range(self.n) if self.labels[e] == BLUE]
        if not red or not blue or self.d == 0:
            return 0
        A = np.asarray(self.X, dtype=float)
        R, B = A[red], A[blue]
        best = 0
        step = max(1, 2_000_000 // max(1, len(blue) * self.d))
        for s in range(0, len(R), step):
            diff = (R[s:s + step, None, :] != B[None, :, :]).sum(axis=2)
            best = max(best, int(diff.max()))
        return best

    def stats(self) -> dict:
        return {"n": self.n, "d": self.d, "c": self.c, "delta": self.delta, "D": self.D}

    # -- accessors ---------------------------------------------------------

    @property
    def examples(self) -> list[Example]:
        return [Example(e, self.X[e], self.labels[e]) for e in range(self.n)]

    def cuts(self) -> list[Cut]:
        return [Cut(i, t) for i in range(self.d) for t in self.thresholds[i]]

    def cut_index(self, cut: Cut) -> int:
        """Index of ``cut.thr`` within ``thresholds[cut.dim]``."""
        try:
            return self.thresholds[cut.dim].index(cut.thr)
        except ValueError:
            raise ValueError(f"{cut} is not a cut of this data set") from None

    def left_mask(self, cut: Cut) -> int:
        return self.left_masks[cut.dim][self.cut_index(cut)]

    def has_both_classes(self) -> bool:
        return bool(self.label_masks[0]) and bool(self.label_masks[1])

    def subset(self, mask: int) -> "DataSet":
        """Data set restricted to the examples in ``mask`` (ids renumbered densely)."""
        ids = list(bits(mask))
        return DataSet([self.X[e] for e in ids], [self.labels[e] for e in ids], self.feature_names)

    def with_values(self, X: Sequence[Sequence[float]], feature_names: Sequence[str] | None = None) -> "DataSet":
        return DataSet(X, self.labels, self.feature_names if feature_names is None else feature_names)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(self.feature_names) + ["class"])
        for row, y in zip(self.X, self.labels):
            w.writerow([f"{v:g}" for v in row] + [str(y)])
        return buf.getvalue()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DataSet):
            return NotImplemented
        return self.X == other.X and self.labels == other.labels

    def __hash__(self) -> int:
        return hash((self.X, self.labels))

    def __repr__(self) -> str:
        return f"DataSet(n={self.n}, d={self.d}, c={self.c})"


def cut_sides(ds: DataSet, subset: int, cut: Cut) -> tuple[int, int]:
    left = subset & ds.left_mask(cut)
    return left, subset & ~left


# -- preprocessing -----------------------------------------------------------


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def binarize_categoricals(
    header: Sequence[str], rows: Sequence[Sequence[str]]
) -> tuple[list[str], list[list[float]]]:
    """One-hot expand every column containing a non-numeric cell.

    Categories are expanded in sorted order; the empty string yields no
    indicator column.
    """
    names: list[str] = []
    columns: list[list[float]] = []
    for j, name in enumerate(header):
        col = [r[j].strip() for r in rows]
        if all(_is_number(v) for v in col):
            names.append(name)
            columns.append([float(v) for v in col])
            continue
        for cat in sorted(set(col) - {""}):
            names.append(f"{name}={cat}")
            columns.append([1.0 if v == cat else 0.0 for v in col])
    table = [list(r) for r in zip(*columns)] if columns else [[] for _ in rows]
    return names, table


def relabel_largest_class(labels: Sequence[str]) -> list[ClassLabel]:
    """Most frequent raw class becomes RED, everything else BLUE.

    Ties go to the lexicographically smallest raw class.
    """
    if not labels:
        return []
    counts = Counter(labels)
    top = max(counts.values())
    red = min(c for c, k in counts.items() if k == top)
    return [RED if y == red else BLUE for y in labels]


def dedupe_conflicts(
    X: Sequence[Sequence[float]], labels: Sequence[int]
) -> tuple[list[tuple[float, ...]], list[ClassLabel], list[int]]:
    """Drop examples whose coordinates collide with an earlier, differently
    labelled example. Returns the kept rows, labels and original indices.
    """
    first: dict[tuple[float, ...], int] = {}
    for e, row in enumerate(X):
        first.setdefault(tuple(row), e)
    keep = [e for e, row in enumerate(X) if labels[e] == labels[first[tuple(row)]]]
    return [tuple(X[e]) for e in keep], [ClassLabel(labels[e]) for e in keep], keep


def _pick_class_column(header: Sequence[str], class_column: str | int | None) -> int:
    if class_column is None:
        lowered = [h.strip().lower() for h in header]
        for name in ("class", "target"):
            if name in lowered:
                return lowered.index(name)
        return len(header) - 1
    if isinstance(class_column, int):
        idx = class_column if class_column >= 0 else len(header) + class_column
        if not 0 <= idx < len(header):
            raise ParseError(f"class column index {class_column} out of range")
        return idx
    if class_column.isdigit():
        return _pick_class_column(header, int(class_column))
    if class_column not in header:
        raise ParseError(f"no column named {class_column!r}")
    return list(header).index(class_column)


def parse_csv(
    text: str | io.TextIOBase,
    class_column: str | int | None = None,
    delimiter: str = ",",
    require_two_classes: bool = False,
) -> DataSet:
    """Parse a delimited table with a header row into a preprocessed DataSet."""
    if not isinstance(text, str):
        text = text.read()
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    lines = [(reader.line_num, row) for row in reader if row and any(c.strip() for c in row)]
    if not lines:
        raise InstanceError("empty input")
    _, header = lines[0]
    header = [h.strip() for h in header]
    rows = []
    for lineno, row in lines[1:]:
        if len(row) != len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        rows.append(row)
    if not rows:
        raise InstanceError("data set has no examples")
    cls = _pick_class_column(header, class_column)
    raw_labels = [r[cls].strip() for r in rows]
    feat_header = [h for j, h in enumerate(header) if j != cls]
    feat_rows = [[c for j, c in enumerate(r) if j != cls] for r in rows]
    names, X = binarize_categoricals(feat_header, feat_rows)
    labels = relabel_largest_class(raw_labels)
    X, labels, _ = dedupe_conflicts(X, labels)
    if require_two_classes and len(set(labels)) < 2:
        raise InstanceError("fewer than two classes after relabelling")
    return DataSet(X, labels, names)


def load_csv(path, **kwargs) -> DataSet:
    with open(path, newline="") as fh:
        return parse_csv(fh.read(), **kwargs)
