"""Data model and CSV ingestion for two-arm (2x2xN) and multinomial (JxKxN) tables.

Two-arm CSV schema (UTF-8, comma-delimited, no quoting of numerics):

    center,arm,successes,total
    1,treatment,11,36
    1,control,10,37
    ...

with arm in {treatment, control} and exactly two rows per center.

Multinomial CSV schema (long format, one count per row):

    center,treatment,outcome,count
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import TableParseError
from .validation import as_readonly

__all__ = [
    "BinomialCell",
    "TwoArmTable",
    "MultinomialTable",
    "ARMS",
    "kappa",
    "mle_log_odds",
    "load_two_arm_csv",
    "save_two_arm_csv",
    "load_multinomial_csv",
    "save_multinomial_csv",
    "skene_wakefield_table",
]

ARMS = ("treatment", "control")


@dataclass(frozen=True)
class BinomialCell:
    """One (successes, total) cell; fractional values arise from pseudo-counts."""

    successes: float
    total: float

    def __post_init__(self):
        y, n = float(self.successes), float(self.total)
        if not (math.isfinite(y) and math.isfinite(n)):
            raise ValueError(f"cell counts must be finite, got ({self.successes}, {self.total})")
        if y < 0 or n < 0 or y > n:
            raise ValueError(f"cell must satisfy 0 <= successes <= total, got ({y}, {n})")
        object.__setattr__(self, "successes", y)
        object.__setattr__(self, "total", n)


def kappa(successes, totals):
    """Linear-term coefficient of the augmented normal kernel: y - n/2."""
    return np.asarray(successes, dtype=float) - np.asarray(totals, dtype=float) / 2.0


def mle_log_odds(cell: BinomialCell) -> float:
    """Unpooled log-odds MLE log(y / (n - y)).

    Returns -inf when y = 0 and +inf when y = n; a cell with n = 0 has no
    MLE and raises.
    """
    y, n = cell.successes, cell.total
    if n == 0:
        raise ValueError("log-odds MLE is undefined for a cell with total 0")
    if y == 0:
        return -math.inf
    if y == n:
        return math.inf
    return math.log(y / (n - y))


class TwoArmTable:
    """N centers by 2 arms of (successes, totals), column order (treatment, control).

    Immutable after construction; the count arrays are read-only views.
    """

    def __init__(self, successes, totals, labels=None):
        y = as_readonly(np.atleast_2d(successes))
        n = as_readonly(np.atleast_2d(totals))
        if y.shape != n.shape or y.ndim != 2 or y.shape[1] != 2 or y.shape[0] < 1:
            raise ValueError(f"expected matching (N, 2) count arrays, got {y.shape} and {n.shape}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(n))):
            raise ValueError("counts must be finite")
        if np.any(y < 0) or np.any(y > n):
            raise ValueError("each cell must satisfy 0 <= successes <= total")
        self.successes = y
        self.totals = n
        if labels is None:
            labels = [str(i + 1) for i in range(y.shape[0])]
        labels = [str(l) for l in labels]
        if len(labels) != y.shape[0]:
            raise ValueError("labels length must match the number of centers")
        if len(set(labels)) != len(labels):
            raise ValueError("center labels must be unique")
        self.labels = tuple(labels)

    @property
    def n_centers(self) -> int:
        return self.successes.shape[0]

    def cell(self, i, arm) -> BinomialCell:
        j = ARMS.index(arm) if arm in ARMS else int(arm)
        return BinomialCell(self.successes[i, j], self.totals[i, j])

    def kappa(self):
        return kappa(self.successes, self.totals)

    def mle_log_odds(self):
        """Per-cell MLE matrix with +/-inf sentinels; nan for empty cells."""
        y, n = self.successes, self.totals
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(y / (n - y))
        out = np.where((y == 0) & (n > 0), -np.inf, out)
        out = np.where((y == n) & (n > 0), np.inf, out)
        out = np.where(n == 0, np.nan, out)
        return out

    def swap_arms(self):
        """Table with treatment and control columns exchanged."""
        return TwoArmTable(self.successes[:, ::-1], self.totals[:, ::-1], self.labels)

    def permute_centers(self, order):
        order = list(order)
        return TwoArmTable(
            self.successes[order], self.totals[order], [self.labels[i] for i in order]
        )

    def __eq__(self, other):
        if not isinstance(other, TwoArmTable):
            return NotImplemented
        return (
            self.labels == other.labels
            and np.array_equal(self.successes, other.successes)
            and np.array_equal(self.totals, other.totals)
        )

    def __repr__(self):
        return f"TwoArmTable(n_centers={self.n_centers}, labels={list(self.labels)})"


def _format_count(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _parse_count(text, line, what):
    try:
        value = float(text)
    except ValueError:
        raise TableParseError(f"{what} {text!r} is not a number", line=line) from None
    if not value.is_integer() or value < 0:
        raise TableParseError(f"{what} must be a nonnegative integer, got {text!r}", line=line)
    return value


def load_two_arm_csv(path) -> TwoArmTable:
    """Parse a two-arm CSV; errors name the offending line."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TableParseError("no data rows") from None
        if [h.strip() for h in header] != ["center", "arm", "successes", "total"]:
            raise TableParseError(
                f"expected header 'center,arm,successes,total', got {','.join(header)!r}", line=1
            )
        cells = {}
        order = []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise TableParseError(f"expected 4 fields, got {len(row)}", line=lineno)
            center, arm, y_text, n_text = (field.strip() for field in row)
            if arm not in ARMS:
                raise TableParseError(f"arm must be 'treatment' or 'control', got {arm!r}", line=lineno)
            y = _parse_count(y_text, lineno, "successes")
            n = _parse_count(n_text, lineno, "total")
            if y > n:
                raise TableParseError(f"successes {y_text} exceed total {n_text}", line=lineno)
            if center not in cells:
                cells[center] = {}
                order.append(center)
            if arm in cells[center]:
                raise TableParseError(f"duplicate {arm} row for center {center!r}", line=lineno)
            cells[center][arm] = (y, n)
    if not order:
        raise TableParseError("no data rows")
    for center in order:
        missing = [arm for arm in ARMS if arm not in cells[center]]
        if missing:
            raise TableParseError(f"center {center!r} is missing its {missing[0]} row")
    successes = [[cells[c]["treatment"][0], cells[c]["control"][0]] for c in order]
    totals = [[cells[c]["treatment"][1], cells[c]["control"][1]] for c in order]
    return TwoArmTable(successes, totals, labels=order)


def save_two_arm_csv(table: TwoArmTable, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["center", "arm", "successes", "total"])
        for i, label in enumerate(table.labels):
            for j, arm in enumerate(ARMS):
                writer.writerow(
                    [label, arm, _format_count(table.successes[i, j]), _format_count(table.totals[i, j])]
                )


class MultinomialTable:
    """Counts y[i, j, k] for N centers, J treatments, K outcomes (baseline last)."""

    def __init__(self, counts, center_labels=None, treatment_labels=None, outcome_labels=None):
        counts = as_readonly(np.asarray(counts, dtype=float))
        if counts.ndim != 3:
            raise ValueError(f"expected counts with shape (N, J, K), got {counts.shape}")
        n, j, k = counts.shape
        if n < 1 or j < 1 or k < 2:
            raise ValueError(f"need N >= 1, J >= 1, K >= 2, got shape {counts.shape}")
        if np.any(counts < 0) or not np.all(np.isfinite(counts)):
            raise ValueError("counts must be finite and nonnegative")
        self.counts = counts
        self.center_labels = tuple(
            str(x) for x in (center_labels or [str(i + 1) for i in range(n)])
        )
        self.treatment_labels = tuple(
            str(x) for x in (treatment_labels or [str(i + 1) for i in range(j)])
        )
        self.outcome_labels = tuple(
            str(x) for x in (outcome_labels or [str(i + 1) for i in range(k)])
        )
        if (
            len(self.center_labels) != n
            or len(self.treatment_labels) != j
            or len(self.outcome_labels) != k
        ):
            raise ValueError("label lengths must match the counts shape")

    @property
    def shape(self):
        return self.counts.shape

    def totals(self):
        """Row totals n[i, j] = sum_k y[i, j, k]."""
        return self.counts.sum(axis=2)

    def kappa(self):
        """kappa[i, j, k] = y[i, j, k] - n[i, j] / 2."""
        return self.counts - self.totals()[:, :, None] / 2.0

    def __eq__(self, other):
        if not isinstance(other, MultinomialTable):
            return NotImplemented
        return (
            self.center_labels == other.center_labels
            and self.treatment_labels == other.treatment_labels
            and self.outcome_labels == other.outcome_labels
            and np.array_equal(self.counts, other.counts)
        )

    def __repr__(self):
        n, j, k = self.shape
        return f"MultinomialTable(N={n}, J={j}, K={k})"


def load_multinomial_csv(path, baseline=None) -> MultinomialTable:
    """Parse a long-format multinomial CSV.

    Labels are indexed in first-seen order; the declared ``baseline``
    outcome (default: the last outcome seen) is moved to the final index,
    where the logit is pinned to zero.  Missing (center, treatment,
    outcome) combinations count as zero.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TableParseError("no data rows") from None
        if [h.strip() for h in header] != ["center", "treatment", "outcome", "count"]:
            raise TableParseError(
                f"expected header 'center,treatment,outcome,count', got {','.join(header)!r}", line=1
            )
        entries = {}
        centers, treatments, outcomes = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise TableParseError(f"expected 4 fields, got {len(row)}", line=lineno)
            center, treatment, outcome, count_text = (field.strip() for field in row)
            count = _parse_count(count_text, lineno, "count")
            key = (center, treatment, outcome)
            if key in entries:
                raise TableParseError(
                    f"duplicate row for center={center!r}, treatment={treatment!r}, outcome={outcome!r}",
                    line=lineno,
                )
            entries[key] = count
            if center not in centers:
                centers.append(center)
            if treatment not in treatments:
                treatments.append(treatment)
            if outcome not in outcomes:
                outcomes.append(outcome)
    if not entries:
        raise TableParseError("no data rows")
    baseline = str(baseline) if baseline is not None else outcomes[-1]
    if baseline not in outcomes:
        raise TableParseError(f"baseline outcome {baseline!r} does not appear in the data")
    outcomes = [o for o in outcomes if o != baseline] + [baseline]
    if len(outcomes) < 2:
        raise TableParseError("need at least 2 distinct outcomes")
    counts = np.zeros((len(centers), len(treatments), len(outcomes)))
    for (center, treatment, outcome), count in entries.items():
        counts[centers.index(center), treatments.index(treatment), outcomes.index(outcome)] = count
    return MultinomialTable(counts, centers, treatments, outcomes)


def save_multinomial_csv(table: MultinomialTable, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["center", "treatment", "outcome", "count"])
        for i, center in enumerate(table.center_labels):
            for j, treatment in enumerate(table.treatment_labels):
                for k, outcome in enumerate(table.outcome_labels):
                    writer.writerow([center, treatment, outcome, _format_count(table.counts[i, j, k])])


# Eight-center topical-cream trial of Skene & Wakefield (1990, Statistics
# in Medicine): (successes, total) per center for (treatment, control).
_SKENE_WAKEFIELD = (
    ((11, 36), (10, 37)),
    ((16, 20), (22, 32)),
    ((14, 19), (7, 19)),
    ((2, 16), (1, 17)),
    ((6, 17), (0, 12)),
    ((1, 11), (0, 10)),
    ((1, 5), (1, 9)),
    ((4, 6), (6, 7)),
)


def skene_wakefield_table() -> TwoArmTable:
    """The embedded eight-center topical-cream example table."""
    successes = [[t[0], c[0]] for t, c in _SKENE_WAKEFIELD]
    totals = [[t[1], c[1]] for t, c in _SKENE_WAKEFIELD]
    return TwoArmTable(successes, totals)
