# src/evaluation/metrics.py
from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.errors import DataError, DimensionError
from src.schema import REPORT_COLUMNS

CLASS_NAMES = {0: "healthy", 1: "snail_trail"}


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray      # 2x2, rows = true class, columns = predicted class

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def row_normalized(self) -> np.ndarray:
        rows = self.counts.sum(axis=1, keepdims=True).astype(float)
        return np.divide(self.counts, rows, out=np.zeros((2, 2)), where=rows > 0)

    def transpose(self) -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts.T.copy())


def confusion(y_true: Sequence[int], y_pred: Sequence[int]) -> ConfusionMatrix:
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape:
        raise DimensionError(f"{t.size} true labels but {p.size} predictions")
    if t.size == 0:
        raise DataError("confusion matrix needs at least one prediction")
    if not (np.isin(t, (0, 1)).all() and np.isin(p, (0, 1)).all()):
        raise DataError("labels must be 0 or 1")
    counts = np.zeros((2, 2), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts)


def _ratio(num: int, den: int) -> Optional[Fraction]:
    return Fraction(num, den) if den else None


def class_scores(cm: ConfusionMatrix, cls: int) -> Tuple[Fraction, Fraction, Fraction]:
    """Exact (precision, recall, f1) for one class; undefined ratios count as 0."""
    c = cm.counts
    tp = int(c[cls, cls])
    fp = int(c[1 - cls, cls])
    fn = int(c[cls, 1 - cls])
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = Fraction(0)
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return precision or Fraction(0), recall or Fraction(0), f1


def f_score(cm: ConfusionMatrix, mode: Union[str, int] = "macro") -> float:
    """
    F1 of class `mode` (0 or 1), or the unweighted mean over both classes for
    'macro'. Computed on exact rationals.
    """
    if cm.total < 1:
        raise DataError("F-score needs at least one prediction")
    if mode == "macro":
        return float((class_scores(cm, 0)[2] + class_scores(cm, 1)[2]) / 2)
    if mode in (0, 1):
        return float(class_scores(cm, int(mode))[2])
    raise ValueError(f"mode must be 0, 1 or 'macro', got {mode!r}")


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    precision: Tuple[float, float]
    recall: Tuple[float, float]
    f1: Tuple[float, float]
    f_score: float                  # macro-F1
    recall_pct: np.ndarray          # row-normalized confusion

    def rows(self) -> List[Tuple[str, str, float]]:
        out: List[Tuple[str, str, float]] = []
        for t in (0, 1):
            for p in (0, 1):
                out.append((f"count_pred_{p}", str(t), float(self.confusion.counts[t, p])))
        for t in (0, 1):
            for p in (0, 1):
                out.append((f"rate_pred_{p}", str(t), float(self.recall_pct[t, p])))
        for cls in (0, 1):
            out.append(("precision", str(cls), self.precision[cls]))
            out.append(("recall", str(cls), self.recall[cls]))
            out.append(("f1", str(cls), self.f1[cls]))
        out.append(("f1_macro", "all", self.f_score))
        return out


def evaluate(y_true: Sequence[int], y_pred: Sequence[int]) -> EvalReport:
    cm = confusion(y_true, y_pred)
    scores = [class_scores(cm, c) for c in (0, 1)]
    return EvalReport(
        confusion=cm,
        precision=tuple(float(s[0]) for s in scores),
        recall=tuple(float(s[1]) for s in scores),
        f1=tuple(float(s[2]) for s in scores),
        f_score=f_score(cm, "macro"),
        recall_pct=cm.row_normalized(),
    )


# ---------------------------
# Rendering
# ---------------------------

def render_text(report: EvalReport, title: str = "Random forest") -> str:
    c, r = report.confusion.counts, report.recall_pct
    lines = [
        f"{title}  (n={report.confusion.total})",
        "",
        "confusion (rows = true, cols = predicted)",
        f"{'':>14}{'pred 0':>10}{'pred 1':>10}",
    ]
    for t in (0, 1):
        lines.append(f"{'true ' + str(t):>14}{c[t, 0]:>10d}{c[t, 1]:>10d}")
    lines += ["", "row-normalized", f"{'':>14}{'pred 0':>10}{'pred 1':>10}"]
    for t in (0, 1):
        lines.append(f"{'true ' + str(t):>14}{r[t, 0]:>10.2f}{r[t, 1]:>10.2f}")
    lines += ["", f"{'class':<14}{'precision':>10}{'recall':>10}{'f1':>10}"]
    for cls in (0, 1):
        name = f"{cls} {CLASS_NAMES[cls]}"
        lines.append(f"{name:<14}{report.precision[cls]:>10.4f}{report.recall[cls]:>10.4f}{report.f1[cls]:>10.4f}")
    lines += ["", f"macro F1: {report.f_score:.4f}"]
    return "\n".join(lines) + "\n"


def render_csv(reports: Dict[str, EvalReport]) -> str:
    """`metric,class,value` rows; metrics of extra reports are prefixed with their key."""
    records = []
    for key, report in reports.items():
        prefix = "" if key == "forest" else f"{key}_"
        records.extend((prefix + m, c, v) for m, c, v in report.rows())
    buf = io.StringIO()
    pd.DataFrame.from_records(records, columns=REPORT_COLUMNS).to_csv(
        buf, index=False, float_format="%.6g", lineterminator="\n")
    return buf.getvalue()
