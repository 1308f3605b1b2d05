"""Instance-level evaluation: IoU, Dice, and panoptic PQ/SQ/RQ.

Matching uses the standard panoptic rule: a ground-truth and a predicted
instance match when their pixel IoU exceeds 0.5, which makes the
matching unique. SQ is the mean IoU over matches, RQ = TP/(TP + FP/2 +
FN/2), PQ = SQ*RQ. Per-pair Dice follows from IoU via 2*IoU/(1 + IoU);
a whole-foreground Dice is reported alongside as a supplementary score.
Zero-denominator cases (nothing matched, nothing present) score 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import LabelImage, Segmentation

__all__ = [
    "MatchTable",
    "MetricsReport",
    "match_instances",
    "panoptic_quality",
    "overlap_scores",
    "evaluate",
    "aggregate",
    "write_metrics_csv",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ["path", "n_gt", "n_pred", "iou", "dice", "pq", "sq", "rq", "fg_dice"]


@dataclass(frozen=True)
class MatchTable:
    pairs: tuple[tuple[int, int, float], ...]  # (gt_id, pred_id, iou), iou > 0.5
    unmatched_gt: tuple[int, ...]  # false negatives
    unmatched_pred: tuple[int, ...]  # false positives


@dataclass(frozen=True)
class MetricsReport:
    mean_iou: float
    dice: float
    pq: float
    sq: float
    rq: float
    fg_dice: float
    n_gt: int
    n_pred: int
    per_instance: tuple[tuple[int, int, float, float], ...] = field(default=())
    # rows: (gt_id, pred_id, iou, dice)


def _overlap_counts(gt: np.ndarray, pred: np.ndarray) -> tuple[np.ndarray, np.ndarray, dict]:
    n_gt = int(gt.max())
    n_pred = int(pred.max())
    gt_areas = np.bincount(gt.ravel(), minlength=n_gt + 1)
    pred_areas = np.bincount(pred.ravel(), minlength=n_pred + 1)
    both = (gt > 0) & (pred > 0)
    codes = gt[both].astype(np.int64) * (n_pred + 1) + pred[both].astype(np.int64)
    inter = {}
    for code, count in zip(*np.unique(codes, return_counts=True)):
        inter[(int(code) // (n_pred + 1), int(code) % (n_pred + 1))] = int(count)
    return gt_areas, pred_areas, inter


def match_instances(gt: LabelImage, pred: Segmentation) -> MatchTable:
    """Pair instances with pixel IoU > 0.5 (unique); the rest are FP/FN."""
    if (gt.height, gt.width) != (pred.height, pred.width):
        raise ValueError(
            f"dimension mismatch: gt {gt.width}x{gt.height} vs pred {pred.width}x{pred.height}"
        )
    gt_arr = gt.labels
    pred_arr = pred.instance_map
    gt_areas, pred_areas, inter = _overlap_counts(gt_arr, pred_arr)
    pairs = []
    matched_gt, matched_pred = set(), set()
    for (gi, pi), cnt in sorted(inter.items()):
        union = gt_areas[gi] + pred_areas[pi] - cnt
        iou = cnt / union
        if iou > 0.5:
            pairs.append((gi, pi, float(iou)))
            matched_gt.add(gi)
            matched_pred.add(pi)
    unmatched_gt = tuple(k for k in range(1, int(gt_arr.max()) + 1) if k not in matched_gt)
    unmatched_pred = tuple(k for k in range(1, int(pred_arr.max()) + 1) if k not in matched_pred)
    return MatchTable(pairs=tuple(pairs), unmatched_gt=unmatched_gt, unmatched_pred=unmatched_pred)


def panoptic_quality(table: MatchTable) -> tuple[float, float, float]:
    """(pq, sq, rq) with the zero-denominator convention pq = sq = rq = 0."""
    tp = len(table.pairs)
    fp = len(table.unmatched_pred)
    fn = len(table.unmatched_gt)
    sq = sum(iou for _, _, iou in table.pairs) / tp if tp else 0.0
    denom = tp + 0.5 * fp + 0.5 * fn
    rq = tp / denom if denom > 0 else 0.0
    return sq * rq, sq, rq


def overlap_scores(gt: LabelImage, pred: Segmentation) -> tuple[float, float]:
    """(mean IoU, mean Dice) over matched pairs; (0, 0) when nothing matches."""
    table = match_instances(gt, pred)
    if not table.pairs:
        return 0.0, 0.0
    ious = [iou for _, _, iou in table.pairs]
    dices = [2.0 * iou / (1.0 + iou) for iou in ious]
    return sum(ious) / len(ious), sum(dices) / len(dices)


def _foreground_dice(gt: np.ndarray, pred: np.ndarray) -> float:
    a = gt > 0
    b = pred > 0
    denom = int(a.sum()) + int(b.sum())
    if denom == 0:
        return 0.0
    return 2.0 * int((a & b).sum()) / denom


def evaluate(gt: LabelImage, pred: Segmentation) -> MetricsReport:
    """All metrics for one image pair."""
    table = match_instances(gt, pred)
    pq, sq, rq = panoptic_quality(table)
    if table.pairs:
        ious = [iou for _, _, iou in table.pairs]
        dices = [2.0 * iou / (1.0 + iou) for iou in ious]
        mean_iou = sum(ious) / len(ious)
        mean_dice = sum(dices) / len(dices)
    else:
        mean_iou = mean_dice = 0.0
    per_instance = tuple(
        (gi, pi, iou, 2.0 * iou / (1.0 + iou)) for gi, pi, iou in table.pairs
    )
    return MetricsReport(
        mean_iou=mean_iou,
        dice=mean_dice,
        pq=pq,
        sq=sq,
        rq=rq,
        fg_dice=_foreground_dice(gt.labels, pred.instance_map),
        n_gt=gt.max_id,
        n_pred=pred.n_instances,
        per_instance=per_instance,
    )


def aggregate(reports: list[MetricsReport]) -> MetricsReport:
    """Unweighted mean of per-image metrics."""
    if not reports:
        return MetricsReport(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0, 0)

    def mean(attr: str) -> float:
        return sum(getattr(r, attr) for r in reports) / len(reports)

    return MetricsReport(
        mean_iou=mean("mean_iou"),
        dice=mean("dice"),
        pq=mean("pq"),
        sq=mean("sq"),
        rq=mean("rq"),
        fg_dice=mean("fg_dice"),
        n_gt=sum(r.n_gt for r in reports),
        n_pred=sum(r.n_pred for r in reports),
    )


def write_metrics_csv(rows: list[tuple[str, MetricsReport]], path: str | Path) -> None:
    """One row per image plus a final unweighted 'mean' row."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for name, rep in rows:
            writer.writerow(_format_row(name, rep))
        writer.writerow(_format_row("mean", aggregate([rep for _, rep in rows])))
    tmp.replace(path)


def _format_row(name: str, r: MetricsReport) -> list[str]:
    return [
        name,
        str(r.n_gt),
        str(r.n_pred),
        f"{r.mean_iou:.6f}",
        f"{r.dice:.6f}",
        f"{r.pq:.6f}",
        f"{r.sq:.6f}",
        f"{r.rq:.6f}",
        f"{r.fg_dice:.6f}",
    ]
