"""Evaluation metrics: per-label AUC, ROC curves, and overall P/R/F1.

AUC is the Mann-Whitney statistic (probability that a random positive
outranks a random negative, ties counted 1/2) and is undefined when a
split contains only one class; undefined labels are excluded from the
mean and flagged. Thresholding is strict: a label is predicted positive
when its confidence exceeds 0.5, i.e. its logit exceeds 0.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError


def sigmoid(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def auc_score(scores, labels):
    """Mann-Whitney AUC, or None when only one class is present."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 1 or scores.shape != labels.shape:
        raise InputError(f"scores {scores.shape} and labels {labels.shape} must be "
                         f"equal-length vectors")
    if len(scores) < 1:
        raise InputError("auc_score needs at least one sample")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _average_ranks(scores)
    rank_sum = ranks[pos].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties averaged."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i: j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass
class PrfResult:
    op: float
    or_: float
    of1: float
    n_correct: int
    n_pred: int
    n_gold: int
    flags: list[str]


def overall_prf(predictions: np.ndarray, truths: np.ndarray) -> PrfResult:
    """Micro-averaged precision/recall/F1 over all labels.

    Inputs are binary N x C matrices; predictions must already be
    thresholded. Zero denominators report the component as 0 with a flag.
    """
    predictions = np.asarray(predictions)
    truths = np.asarray(truths)
    if predictions.shape != truths.shape or predictions.ndim != 2:
        raise InputError(f"prediction matrix {predictions.shape} and truth matrix "
                         f"{truths.shape} must be equal N x C shapes")
    n_correct = int(np.sum((predictions == 1) & (truths == 1)))
    n_pred = int(np.sum(predictions == 1))
    n_gold = int(np.sum(truths == 1))
    flags = []
    if n_pred > 0:
        op = n_correct / n_pred
    else:
        op, flags = 0.0, flags + ["no_predicted_positives"]
    if n_gold > 0:
        or_ = n_correct / n_gold
    else:
        or_, flags = 0.0, flags + ["no_true_positives"]
    of1 = 2 * op * or_ / (op + or_) if op + or_ > 0 else 0.0
    return PrfResult(op=op, or_=or_, of1=of1, n_correct=n_correct,
                     n_pred=n_pred, n_gold=n_gold, flags=flags)


def roc_curve(scores, labels):
    """(threshold, fpr, tpr) triples at every distinct score, descending.

    The curve starts at (inf, 0, 0) and ends at (min score, 1, 1); a
    sample counts as predicted positive when score >= threshold.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InputError("ROC curve needs both classes present")
    order = np.argsort(-scores, kind="mergesort")
    points = [(float("inf"), 0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(order):
        j = i
        value = scores[order[i]]
        while j + 1 < len(order) and scores[order[j + 1]] == value:
            j += 1
        block = order[i: j + 1]
        tp += int(pos[block].sum())
        fp += len(block) - int(pos[block].sum())
        points.append((float(value), fp / n_neg, tp / n_pos))
        i = j + 1
    return points


def roc_points(scores, labels):
    """(fpr, tpr) pairs of the ROC curve; see roc_curve."""
    return [(fpr, tpr) for _, fpr, tpr in roc_curve(scores, labels)]


def trapezoid_area(points) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def top_k_table(logits: np.ndarray, vocab_labels: list[str], k: int):
    """Per sample, the k highest-confidence labels with sigmoid scores.

    Ties break toward the lower label index.
    """
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    if k > logits.shape[1]:
        raise InputError(f"k={k} exceeds the number of labels {logits.shape[1]}")
    scores = sigmoid(logits)
    tables = []
    for row in scores:
        order = np.argsort(-row, kind="mergesort")[:k]
        tables.append([(vocab_labels[j], float(row[j])) for j in order])
    return tables


@dataclass
class EvaluationReport:
    per_label_auc: list          # float or None per label
    mean_auc: float | None
    op: float
    or_: float
    of1: float
    confusion_totals: dict
    undefined_labels: list[str]
    prf_flags: list[str]
    roc: dict                    # label -> list of (threshold, fpr, tpr)


def build_report(logits: np.ndarray, truths: np.ndarray,
                 vocab_labels: list[str]) -> EvaluationReport:
    """Full evaluation of logit scores against binary truths."""
    logits = np.asarray(logits, dtype=np.float64)
    truths = np.asarray(truths)
    if logits.shape != truths.shape:
        raise InputError(f"logits {logits.shape} and truths {truths.shape} differ")
    per_label = []
    undefined = []
    roc = {}
    for j, label in enumerate(vocab_labels):
        auc = auc_score(logits[:, j], truths[:, j])
        per_label.append(auc)
        if auc is None:
            undefined.append(label)
        else:
            roc[label] = roc_curve(logits[:, j], truths[:, j])
    defined = [a for a in per_label if a is not None]
    mean_auc = float(np.mean(defined)) if defined else None
    prf = overall_prf((logits > 0).astype(np.int64), truths)
    return EvaluationReport(
        per_label_auc=per_label, mean_auc=mean_auc,
        op=prf.op, or_=prf.or_, of1=prf.of1,
        confusion_totals={"n_correct": prf.n_correct, "n_pred": prf.n_pred,
                          "n_gold": prf.n_gold},
        undefined_labels=undefined, prf_flags=prf.flags, roc=roc)


def mean_val_auc(logits: np.ndarray, truths: np.ndarray):
    """Mean of the defined per-label AUCs, or None if none are defined."""
    defined = []
    for j in range(truths.shape[1]):
        auc = auc_score(logits[:, j], truths[:, j])
        if auc is not None:
            defined.append(auc)
    return float(np.mean(defined)) if defined else None
