"""Label co-occurrence statistics and the correlation-graph pipeline.

From a list of labeled samples we count single and pairwise label
occurrences, then derive:

* ``P``: conditional probabilities, P[i, j] = P(label i | label j),
* ``A``: binarized adjacency, keeping only P[i, j] > epsilon,
* ``EA``: reweighted adjacency with diagonal 1 - delta and total mass
  delta spread uniformly over each node's retained neighbors,
* ``EA_norm``: row-stochastic normalization of EA, the propagation
  matrix consumed by the GCN.

The reweighting denominator runs over the ROW's retained off-diagonal
entries by default, which makes every connected row sum to exactly 1;
a column variant is available for comparison.
"""

from dataclasses import dataclass

import numpy as np

from .data import LabeledSample, label_matrix
from .errors import InputError
from .jsonio import dump_json


@dataclass
class CooccurrenceStats:
    """Single counts T (length C) and symmetric pair counts T_pair (C x C)."""

    single_counts: np.ndarray
    pair_counts: np.ndarray

    @property
    def num_labels(self) -> int:
        return len(self.single_counts)


@dataclass
class CorrelationGraph:
    P: np.ndarray
    A: np.ndarray
    EA: np.ndarray
    EA_norm: np.ndarray
    epsilon: float
    delta: float


def count_cooccurrence(samples: list[LabeledSample], num_labels: int) -> CooccurrenceStats:
    """Count T_j and T_ij over the samples; the pair diagonal equals T."""
    if not samples:
        raise InputError("cannot count co-occurrence over an empty sample list")
    mat = label_matrix(samples)
    if mat.shape[1] != num_labels:
        raise InputError(f"label vectors have length {mat.shape[1]}, expected {num_labels}")
    pair = mat.T @ mat
    return CooccurrenceStats(single_counts=np.diag(pair).copy(), pair_counts=pair)


def conditional_matrix(stats: CooccurrenceStats) -> np.ndarray:
    """P[i, j] = T_ij / T_j, with zero columns where T_j = 0."""
    t = stats.single_counts.astype(np.float64)
    p = np.zeros_like(stats.pair_counts, dtype=np.float64)
    nonzero = t > 0
    p[:, nonzero] = stats.pair_counts[:, nonzero] / t[nonzero]
    return p


def binarize(p: np.ndarray, epsilon: float) -> np.ndarray:
    """Threshold P strictly: keep entry only when P[i, j] > epsilon.

    Diagonal entries with any occurrences (P[i, i] = 1) are kept for every
    epsilon; the reweighting step overrides the diagonal anyway.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise InputError(f"epsilon must be in [0, 1], got {epsilon}")
    a = (p > epsilon).astype(np.int64)
    diag = np.diag(p) > 0
    a[np.diag_indices_from(a)] = diag.astype(np.int64)
    return a


def reweight(a: np.ndarray, delta: float, axis: str = "row") -> np.ndarray:
    """Distribute mass delta over each node's retained neighbors.

    EA[i, i] = 1 - delta; off-diagonal EA[i, j] = delta * A[i, j] / k where
    k is the number of retained off-diagonal entries in row i (axis="row",
    default) or column j (axis="col"); rows/columns with no retained
    neighbors get all-zero off-diagonals.
    """
    if not 0.0 <= delta < 1.0:
        raise InputError(f"delta must be in [0, 1), got {delta}")
    if axis not in ("row", "col"):
        raise InputError(f"reweight axis must be 'row' or 'col', got {axis!r}")
    a = np.asarray(a, dtype=np.float64)
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    if axis == "row":
        denom = off.sum(axis=1, keepdims=True)
    else:
        denom = off.sum(axis=0, keepdims=True)
    ea = np.divide(delta * off, denom, out=np.zeros_like(off), where=denom > 0)
    np.fill_diagonal(ea, 1.0 - delta)
    return ea


def normalize(ea: np.ndarray) -> np.ndarray:
    """Row-stochastic normalization; all-zero rows stay zero."""
    ea = np.asarray(ea, dtype=np.float64)
    if np.any(ea < 0):
        raise InputError("normalize expects a nonnegative matrix")
    sums = ea.sum(axis=1, keepdims=True)
    return np.divide(ea, sums, out=np.zeros_like(ea), where=sums > 0)


def build_correlation_graph(stats: CooccurrenceStats, epsilon: float, delta: float,
                            reweight_axis: str = "row") -> CorrelationGraph:
    p = conditional_matrix(stats)
    a = binarize(p, epsilon)
    ea = reweight(a, delta, axis=reweight_axis)
    return CorrelationGraph(P=p, A=a, EA=ea, EA_norm=normalize(ea),
                            epsilon=float(epsilon), delta=float(delta))


def export_graph_json(path, vocab_labels: list[str], stats: CooccurrenceStats,
                      graph: CorrelationGraph, config_echo: dict) -> None:
    """Write the graph document consumed by downstream tooling."""
    doc = {
        "labels": list(vocab_labels),
        "T": stats.single_counts.tolist(),
        "T_pair": stats.pair_counts.tolist(),
        "P": graph.P,
        "A": graph.A.tolist(),
        "EA": graph.EA,
        "EA_norm": graph.EA_norm,
        "epsilon": float(graph.epsilon),
        "delta": float(graph.delta),
        "config_echo": config_echo,
    }
    dump_json(doc, path)
