"""Pluggable image-feature providers and a planted-structure generator.

Real backbones are out of scope; features come from a file of precomputed
vectors, from the synthetic generator below, or through a small trainable
MLP for end-to-end gradient flow.

The synthetic generator plants a known dependency structure: labels are
drawn from per-label base rates, then each dependency edge (i -> j,
strength) forces label j on with the given probability whenever label i
is on. Features are the sum of fixed random unit signature vectors of the
active labels plus Gaussian noise, so the label graph and the classifier
have recoverable ground truth.
"""

from dataclasses import dataclass, field

import numpy as np

from .data import FeatureRecord, LabeledSample
from .errors import InputError, ShapeError, StaleCacheError
from .gcn import leaky_relu, leaky_relu_grad


@dataclass
class SyntheticSpec:
    num_labels: int
    feature_dim: int
    n_samples: int
    dependency_edges: list[tuple[int, int, float]] = field(default_factory=list)
    base_rates: list[float] | None = None
    noise_sigma: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.num_labels < 2:
            raise InputError(f"synthetic spec needs >= 2 labels, got {self.num_labels}")
        if self.feature_dim < 1 or self.n_samples < 1:
            raise InputError("synthetic spec needs feature_dim >= 1 and n_samples >= 1")
        if self.noise_sigma < 0:
            raise InputError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        rates = self.rates()
        if len(rates) != self.num_labels:
            raise InputError(f"expected {self.num_labels} base rates, got {len(rates)}")
        for r in rates:
            if not 0.0 <= r <= 1.0:
                raise InputError(f"base rate {r} out of [0, 1]")
        for i, j, strength in self.dependency_edges:
            if not (0 <= i < self.num_labels and 0 <= j < self.num_labels) or i == j:
                raise InputError(f"bad dependency edge ({i} -> {j})")
            if not 0.0 <= strength <= 1.0:
                raise InputError(f"edge strength {strength} out of [0, 1]")

    def rates(self) -> list[float]:
        if self.base_rates is None:
            return [0.3] * self.num_labels
        return [float(r) for r in self.base_rates]


def generate_synthetic_dataset(spec: SyntheticSpec):
    """Returns (samples, feature records) drawn deterministically from the spec.

    Per sample: base Bernoulli draws, then one pass over the edges in listed
    order (so chains propagate in that order), then signature sum plus noise.
    """
    spec.validate()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    signatures = rng.standard_normal((spec.num_labels, spec.feature_dim))
    signatures /= np.linalg.norm(signatures, axis=1, keepdims=True)
    rates = np.array(spec.rates())
    samples: list[LabeledSample] = []
    records: list[FeatureRecord] = []
    for idx in range(spec.n_samples):
        labels = (rng.random(spec.num_labels) < rates).astype(np.int64)
        for i, j, strength in spec.dependency_edges:
            if labels[i] == 1 and labels[j] == 0 and rng.random() < strength:
                labels[j] = 1
        feat = signatures.T @ labels.astype(np.float64)
        feat = feat + spec.noise_sigma * rng.standard_normal(spec.feature_dim)
        sample_id = f"s{idx:05d}"
        samples.append(LabeledSample(sample_id, labels))
        records.append(FeatureRecord(sample_id, feat))
    return samples, records


class FeatureProvider:
    """Lookup of per-sample feature vectors; kind records provenance."""

    def __init__(self, records: list[FeatureRecord], kind: str = "precomputed"):
        if not records:
            raise InputError("feature provider needs at least one record")
        dim = len(records[0].features)
        table: dict[str, np.ndarray] = {}
        for r in records:
            if len(r.features) != dim:
                raise InputError(f"inconsistent feature dim for {r.sample_id!r}")
            if r.sample_id in table:
                raise InputError(f"duplicate sample id {r.sample_id!r} in features")
            table[r.sample_id] = np.asarray(r.features, dtype=np.float64)
        self.kind = kind
        self.dim = dim
        self._table = table

    def get_features(self, sample_id: str) -> np.ndarray:
        try:
            return self._table[sample_id]
        except KeyError:
            raise InputError(f"unknown sample id {sample_id!r}") from None

    def features_for(self, sample_ids: list[str]) -> np.ndarray:
        return np.stack([self.get_features(sid) for sid in sample_ids])


class ToyMlp:
    """One-hidden-layer MLP backbone: input -> LeakyReLU hidden -> linear out."""

    def __init__(self, w1, b1, w2, b2, alpha: float = 0.2):
        if w1.shape[1] != len(b1) or w2.shape[0] != w1.shape[1] or w2.shape[1] != len(b2):
            raise ShapeError("toy MLP parameter shapes do not chain")
        self.w1, self.b1, self.w2, self.b2 = w1, b1, w2, b2
        self.alpha = alpha
        self.version = 0

    @classmethod
    def initialize(cls, d_in: int, d_hidden: int, d_out: int,
                   seed_rng: np.random.Generator, alpha: float = 0.2) -> "ToyMlp":
        """Gain-corrected uniform weights (see GcnStack.initialize), zero biases."""
        def uniform(fan_in, shape, gain):
            bound = np.sqrt(3.0 * gain / fan_in)
            return seed_rng.uniform(-bound, bound, size=shape)

        hidden_gain = 2.0 / (1.0 + alpha * alpha)
        return cls(uniform(d_in, (d_in, d_hidden), hidden_gain), np.zeros(d_hidden),
                   uniform(d_hidden, (d_hidden, d_out), 1.0), np.zeros(d_out),
                   alpha=alpha)

    @property
    def d_in(self) -> int:
        return self.w1.shape[0]

    @property
    def d_out(self) -> int:
        return self.w2.shape[1]

    def note_update(self) -> None:
        self.version += 1

    def parameters(self) -> dict[str, np.ndarray]:
        return {"backbone.w1": self.w1, "backbone.b1": self.b1,
                "backbone.w2": self.w2, "backbone.b2": self.b2}

    def forward_batch(self, x: np.ndarray):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.d_in:
            raise ShapeError(f"toy MLP input is {x.shape}, expected (B, {self.d_in})")
        z = x @ self.w1 + self.b1
        h = leaky_relu(z, self.alpha)
        y = h @ self.w2 + self.b2
        return y, {"x": x, "z": z, "h": h, "version": self.version}

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, _ = self.forward_batch(np.asarray(x, dtype=np.float64)[None, :])
        return y[0]

    def backward_batch(self, cache: dict, upstream: np.ndarray):
        if cache["version"] != self.version:
            raise StaleCacheError("toy MLP parameters changed since the forward pass")
        dy = np.asarray(upstream, dtype=np.float64)
        if dy.shape != (cache["x"].shape[0], self.d_out):
            raise ShapeError(f"upstream gradient is {dy.shape}, "
                             f"expected ({cache['x'].shape[0]}, {self.d_out})")
        dh = dy @ self.w2.T
        dz = dh * leaky_relu_grad(cache["z"], self.alpha)
        grads = {"backbone.w1": cache["x"].T @ dz, "backbone.b1": dz.sum(axis=0),
                 "backbone.w2": cache["h"].T @ dy, "backbone.b2": dy.sum(axis=0)}
        dx = dz @ self.w1.T
        return grads, dx
