"""Multi-label loss, SGD with momentum and per-module learning rates,
the training loop, and binary checkpointing.

The loss is the per-label mean of sigmoid cross-entropies, computed in
softplus form so it stays finite for logits up to 1e4 in magnitude. The
GCN (and the word-embedding matrix when fine-tuned) trains at its own
learning rate; fusion and backbone weights share the main rate. Both
rates decay by a fixed factor on a fixed epoch schedule.

Checkpoints are a one-line JSON header naming tensors and shapes,
followed by each tensor's raw little-endian float64 payload in header
order, so reloads reproduce forward outputs bit-identically.
"""

import json
from dataclasses import dataclass, field, fields

import numpy as np

from .backbone import ToyMlp
from .data import LabeledSample, LabelVocabulary, UncertainPolicy, label_matrix
from .embeddings import LabelEmbeddingMatrix
from .errors import InputError, NumericalError, ShapeError
from .fusion import FusionParameters
from .gcn import GcnLayer, GcnStack
from .graph import CorrelationGraph
from .jsonio import dumps_json
from .metrics import mean_val_auc, sigmoid
from .model import Network

CHECKPOINT_FORMAT = "labelbridge-checkpoint"
CHECKPOINT_VERSION = 1


def softplus(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def multilabel_loss(logits, labels):
    """Mean sigmoid cross-entropy over labels; returns (loss, dLoss/dO).

    loss = -(1/C) sum_j [ L_j log s(O_j) + (1 - L_j) log(1 - s(O_j)) ]
    with gradient (s(O_j) - L_j) / C.
    """
    o = np.asarray(logits, dtype=np.float64)
    l = np.asarray(labels, dtype=np.float64)
    if o.shape != l.shape:
        raise ShapeError(f"logits {o.shape} and labels {l.shape} differ")
    c = o.shape[-1]
    loss = (l * softplus(-o) + (1.0 - l) * softplus(o)).sum(axis=-1) / c
    grad = (sigmoid(o) - l) / c
    return float(loss) if loss.ndim == 0 else loss, grad


def multilabel_loss_batch(logits: np.ndarray, labels: np.ndarray):
    """Batch mean of multilabel_loss; gradient is scaled by 1/B."""
    per_sample, grad = multilabel_loss(logits, labels)
    b = logits.shape[0]
    return float(np.mean(per_sample)), grad / b


@dataclass
class OptimizerState:
    momentum_buffers: dict[str, np.ndarray]
    groups: dict[str, str]              # parameter name -> "lce" | "main"
    momentum: float = 0.9
    weight_decay: float = 5e-5
    lr_lce: float = 0.01
    lr_main: float = 0.001
    decay_factor: float = 0.1
    decay_every: int = 10

    def lr(self, epoch: int, group: str) -> float:
        base = self.lr_lce if group == "lce" else self.lr_main
        return base * self.decay_factor ** (epoch // self.decay_every)


def make_optimizer(network: Network, config: "TrainConfig") -> OptimizerState:
    params = network.parameters()
    return OptimizerState(
        momentum_buffers={name: np.zeros_like(arr) for name, arr in params.items()},
        groups={name: Network.lr_group(name) for name in params},
        momentum=config.momentum, weight_decay=config.weight_decay,
        lr_lce=config.lr_lce, lr_main=config.lr_main,
        decay_factor=config.decay_factor, decay_every=config.decay_every)


def sgd_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
             state: OptimizerState, epoch: int) -> None:
    """In-place update: buf = m*buf + (grad + wd*param); param -= lr*buf."""
    for name, param in params.items():
        grad = grads[name]
        if grad.shape != param.shape:
            raise ShapeError(f"gradient shape {grad.shape} does not match "
                             f"parameter {name} shape {param.shape}")
        buf = state.momentum_buffers[name]
        g = grad + state.weight_decay * param
        buf *= state.momentum
        buf += g
        param -= state.lr(epoch, state.groups[name]) * buf


_PROVIDERS = ("precomputed", "synthetic", "toy_mlp")
_FORMATS = ("pipe", "columnar")


@dataclass
class TrainConfig:
    """Every knob of the pipeline, with its documented default."""

    epsilon: float = 0.3
    delta: float = 0.2
    groups: int = 64
    group_size: int = 6
    d3: int = 384
    gcn_dims: list[int] = field(default_factory=lambda: [300, 1024, 768])
    d1: int = 768
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0
    lr_lce: float = 0.01
    lr_main: float = 0.001
    momentum: float = 0.9
    weight_decay: float = 5e-5
    decay_every: int = 10
    decay_factor: float = 0.1
    uncertain_policy: str = "as_positive"
    provider: str = "precomputed"
    dataset_format: str = "pipe"
    pipe_has_header: bool = False
    no_finding_token: str = "No Finding"
    ratios: list[float] = field(default_factory=lambda: [0.7, 0.1, 0.2])
    reweight_axis: str = "row"
    graph_include_val: bool = False
    gcn_final_linear: bool = False
    fine_tune_embeddings: bool = False
    leaky_alpha: float = 0.2
    toy_hidden: int = 64
    labels: list[str] | None = None
    labels_path: str | None = None
    features_path: str | None = None
    embeddings_path: str | None = None
    synth: dict | None = None

    _KEY_MAP = {"G": "groups", "g": "group_size"}

    @classmethod
    def from_dict(cls, raw: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in raw.items():
            name = cls._KEY_MAP.get(key, key)
            if name not in known:
                raise InputError(f"unknown config key {key!r}")
            kwargs[name] = value
        config = cls(**kwargs)
        config.validate()
        return config

    def to_dict(self) -> dict:
        out = {}
        inverse = {v: k for k, v in self._KEY_MAP.items()}
        for f in fields(self):
            out[inverse.get(f.name, f.name)] = getattr(self, f.name)
        return out

    def validate(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise InputError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if not 0.0 <= self.delta < 1.0:
            raise InputError(f"delta must be in [0, 1), got {self.delta}")
        for name in ("groups", "group_size", "d3", "d1", "epochs", "batch_size",
                     "decay_every", "toy_hidden"):
            if int(getattr(self, name)) < 1:
                raise InputError(f"{name} must be >= 1, got {getattr(self, name)}")
        if len(self.gcn_dims) < 2 or any(int(d) < 1 for d in self.gcn_dims):
            raise InputError(f"gcn_dims must chain >= 2 positive dims, got {self.gcn_dims}")
        for name in ("lr_lce", "lr_main"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be > 0")
        if not 0.0 <= self.momentum < 1.0:
            raise InputError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise InputError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if not 0.0 < self.decay_factor <= 1.0:
            raise InputError(f"decay_factor must be in (0, 1], got {self.decay_factor}")
        if self.leaky_alpha <= 0:
            raise InputError(f"leaky_alpha must be > 0, got {self.leaky_alpha}")
        UncertainPolicy.from_string(self.uncertain_policy)
        if self.provider not in _PROVIDERS:
            raise InputError(f"provider must be one of {_PROVIDERS}, got {self.provider!r}")
        if self.dataset_format not in _FORMATS:
            raise InputError(f"dataset_format must be one of {_FORMATS}, "
                             f"got {self.dataset_format!r}")
        if self.reweight_axis not in ("row", "col"):
            raise InputError(f"reweight_axis must be 'row' or 'col', "
                             f"got {self.reweight_axis!r}")
        if len(self.ratios) != 3 or any(r <= 0 for r in self.ratios):
            raise InputError(f"ratios must be 3 positive numbers, got {self.ratios}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise InputError(f"ratios must sum to 1, got {self.ratios}")


@dataclass
class DataBundle:
    vocab: LabelVocabulary
    train_samples: list[LabeledSample]
    val_samples: list[LabeledSample]
    provider: object  # FeatureProvider-like, supplies raw input vectors


@dataclass
class TrainResult:
    network: Network
    optimizer: OptimizerState
    history: list[dict]
    best_epoch: int
    best_val_auc: float | None
    config: TrainConfig
    vocab: LabelVocabulary
    graph: CorrelationGraph


def build_network(config: TrainConfig, graph: CorrelationGraph,
                  label_embeddings: LabelEmbeddingMatrix,
                  raw_input_dim: int) -> Network:
    """Assemble the network described by a config; init draws are ordered
    GCN -> fusion -> backbone from one seeded generator."""
    w = np.asarray(label_embeddings.W, dtype=np.float64)
    if w.shape[1] != config.gcn_dims[0]:
        raise ShapeError(f"label embeddings have dim {w.shape[1]} but gcn_dims "
                         f"start at {config.gcn_dims[0]}")
    init_seq, _ = np.random.SeedSequence(config.seed).spawn(2)
    init_rng = np.random.Generator(np.random.PCG64(init_seq))
    stack = GcnStack.initialize([int(d) for d in config.gcn_dims], init_rng,
                                alpha=config.leaky_alpha,
                                final_linear=config.gcn_final_linear)
    fusion = FusionParameters.initialize(config.d1, stack.dims[-1], config.d3,
                                         config.groups, config.group_size, init_rng)
    backbone = None
    if config.provider == "toy_mlp":
        backbone = ToyMlp.initialize(raw_input_dim, config.toy_hidden, config.d1,
                                     init_rng, alpha=config.leaky_alpha)
    elif raw_input_dim != config.d1:
        raise ShapeError(f"feature file dim {raw_input_dim} does not match d1={config.d1}")
    return Network(stack, fusion, w, graph.EA_norm, backbone=backbone,
                   fine_tune_embeddings=config.fine_tune_embeddings)


def train(config: TrainConfig, data: DataBundle, graph: CorrelationGraph,
          label_embeddings: LabelEmbeddingMatrix) -> TrainResult:
    """Run the full epoch loop; the result holds the best-validation state.

    Deterministic given the config seed: parameter init and the per-epoch
    shuffles come from independent child streams of that seed.
    """
    if data.vocab.size != graph.EA_norm.shape[0]:
        raise ShapeError(f"vocabulary size {data.vocab.size} does not match "
                         f"graph size {graph.EA_norm.shape[0]}")
    network = build_network(config, graph, label_embeddings, data.provider.dim)
    optimizer = make_optimizer(network, config)
    _, shuffle_seq = np.random.SeedSequence(config.seed).spawn(2)
    shuffle_rng = np.random.Generator(np.random.PCG64(shuffle_seq))

    x_train = data.provider.features_for([s.sample_id for s in data.train_samples])
    y_train = label_matrix(data.train_samples)
    if data.val_samples:
        x_val = data.provider.features_for([s.sample_id for s in data.val_samples])
        y_val = label_matrix(data.val_samples)
    else:
        x_val = y_val = None

    params = network.parameters()
    n = len(x_train)
    history: list[dict] = []
    best: dict = {}

    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        for batch_index, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start: start + config.batch_size]
            logits, cache = network.forward_batch(x_train[idx])
            loss, d_logits = multilabel_loss_batch(logits, y_train[idx])
            if not np.isfinite(loss):
                raise NumericalError(
                    f"non-finite loss at epoch {epoch}, batch {batch_index} "
                    f"(lr_lce={optimizer.lr(epoch, 'lce')}, "
                    f"lr_main={optimizer.lr(epoch, 'main')})")
            grads = network.backward_batch(cache, d_logits)
            sgd_step(params, grads, optimizer, epoch)
            network.note_update()
            epoch_loss += loss * len(idx)
        epoch_loss /= n

        val_auc = None
        if x_val is not None:
            val_auc = mean_val_auc(network.predict_logits(x_val), y_val)
        history.append({"epoch": epoch, "train_loss": epoch_loss,
                        "val_mean_auc": val_auc})

        better = (not best
                  or (val_auc is not None
                      and (best["val_auc"] is None or val_auc > best["val_auc"])))
        if better:
            best = {
                "epoch": epoch,
                "val_auc": val_auc,
                "params": {k: v.copy() for k, v in params.items()},
                "buffers": {k: v.copy() for k, v in optimizer.momentum_buffers.items()},
            }

    # restore the best-validation state into the live network
    for name, arr in params.items():
        arr[...] = best["params"][name]
    for name, arr in optimizer.momentum_buffers.items():
        arr[...] = best["buffers"][name]
    network.note_update()
    return TrainResult(network=network, optimizer=optimizer, history=history,
                       best_epoch=best["epoch"], best_val_auc=best["val_auc"],
                       config=config, vocab=data.vocab, graph=graph)


@dataclass
class Checkpoint:
    labels: list[str]
    config: TrainConfig
    epoch: int
    best_val_auc: float | None
    tensors: dict[str, np.ndarray]
    has_backbone: bool


def _checkpoint_tensor_order(network: Network, optimizer: OptimizerState | None,
                             graph: CorrelationGraph) -> dict[str, np.ndarray]:
    tensors: dict[str, np.ndarray] = {"embeddings.W": network.w}
    tensors["graph.P"] = graph.P
    tensors["graph.A"] = graph.A.astype(np.float64)
    tensors["graph.EA"] = graph.EA
    tensors["graph.EA_norm"] = graph.EA_norm
    for name, arr in network.parameters().items():
        if name not in tensors:
            tensors[name] = arr
    if optimizer is not None:
        for name, arr in optimizer.momentum_buffers.items():
            tensors[f"opt.{name}"] = arr
    return tensors


def save_checkpoint(path, result: TrainResult) -> None:
    tensors = _checkpoint_tensor_order(result.network, result.optimizer, result.graph)
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "labels": result.vocab.labels,
        "config": result.config.to_dict(),
        "epoch": result.best_epoch,
        "best_val_auc": result.best_val_auc,
        "has_backbone": result.network.backbone is not None,
        "tensors": [{"name": k, "shape": list(v.shape)} for k, v in tensors.items()],
    }
    with open(path, "wb") as fh:
        fh.write(dumps_json(header).encode("utf-8"))
        fh.write(b"\n")
        for arr in tensors.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise InputError(f"corrupt checkpoint header in {path}") from None
    if header.get("format") != CHECKPOINT_FORMAT:
        raise InputError(f"{path} is not a checkpoint file")
    if header.get("version") != CHECKPOINT_VERSION:
        raise InputError(f"checkpoint version {header.get('version')} unsupported "
                         f"(expected {CHECKPOINT_VERSION})")
    tensors: dict[str, np.ndarray] = {}
    offset = 0
    for entry in header["tensors"]:
        shape = tuple(int(s) for s in entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        nbytes = size * 8
        if offset + nbytes > len(payload):
            raise InputError(f"truncated checkpoint payload in {path}")
        tensors[entry["name"]] = np.frombuffer(
            payload[offset: offset + nbytes], dtype="<f8").reshape(shape).copy()
        offset += nbytes
    if offset != len(payload):
        raise InputError(f"checkpoint payload length mismatch in {path}")
    config = TrainConfig.from_dict(header["config"])
    return Checkpoint(labels=header["labels"], config=config, epoch=header["epoch"],
                      best_val_auc=header["best_val_auc"], tensors=tensors,
                      has_backbone=header["has_backbone"])


def network_from_checkpoint(ckpt: Checkpoint) -> Network:
    """Rebuild a forward-ready network from checkpoint tensors."""
    config = ckpt.config
    theta_names = sorted((n for n in ckpt.tensors if n.startswith("gcn.theta")),
                         key=lambda n: int(n[len("gcn.theta"):]))
    if not theta_names:
        raise InputError("checkpoint has no GCN layers")
    layers = [GcnLayer(ckpt.tensors[n], alpha=config.leaky_alpha) for n in theta_names]
    stack = GcnStack(layers, final_linear=config.gcn_final_linear)
    t = ckpt.tensors
    fusion = FusionParameters(
        fc1_w=t["fusion.fc1_w"], fc1_b=t["fusion.fc1_b"],
        fc2_w=t["fusion.fc2_w"], fc2_b=t["fusion.fc2_b"],
        u_tilde=t["fusion.u_tilde"], v_tilde=t["fusion.v_tilde"],
        fc3_w=t["fusion.fc3_w"], fc3_b=t["fusion.fc3_b"],
        groups=config.groups, group_size=config.group_size)
    backbone = None
    if ckpt.has_backbone:
        backbone = ToyMlp(t["backbone.w1"], t["backbone.b1"],
                          t["backbone.w2"], t["backbone.b2"],
                          alpha=config.leaky_alpha)
    network = Network(stack, fusion, t["embeddings.W"], t["graph.EA_norm"],
                      backbone=backbone,
                      fine_tune_embeddings=config.fine_tune_embeddings)
    if network.num_labels != len(ckpt.labels):
        raise ShapeError(f"checkpoint tensors cover {network.num_labels} labels but "
                         f"the header names {len(ckpt.labels)}")
    return network
