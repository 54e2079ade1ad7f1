"""The full network: optional MLP backbone -> GCN label embeddings ->
bilinear fusion logits, with a single named-parameter view for the
optimizer and checkpointing.

Parameter groups follow the two learning-rate regimes: GCN weights (and
the word-embedding matrix when fine-tuned) form the "lce" group; fusion
and backbone weights form the "main" group.
"""

import numpy as np

from .backbone import ToyMlp
from .errors import ShapeError
from .fusion import FusionParameters, fusion_backward_batch, fusion_forward_batch
from .gcn import GcnStack, gcn_backward, gcn_forward


class Network:
    def __init__(self, stack: GcnStack, fusion: FusionParameters, w: np.ndarray,
                 ea_norm: np.ndarray, backbone: ToyMlp | None = None,
                 fine_tune_embeddings: bool = False):
        w = np.asarray(w, dtype=np.float64)
        ea_norm = np.asarray(ea_norm, dtype=np.float64)
        if w.shape[0] != ea_norm.shape[0]:
            raise ShapeError(f"W has {w.shape[0]} rows but the graph has "
                             f"{ea_norm.shape[0]} nodes")
        if stack.dims[-1] != fusion.d2_prime:
            raise ShapeError(f"GCN output dim {stack.dims[-1]} does not match "
                             f"fusion label-embedding dim {fusion.d2_prime}")
        if backbone is not None and backbone.d_out != fusion.d1:
            raise ShapeError(f"backbone output dim {backbone.d_out} does not match "
                             f"fusion feature dim {fusion.d1}")
        self.stack = stack
        self.fusion = fusion
        self.w = w
        self.ea_norm = ea_norm
        self.backbone = backbone
        self.fine_tune_embeddings = fine_tune_embeddings

    @property
    def num_labels(self) -> int:
        return self.w.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.backbone.d_in if self.backbone is not None else self.fusion.d1

    def parameters(self) -> dict[str, np.ndarray]:
        """Trainable tensors in fixed order; this order is the contract for
        optimizer state and checkpoint payloads."""
        params: dict[str, np.ndarray] = {}
        if self.fine_tune_embeddings:
            params["embeddings.W"] = self.w
        params.update(self.stack.parameters())
        params.update(self.fusion.parameters())
        if self.backbone is not None:
            params.update(self.backbone.parameters())
        return params

    @staticmethod
    def lr_group(name: str) -> str:
        return "lce" if name.startswith(("gcn.", "embeddings.")) else "main"

    def note_update(self) -> None:
        self.stack.note_update()
        self.fusion.note_update()
        if self.backbone is not None:
            self.backbone.note_update()

    def forward_batch(self, x_raw: np.ndarray):
        """Logits for a batch of raw inputs; returns (B x C logits, cache)."""
        x_raw = np.asarray(x_raw, dtype=np.float64)
        if self.backbone is not None:
            feats, bb_cache = self.backbone.forward_batch(x_raw)
        else:
            feats, bb_cache = x_raw, None
        lo, gcn_cache = gcn_forward(self.stack, self.w, self.ea_norm)
        logits, fusion_cache = fusion_forward_batch(self.fusion, feats, lo)
        return logits, {"backbone": bb_cache, "gcn": gcn_cache, "fusion": fusion_cache}

    def backward_batch(self, cache: dict, d_logits: np.ndarray) -> dict[str, np.ndarray]:
        """Gradients for every trainable parameter, keyed like parameters()."""
        grads, d_feats, d_lo = fusion_backward_batch(cache["fusion"], d_logits)
        theta_grads, d_w = gcn_backward(cache["gcn"], d_lo)
        for i, g in enumerate(theta_grads):
            grads[f"gcn.theta{i}"] = g
        if self.backbone is not None:
            bb_grads, _ = self.backbone.backward_batch(cache["backbone"], d_feats)
            grads.update(bb_grads)
        if self.fine_tune_embeddings:
            grads["embeddings.W"] = d_w
        return {name: grads[name] for name in self.parameters()}

    def predict_logits(self, x_raw: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """Forward-only logits, evaluated in chunks."""
        x_raw = np.asarray(x_raw, dtype=np.float64)
        outs = []
        for start in range(0, len(x_raw), batch_size):
            logits, _ = self.forward_batch(x_raw[start: start + batch_size])
            outs.append(logits)
        return np.concatenate(outs, axis=0)
