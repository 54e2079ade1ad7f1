"""Low-rank bilinear bridging of image features with label embeddings.

One bridging projects the image feature and one label embedding to a
shared D3 space, Hadamard-multiplies their low-rank expansions into a
G*g-wide vector, sums it in G consecutive groups of g, and maps the
G-vector to a scalar logit. The same parameters serve all C bridgings.

The group-summed form is algebraically the bilinear form m1' S_k m2 with
S_k the sum of outer products u_t v_t' over group k's columns; the test
suite checks that equivalence by brute force.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, StaleCacheError


class FusionParameters:
    """Shared projection and low-rank weights for all bridgings."""

    def __init__(self, fc1_w, fc1_b, fc2_w, fc2_b, u_tilde, v_tilde, fc3_w, fc3_b,
                 groups: int, group_size: int):
        self.fc1_w = fc1_w
        self.fc1_b = fc1_b
        self.fc2_w = fc2_w
        self.fc2_b = fc2_b
        self.u_tilde = u_tilde
        self.v_tilde = v_tilde
        self.fc3_w = fc3_w
        self.fc3_b = fc3_b
        self.groups = groups
        self.group_size = group_size
        self.version = 0
        self._check_shapes()

    def _check_shapes(self) -> None:
        d3 = self.fc1_w.shape[1]
        width = self.groups * self.group_size
        if self.fc2_w.shape[1] != d3:
            raise ShapeError("fc1 and fc2 output dims differ")
        if self.fc1_b.shape != (d3,) or self.fc2_b.shape != (d3,):
            raise ShapeError("projection bias shapes do not match D3")
        if self.u_tilde.shape != (d3, width) or self.v_tilde.shape != (d3, width):
            raise ShapeError(f"low-rank matrices must be ({d3}, {width})")
        if self.fc3_w.shape != (self.groups,):
            raise ShapeError(f"output head expects {self.groups} group sums")

    @classmethod
    def initialize(cls, d1: int, d2_prime: int, d3: int, groups: int, group_size: int,
                   seed_rng: np.random.Generator) -> "FusionParameters":
        """Variance-preserving uniform init (bound sqrt(3/fan_in), std
        1/sqrt(fan_in)) with zero biases; keeps the Hadamard path's scale
        healthy so label differentiation survives to the logits."""
        if min(d1, d2_prime, d3, groups, group_size) < 1:
            raise ShapeError("all fusion dimensions must be >= 1")
        width = groups * group_size

        def uniform(fan_in, shape):
            bound = np.sqrt(3.0 / fan_in)
            return seed_rng.uniform(-bound, bound, size=shape)

        return cls(
            fc1_w=uniform(d1, (d1, d3)), fc1_b=np.zeros(d3),
            fc2_w=uniform(d2_prime, (d2_prime, d3)), fc2_b=np.zeros(d3),
            u_tilde=uniform(d3, (d3, width)), v_tilde=uniform(d3, (d3, width)),
            fc3_w=uniform(groups, (groups,)), fc3_b=np.zeros(1),
            groups=groups, group_size=group_size)

    @property
    def d1(self) -> int:
        return self.fc1_w.shape[0]

    @property
    def d2_prime(self) -> int:
        return self.fc2_w.shape[0]

    @property
    def d3(self) -> int:
        return self.fc1_w.shape[1]

    def note_update(self) -> None:
        self.version += 1

    def parameters(self) -> dict[str, np.ndarray]:
        return {
            "fusion.fc1_w": self.fc1_w, "fusion.fc1_b": self.fc1_b,
            "fusion.fc2_w": self.fc2_w, "fusion.fc2_b": self.fc2_b,
            "fusion.u_tilde": self.u_tilde, "fusion.v_tilde": self.v_tilde,
            "fusion.fc3_w": self.fc3_w, "fusion.fc3_b": self.fc3_b,
        }


def group_sum(vec: np.ndarray, groups: int, group_size: int) -> np.ndarray:
    """Sum a G*g vector in G consecutive groups of g elements."""
    vec = np.asarray(vec, dtype=np.float64)
    if vec.shape[-1] != groups * group_size:
        raise ShapeError(f"vector of length {vec.shape[-1]} cannot form "
                         f"{groups} groups of {group_size}")
    return vec.reshape(vec.shape[:-1] + (groups, group_size)).sum(axis=-1)


@dataclass
class FusionCache:
    params: FusionParameters
    version: int
    feats: np.ndarray     # B x D1
    lo: np.ndarray        # C x D2'
    m1: np.ndarray        # B x D3
    m2: np.ndarray        # C x D3
    ua: np.ndarray        # B x (G*g)
    vb: np.ndarray        # C x (G*g)
    to: np.ndarray        # B x C x G


def fusion_forward_batch(params: FusionParameters, feats: np.ndarray, lo: np.ndarray):
    """Bridge each of B image features with all C label embeddings.

    Returns (logits B x C, cache).
    """
    feats = np.asarray(feats, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != params.d1:
        raise ShapeError(f"features are {feats.shape}, expected (B, {params.d1})")
    if lo.ndim != 2 or lo.shape[1] != params.d2_prime:
        raise ShapeError(f"label embeddings are {lo.shape}, expected (C, {params.d2_prime})")
    m1 = feats @ params.fc1_w + params.fc1_b
    m2 = lo @ params.fc2_w + params.fc2_b
    ua = m1 @ params.u_tilde
    vb = m2 @ params.v_tilde
    had = ua[:, None, :] * vb[None, :, :]
    to = group_sum(had, params.groups, params.group_size)
    logits = to @ params.fc3_w + params.fc3_b[0]
    cache = FusionCache(params=params, version=params.version, feats=feats, lo=lo,
                        m1=m1, m2=m2, ua=ua, vb=vb, to=to)
    return logits, cache


def fusion_backward_batch(cache: FusionCache, upstream: np.ndarray):
    """Gradients for all fusion parameters plus the two inputs.

    Returns (grads dict, dFeats B x D1, dLO C x D2'). Gradients from all
    bridgings accumulate into the shared parameters in fixed order.
    """
    params = cache.params
    if cache.version != params.version:
        raise StaleCacheError("fusion parameters changed since this cache's forward pass")
    d_o = np.asarray(upstream, dtype=np.float64)
    b, c = cache.to.shape[0], cache.to.shape[1]
    if d_o.shape != (b, c):
        raise ShapeError(f"upstream gradient is {d_o.shape}, expected ({b}, {c})")
    g = params.group_size
    d_fc3_b = np.array([d_o.sum()])
    d_fc3_w = np.einsum("bc,bcg->g", d_o, cache.to)
    d_to = d_o[:, :, None] * params.fc3_w[None, None, :]
    d_had = np.repeat(d_to, g, axis=2)
    d_ua = np.einsum("bcx,cx->bx", d_had, cache.vb)
    d_vb = np.einsum("bcx,bx->cx", d_had, cache.ua)
    d_u = cache.m1.T @ d_ua
    d_v = cache.m2.T @ d_vb
    d_m1 = d_ua @ params.u_tilde.T
    d_m2 = d_vb @ params.v_tilde.T
    grads = {
        "fusion.fc1_w": cache.feats.T @ d_m1, "fusion.fc1_b": d_m1.sum(axis=0),
        "fusion.fc2_w": cache.lo.T @ d_m2, "fusion.fc2_b": d_m2.sum(axis=0),
        "fusion.u_tilde": d_u, "fusion.v_tilde": d_v,
        "fusion.fc3_w": d_fc3_w, "fusion.fc3_b": d_fc3_b,
    }
    d_feats = d_m1 @ params.fc1_w.T
    d_lo = d_m2 @ params.fc2_w.T
    return grads, d_feats, d_lo


def bridge_all(params: FusionParameters, feat: np.ndarray, lo: np.ndarray):
    """Logit vector for one image feature against all C label embeddings."""
    feat = np.asarray(feat, dtype=np.float64)
    if feat.ndim != 1:
        raise ShapeError(f"bridge_all expects a feature vector, got shape {feat.shape}")
    logits, cache = fusion_forward_batch(params, feat[None, :], lo)
    return logits[0], cache


def bridge_one(params: FusionParameters, feat: np.ndarray, lo_j: np.ndarray):
    """Scalar logit for one image feature and one label embedding."""
    lo_j = np.asarray(lo_j, dtype=np.float64)
    if lo_j.ndim != 1:
        raise ShapeError(f"bridge_one expects one embedding row, got shape {lo_j.shape}")
    logits, cache = bridge_all(params, feat, lo_j[None, :])
    return logits[0], cache


def fusion_backward(cache: FusionCache, upstream: np.ndarray):
    """Backward for a bridge_all cache; upstream has one entry per label.

    Returns (grads dict, dFeat D1, dLO C x D2').
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.ndim != 1:
        raise ShapeError(f"expected a per-label gradient vector, got {upstream.shape}")
    grads, d_feats, d_lo = fusion_backward_batch(cache, upstream[None, :])
    return grads, d_feats[0], d_lo
