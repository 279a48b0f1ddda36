"""Bipartite graph network with hand-written gradients.

One sweep of message passing specialized to the bid-item graph: item
nodes aggregate over their requesting bids, bid nodes aggregate back over
their items, then a scoring head plus softmax yields a probability per
bid of belonging to the optimal allocation.  Every block is a two-affine
layer net with a rectifier in between; the forward pass, the exact
reverse-mode gradients, and the optimizers are plain numpy, with no ML
framework underneath.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import BidItemGraph, build_graph, normalize_features
from .rng import make_rng

MODEL_FORMAT_VERSION = 1


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""


class ModelLoadError(ValueError):
    """Serialized model blob is unusable."""


def _net_specs(q: int) -> list[tuple[str, int, int]]:
    # name, input width, output width; hidden width is always q
    return [
        ("emb_bid", 2, q),
        ("emb_item", 2, q),
        ("emb_edge", 1, q),
        ("g_item", 3 * q, q),
        ("r_item", 2 * q, q),
        ("g_bid", 3 * q, q),
        ("r_bid", 2 * q, q),
        ("score", q, 1),
    ]


@dataclass
class GnnModel:
    """Embedding width plus the weights of all component networks."""

    q: int
    params: dict[str, np.ndarray]

    def copy(self) -> "GnnModel":
        return GnnModel(q=self.q,
                        params={k: v.copy() for k, v in self.params.items()})


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 100
    batch_size: int = 32
    optimizer: str = "adam"  # adam | sgd
    seed: int = 0
    patience: int | None = 20  # early-stop patience on validation loss

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError("optimizer must be 'adam' or 'sgd'")


@dataclass
class TrainResult:
    model: GnnModel
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0


def init_model(q: int, seed: int = 0) -> GnnModel:
    """Symmetric-uniform weights scaled by 1/sqrt(fan_in); zero biases."""
    if q < 1:
        raise ValueError("embedding width must be >= 1")
    rng = make_rng(seed)
    params: dict[str, np.ndarray] = {}
    for name, n_in, n_out in _net_specs(q):
        s1 = 1.0 / math.sqrt(n_in)
        s2 = 1.0 / math.sqrt(q)
        params[f"{name}.W1"] = rng.uniform(-s1, s1, size=(q, n_in))
        params[f"{name}.b1"] = np.zeros(q)
        params[f"{name}.W2"] = rng.uniform(-s2, s2, size=(n_out, q))
        params[f"{name}.b2"] = np.zeros(n_out)
    return GnnModel(q=q, params=params)


def _mlp_forward(params, name, x):
    z = x @ params[f"{name}.W1"].T + params[f"{name}.b1"]
    a = np.maximum(z, 0.0)
    out = a @ params[f"{name}.W2"].T + params[f"{name}.b2"]
    return out, (x, z, a)


def _mlp_backward(params, name, dout, cache, grads):
    x, z, a = cache
    grads[f"{name}.W2"] += dout.T @ a
    grads[f"{name}.b2"] += dout.sum(axis=0)
    da = dout @ params[f"{name}.W2"]
    dz = da * (z > 0)
    grads[f"{name}.W1"] += dz.T @ x
    grads[f"{name}.b1"] += dz.sum(axis=0)
    return dz @ params[f"{name}.W1"]


def _scatter_sum(values: np.ndarray, idx: np.ndarray, rows: int) -> np.ndarray:
    out = np.zeros((rows, values.shape[1]))
    for k in range(values.shape[1]):
        out[:, k] = np.bincount(idx, weights=values[:, k], minlength=rows)
    return out


def _forward_pass(model: GnnModel, graph: BidItemGraph):
    p = model.params
    eb, ei = graph.edge_bid, graph.edge_item
    xb, cache_b = _mlp_forward(p, "emb_bid", graph.bid_features)
    xi, cache_i = _mlp_forward(p, "emb_item", graph.item_features)
    xe, cache_e = _mlp_forward(p, "emb_edge", graph.edge_features)

    gi_in = np.concatenate([xb[eb], xi[ei], xe], axis=1)
    t, cache_gi = _mlp_forward(p, "g_item", gi_in)
    h_item = _scatter_sum(t, ei, graph.num_items)

    ri_in = np.concatenate([xi, h_item], axis=1)
    o_item, cache_ri = _mlp_forward(p, "r_item", ri_in)

    gb_in = np.concatenate([o_item[ei], xb[eb], xe], axis=1)
    s, cache_gb = _mlp_forward(p, "g_bid", gb_in)
    h_bid = _scatter_sum(s, eb, graph.num_bids)

    rb_in = np.concatenate([xb, h_bid], axis=1)
    o_bid, cache_rb = _mlp_forward(p, "r_bid", rb_in)

    logits, cache_s = _mlp_forward(p, "score", o_bid)
    logits = logits.ravel()
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    probs = exp / exp.sum()
    caches = {
        "emb": (cache_b, cache_i, cache_e),
        "g_item": cache_gi, "r_item": cache_ri,
        "g_bid": cache_gb, "r_bid": cache_rb, "score": cache_s,
        "xb": xb, "xi": xi, "xe": xe, "o_item": o_item,
    }
    return probs, caches


def _check_graph(graph: BidItemGraph) -> None:
    if not graph.normalized:
        raise ValueError("graph features must be normalized before a forward pass")
    if graph.num_bids < 1:
        raise ValueError("graph has no bid nodes")


def forward(model: GnnModel, graph: BidItemGraph) -> np.ndarray:
    """Probability per bid node of belonging to the optimal allocation."""
    _check_graph(graph)
    probs, _ = _forward_pass(model, graph)
    return probs


def loss_and_gradients(
    model: GnnModel, graph: BidItemGraph, label_index: int
) -> tuple[float, dict[str, np.ndarray]]:
    """Cross entropy of the labeled bid and exact parameter gradients."""
    _check_graph(graph)
    if not 0 <= label_index < graph.num_bids:
        raise ValueError(f"label index {label_index} out of range")
    probs, caches = _forward_pass(model, graph)
    loss = -math.log(max(probs[label_index], 1e-300))

    p = model.params
    grads = {k: np.zeros_like(v) for k, v in p.items()}
    eb, ei = graph.edge_bid, graph.edge_item
    q = model.q

    dlogits = probs.copy()
    dlogits[label_index] -= 1.0
    d_obid = _mlp_backward(p, "score", dlogits.reshape(-1, 1),
                           caches["score"], grads)
    d_rb_in = _mlp_backward(p, "r_bid", d_obid, caches["r_bid"], grads)
    d_xb = d_rb_in[:, :q].copy()
    d_hbid = d_rb_in[:, q:]

    d_gb_in = _mlp_backward(p, "g_bid", d_hbid[eb], caches["g_bid"], grads)
    d_oitem = _scatter_sum(d_gb_in[:, :q], ei, graph.num_items)
    d_xb += _scatter_sum(d_gb_in[:, q:2 * q], eb, graph.num_bids)
    d_xe = d_gb_in[:, 2 * q:].copy()

    d_ri_in = _mlp_backward(p, "r_item", d_oitem, caches["r_item"], grads)
    d_xi = d_ri_in[:, :q].copy()
    d_hitem = d_ri_in[:, q:]

    d_gi_in = _mlp_backward(p, "g_item", d_hitem[ei], caches["g_item"], grads)
    d_xb += _scatter_sum(d_gi_in[:, :q], eb, graph.num_bids)
    d_xi += _scatter_sum(d_gi_in[:, q:2 * q], ei, graph.num_items)
    d_xe += d_gi_in[:, 2 * q:]

    cache_b, cache_i, cache_e = caches["emb"]
    _mlp_backward(p, "emb_bid", d_xb, cache_b, grads)
    _mlp_backward(p, "emb_item", d_xi, cache_i, grads)
    _mlp_backward(p, "emb_edge", d_xe, cache_e, grads)
    return loss, grads


def _mean_loss(model: GnnModel, graphs, labels) -> float:
    total = 0.0
    for g, y in zip(graphs, labels):
        probs, _ = _forward_pass(model, g)
        total += -math.log(max(probs[y], 1e-300))
    return total / len(graphs)


def encode_samples(samples) -> tuple[list[BidItemGraph], list[int]]:
    """Build and normalize the graph of every training sample once."""
    graphs = [normalize_features(build_graph(s.state)) for s in samples]
    labels = [s.label_index for s in samples]
    return graphs, labels


def train(
    model: GnnModel,
    dataset,
    cfg: TrainConfig,
    validation=None,
) -> TrainResult:
    """Minibatch gradient descent over single-label samples.

    Each graph is one forward/backward unit; gradients are averaged over
    the minibatch.  With a validation set, training stops once the mean
    validation loss has not improved for `cfg.patience` epochs and the
    best model is returned.
    """
    cfg.validate()
    if not dataset:
        raise ValueError("dataset is empty")
    graphs, labels = encode_samples(dataset)
    val_graphs, val_labels = encode_samples(validation) if validation else ([], [])

    work = model.copy()
    rng = make_rng(cfg.seed)
    adam_m = {k: np.zeros_like(v) for k, v in work.params.items()}
    adam_v = {k: np.zeros_like(v) for k, v in work.params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    result = TrainResult(model=work)
    best_val = math.inf
    best_params = None
    since_best = 0

    for epoch in range(cfg.epochs):
        perm = rng.permutation(len(graphs))
        epoch_loss = 0.0
        for lo in range(0, len(perm), cfg.batch_size):
            batch = perm[lo:lo + cfg.batch_size]
            acc = {k: np.zeros_like(v) for k, v in work.params.items()}
            for idx in batch:
                loss, grads = loss_and_gradients(work, graphs[idx], labels[idx])
                epoch_loss += loss
                for k in acc:
                    acc[k] += grads[k]
            scale = 1.0 / len(batch)
            step += 1
            for k, param in work.params.items():
                g = acc[k] * scale
                if cfg.optimizer == "adam":
                    adam_m[k] = beta1 * adam_m[k] + (1 - beta1) * g
                    adam_v[k] = beta2 * adam_v[k] + (1 - beta2) * g * g
                    m_hat = adam_m[k] / (1 - beta1 ** step)
                    v_hat = adam_v[k] / (1 - beta2 ** step)
                    param -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
                else:
                    param -= cfg.learning_rate * g
        mean_train = epoch_loss / len(graphs)
        if not math.isfinite(mean_train):
            raise DivergenceError(f"training diverged at epoch {epoch}")
        result.train_loss.append(mean_train)
        if val_graphs:
            vl = _mean_loss(work, val_graphs, val_labels)
            result.val_loss.append(vl)
            if vl < best_val - 1e-12:
                best_val = vl
                best_params = {k: v.copy() for k, v in work.params.items()}
                result.best_epoch = epoch
                since_best = 0
            else:
                since_best += 1
                if cfg.patience is not None and since_best >= cfg.patience:
                    break

    if best_params is not None:
        work.params = best_params
    result.model = work
    return result


# --- serialization -----------------------------------------------------------


def save_model(model: GnnModel) -> str:
    """Versioned JSON blob; round trips reproduce outputs bit-identically."""
    layers = []
    for name, _n_in, _n_out in _net_specs(model.q):
        for half in (1, 2):
            w = model.params[f"{name}.W{half}"]
            b = model.params[f"{name}.b{half}"]
            layers.append({
                "name": f"{name}.{half - 1}",
                "rows": w.shape[0],
                "cols": w.shape[1],
                "weights": [float(v) for v in w.ravel()],
                "bias": [float(v) for v in b],
            })
    return json.dumps(
        {"version": MODEL_FORMAT_VERSION, "q": model.q, "layers": layers}
    )


def load_model(blob: str) -> GnnModel:
    try:
        doc = json.loads(blob)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ModelLoadError(f"could not parse model blob: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != MODEL_FORMAT_VERSION:
        raise ModelLoadError(
            f"unsupported model version {doc.get('version') if isinstance(doc, dict) else None!r}"
        )
    try:
        q = int(doc["q"])
        by_name = {layer["name"]: layer for layer in doc["layers"]}
        params: dict[str, np.ndarray] = {}
        for name, n_in, n_out in _net_specs(q):
            for half, (rows, cols) in enumerate([(q, n_in), (n_out, q)]):
                layer = by_name[f"{name}.{half}"]
                if layer["rows"] != rows or layer["cols"] != cols:
                    raise ModelLoadError(
                        f"layer {name}.{half} has shape "
                        f"{layer['rows']}x{layer['cols']}, expected {rows}x{cols}"
                    )
                w = np.array(layer["weights"], dtype=np.float64)
                if w.size != rows * cols:
                    raise ModelLoadError(f"layer {name}.{half} weight count mismatch")
                params[f"{name}.W{half + 1}"] = w.reshape(rows, cols)
                params[f"{name}.b{half + 1}"] = np.array(layer["bias"],
                                                         dtype=np.float64)
        model = GnnModel(q=q, params=params)
    except ModelLoadError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ModelLoadError(f"malformed model blob: {exc}") from exc
    for k, v in model.params.items():
        if not np.all(np.isfinite(v)):
            raise ModelLoadError(f"non-finite weights in {k}")
    return model


def save_model_file(model: GnnModel, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(save_model(model))
        fh.write("\n")


def load_model_file(path: str) -> GnnModel:
    with open(path) as fh:
        return load_model(fh.read())
