"""Numeric reference for low-rank adapter math on a toy attention decoder.

Everything here is float64 numpy and sized for the desk, not the GPU: the
point is checkable arithmetic, not throughput.  A LoRA adapter keeps a
frozen base weight w0 (d x k) untouched and adds a rank-r update
scaling * b @ a, with b (d x r) initialized to zero so a fresh adapter is
an exact identity delta.  The toy decoder is a single-head attention layer
with adapters on the query and value projections only; the key path and
all dense weights stay frozen.  Training is plain gradient descent with
analytic gradients, cross-checked by central finite differences.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_MAGIC = b"LRAD"


def _as_matrix(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


@dataclass
class LoraAdapter:
    """Rank-r update for a d x k weight: delta = scaling * b @ a."""

    a: np.ndarray  # (r, k)
    b: np.ndarray  # (d, r)
    scaling: float = 1.0

    def __post_init__(self) -> None:
        self.a = _as_matrix(self.a, "a")
        self.b = _as_matrix(self.b, "b")
        if self.b.shape[1] != self.a.shape[0]:
            raise ValueError(
                f"rank mismatch: b has {self.b.shape[1]} columns, a has "
                f"{self.a.shape[0]} rows"
            )
        d, k = self.b.shape[0], self.a.shape[1]
        if not self.rank < min(d, k):
            raise ValueError(
                f"rank {self.rank} must be strictly below min(d, k) = {min(d, k)}"
            )

    @property
    def rank(self) -> int:
        return self.a.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.b.shape[0], self.a.shape[1]

    @property
    def n_params(self) -> int:
        """Trainable entries: r * (k + d)."""
        d, k = self.shape
        return self.rank * (k + d)


def init_adapter(
    d: int, k: int, rank: int, seed: int = 0, scaling: float = 1.0, noise: float = 0.01
) -> LoraAdapter:
    """Fresh adapter: a is small seeded uniform noise, b is all zeros."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(-noise, noise, size=(rank, k))
    b = np.zeros((d, rank))
    return LoraAdapter(a=a, b=b, scaling=scaling)


def lora_forward(w0: np.ndarray, adapter: LoraAdapter, x: np.ndarray) -> np.ndarray:
    """h = w0 @ x + scaling * b @ (a @ x), without materializing b @ a."""
    w0 = _as_matrix(w0, "w0")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != w0.shape[1]:
        raise ValueError(f"x must be a vector of length {w0.shape[1]}, got {x.shape}")
    if adapter.shape != w0.shape:
        raise ValueError(f"adapter shape {adapter.shape} does not match w0 {w0.shape}")
    return w0 @ x + adapter.scaling * (adapter.b @ (adapter.a @ x))


def merge(w0: np.ndarray, adapter: LoraAdapter) -> np.ndarray:
    """Fold the update into the base weight: w0 + scaling * b @ a."""
    w0 = _as_matrix(w0, "w0")
    if adapter.shape != w0.shape:
        raise ValueError(f"adapter shape {adapter.shape} does not match w0 {w0.shape}")
    return w0 + adapter.scaling * (adapter.b @ adapter.a)


def save_adapter(adapter: LoraAdapter, path: str | Path) -> None:
    """Flat binary container: magic, (d, k, r) header, scaling, b rows, a rows."""
    d, k = adapter.shape
    header = _MAGIC + struct.pack("<IIId", d, k, adapter.rank, adapter.scaling)
    payload = adapter.b.tobytes(order="C") + adapter.a.tobytes(order="C")
    Path(path).write_bytes(header + payload)


def load_adapter(path: str | Path) -> LoraAdapter:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: not an adapter file")
    d, k, rank, scaling = struct.unpack_from("<IIId", raw, 4)
    offset = 4 + struct.calcsize("<IIId")
    b = np.frombuffer(raw, dtype="<f8", count=d * rank, offset=offset).reshape(d, rank)
    offset += d * rank * 8
    a = np.frombuffer(raw, dtype="<f8", count=rank * k, offset=offset).reshape(rank, k)
    return LoraAdapter(a=a.copy(), b=b.copy(), scaling=scaling)


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    """Row-stabilized softmax (subtract the max before exponentiation)."""
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def attention(
    q: np.ndarray, k: np.ndarray, v: np.ndarray, d_k: int
) -> np.ndarray:
    """softmax(q @ k.T / sqrt(d_k)) @ v with rows of q as queries.

    d_k is the key dimension entering the scale factor; it is passed
    explicitly so the scaling is visible and checkable on its own.
    """
    q = _as_matrix(q, "q")
    k = _as_matrix(k, "k")
    v = _as_matrix(v, "v")
    if d_k <= 0:
        raise ValueError("d_k must be positive")
    if q.shape[1] != k.shape[1]:
        raise ValueError(
            f"q and k column counts differ: {q.shape[1]} vs {k.shape[1]}"
        )
    if k.shape[0] != v.shape[0]:
        raise ValueError(f"k has {k.shape[0]} rows but v has {v.shape[0]}")
    weights = softmax(q @ k.T / math.sqrt(d_k), axis=-1)
    return weights @ v


def _log_softmax(u: np.ndarray) -> np.ndarray:
    m = u.max()
    return u - (m + math.log(np.exp(u - m).sum()))


@dataclass
class ToyDecoder:
    """One attention layer plus output head over a tiny symbol vocabulary.

    Only the four adapter matrices (lora_q.a/b, lora_v.a/b) are trainable;
    embed, wq, wk, wv, wo and out_proj are frozen at construction.
    """

    vocab: tuple[str, ...]
    embed: np.ndarray     # (V, k)
    wq: np.ndarray        # (d_k, k)
    wk: np.ndarray        # (d_k, k)
    wv: np.ndarray        # (d_k, k)
    wo: np.ndarray        # (k, d_k)
    out_proj: np.ndarray  # (k, V)
    lora_q: LoraAdapter   # a (r, k), b (d_k, r)
    lora_v: LoraAdapter
    d_k: int
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if len(set(self.vocab)) != len(self.vocab):
            raise ValueError("vocab symbols must be unique")
        v, k = self.embed.shape
        if v != len(self.vocab):
            raise ValueError("embed rows must match vocab size")
        for name, mat, shape in (
            ("wq", self.wq, (self.d_k, k)),
            ("wk", self.wk, (self.d_k, k)),
            ("wv", self.wv, (self.d_k, k)),
            ("wo", self.wo, (k, self.d_k)),
            ("out_proj", self.out_proj, (k, v)),
        ):
            if mat.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {mat.shape}")
        for name, adapter in (("lora_q", self.lora_q), ("lora_v", self.lora_v)):
            if adapter.shape != (self.d_k, k):
                raise ValueError(f"{name} must adapt a ({self.d_k}, {k}) weight")
        self._index = {sym: i for i, sym in enumerate(self.vocab)}

    def ids(self, symbols: list[str] | tuple[str, ...]) -> list[int]:
        try:
            return [self._index[s] for s in symbols]
        except KeyError as exc:
            raise ValueError(f"unknown symbol {exc.args[0]!r}") from exc

    @property
    def trainable_parameter_count(self) -> int:
        return self.lora_q.n_params + self.lora_v.n_params

    def last_logits(self, prefix_ids: list[int]) -> np.ndarray:
        """Logits for the next symbol after a non-empty prefix."""
        if not prefix_ids:
            raise ValueError("cannot score with an empty context")
        E = self.embed[prefix_ids]  # (n, k)
        e_last = E[-1]
        lq, lv = self.lora_q, self.lora_v
        q = self.wq @ e_last + lq.scaling * (lq.b @ (lq.a @ e_last))  # (d_k,)
        K = E @ self.wk.T                                             # (n, d_k)
        V = E @ self.wv.T + lv.scaling * ((E @ lv.a.T) @ lv.b.T)      # (n, d_k)
        weights = softmax((K @ q) / math.sqrt(self.d_k))              # (n,)
        context = weights @ V                                         # (d_k,)
        hidden = self.wo @ context                                    # (k,)
        return hidden @ self.out_proj                                 # (V,)

    def step_log_probs(self, prefix_ids: list[int]) -> np.ndarray:
        return _log_softmax(self.last_logits(prefix_ids))


def make_decoder(
    vocab: list[str] | tuple[str, ...],
    k: int = 8,
    d_k: int = 4,
    rank: int = 2,
    seed: int = 0,
    scaling: float = 1.0,
) -> ToyDecoder:
    """Seeded decoder with frozen random weights and fresh adapters."""
    if not rank < min(d_k, k):
        raise ValueError(f"rank {rank} must be strictly below min(d_k, k) = {min(d_k, k)}")
    rng = np.random.default_rng(seed)
    v = len(vocab)
    scale = 1.0 / math.sqrt(k)
    return ToyDecoder(
        vocab=tuple(vocab),
        embed=rng.normal(0.0, 1.0, size=(v, k)),
        wq=rng.normal(0.0, scale, size=(d_k, k)),
        wk=rng.normal(0.0, scale, size=(d_k, k)),
        wv=rng.normal(0.0, scale, size=(d_k, k)),
        wo=rng.normal(0.0, scale, size=(k, d_k)),
        out_proj=rng.normal(0.0, scale, size=(k, v)),
        lora_q=init_adapter(d_k, k, rank, seed=seed + 1, scaling=scaling),
        lora_v=init_adapter(d_k, k, rank, seed=seed + 2, scaling=scaling),
        d_k=d_k,
    )


Example = tuple[list[str], list[str], list[str]]  # (x, p, y)


def sequence_log_prob(
    model: ToyDecoder, x: list[str], p: list[str], y: list[str]
) -> float:
    """log p(y | p, x) by the chain rule: sum of final-position step log-probs.

    The context for step i is concat(p, x, y[:i]).
    """
    if not y:
        raise ValueError("target sequence y must be non-empty")
    prefix = model.ids(p) + model.ids(x)
    total = 0.0
    for target in model.ids(y):
        total += float(model.step_log_probs(prefix)[target])
        prefix.append(target)
    return total


def _example_loss_and_grads(model: ToyDecoder, example: Example):
    """NLL of one example and analytic gradients wrt the four adapter matrices."""
    x, p, y = example
    prefix = model.ids(p) + model.ids(x)
    if not prefix:
        raise ValueError("cannot score with an empty context")
    targets = model.ids(y)
    if not targets:
        raise ValueError("target sequence y must be non-empty")
    lq, lv = model.lora_q, model.lora_v
    sqrt_dk = math.sqrt(model.d_k)

    loss = 0.0
    g_aq = np.zeros_like(lq.a)
    g_bq = np.zeros_like(lq.b)
    g_av = np.zeros_like(lv.a)
    g_bv = np.zeros_like(lv.b)

    for target in targets:
        E = model.embed[prefix]
        e_last = E[-1]
        alpha_q = lq.a @ e_last                                  # (r,)
        q = model.wq @ e_last + lq.scaling * (lq.b @ alpha_q)    # (d_k,)
        K = E @ model.wk.T                                       # (n, d_k)
        Av = E @ lv.a.T                                          # (n, r)
        V = E @ model.wv.T + lv.scaling * (Av @ lv.b.T)          # (n, d_k)
        z = (K @ q) / sqrt_dk                                    # (n,)
        w = softmax(z)                                           # (n,)
        context = w @ V                                          # (d_k,)
        hidden = model.wo @ context                              # (k,)
        logits = hidden @ model.out_proj                         # (V,)

        m = logits.max()
        lse = m + math.log(np.exp(logits - m).sum())
        loss += lse - logits[target]

        probs = np.exp(logits - lse)
        d_logits = probs.copy()
        d_logits[target] -= 1.0
        d_hidden = model.out_proj @ d_logits                     # (k,)
        d_context = model.wo.T @ d_hidden                        # (d_k,)
        dV = np.outer(w, d_context)                              # (n, d_k)
        dw = V @ d_context                                       # (n,)
        dz = w * (dw - (w @ dw))                                 # softmax Jacobian
        dq = (K.T @ dz) / sqrt_dk                                # (d_k,)

        g_bq += lq.scaling * np.outer(dq, alpha_q)
        g_aq += lq.scaling * np.outer(lq.b.T @ dq, e_last)
        g_bv += lv.scaling * (dV.T @ Av)
        g_av += lv.scaling * (lv.b.T @ dV.T @ E)

        prefix.append(target)

    return loss, (g_aq, g_bq, g_av, g_bv)


def train_step(model: ToyDecoder, batch: list[Example], lr: float) -> float:
    """One gradient-descent step on the adapter matrices only.

    Loss is the mean over the batch of per-example sequence NLL; the
    returned value is the pre-update loss.  Raises on a non-finite loss
    (divergence) and never touches the frozen weights.
    """
    if not batch:
        raise ValueError("batch must be non-empty")
    if lr < 0:
        raise ValueError("learning rate must be non-negative")
    total = 0.0
    grads = [
        np.zeros_like(model.lora_q.a),
        np.zeros_like(model.lora_q.b),
        np.zeros_like(model.lora_v.a),
        np.zeros_like(model.lora_v.b),
    ]
    for example in batch:
        loss, (g_aq, g_bq, g_av, g_bv) = _example_loss_and_grads(model, example)
        total += loss
        for acc, g in zip(grads, (g_aq, g_bq, g_av, g_bv)):
            acc += g
    loss = total / len(batch)
    if not math.isfinite(loss):
        raise FloatingPointError(f"training diverged: loss = {loss}")
    for param, grad in zip(
        (model.lora_q.a, model.lora_q.b, model.lora_v.a, model.lora_v.b), grads
    ):
        param -= (lr / len(batch)) * grad
    return loss


def grad_check(model: ToyDecoder, example: Example, epsilon: float = 1e-4) -> float:
    """Max relative error of analytic vs central-finite-difference gradients.

    The finite-difference side evaluates the independent forward path
    (sequence_log_prob); the relative error denominator is
    max(|analytic|, |numeric|, 1e-8).  The default step balances truncation
    against float64 roundoff at loss scale O(1); much smaller steps let
    roundoff noise dominate on near-zero gradient entries.
    """
    if not 0 < epsilon <= 1e-2:
        raise ValueError(f"epsilon must be in (0, 1e-2], got {epsilon}")
    x, p, y = example
    _, analytic = _example_loss_and_grads(model, example)
    params = (model.lora_q.a, model.lora_q.b, model.lora_v.a, model.lora_v.b)

    worst = 0.0
    for param, grad in zip(params, analytic):
        flat = param.ravel()
        flat_grad = grad.ravel()
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + epsilon
            plus = -sequence_log_prob(model, x, p, y)
            flat[i] = original - epsilon
            minus = -sequence_log_prob(model, x, p, y)
            flat[i] = original
            numeric = (plus - minus) / (2 * epsilon)
            denom = max(abs(flat_grad[i]), abs(numeric), 1e-8)
            worst = max(worst, abs(flat_grad[i] - numeric) / denom)
    return worst
