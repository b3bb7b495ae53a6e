"""Ranking agents: random, TF-IDF retrieval, and a bag-of-embeddings bi-encoder.

The bi-encoder embeds context and candidate as the mean of their token
embeddings, scores by dot product, and trains with a margin ranking loss using
the other gold labels in the batch as negatives. Candidate vectors can be
cached because they do not depend on the context.
"""

from __future__ import annotations

import json
import re
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyBatch,
    EmptyVocabulary,
    KinkDetected,
    NonFiniteLoss,
    UnknownKind,
    VersionMismatch,
)

MODEL_MAGIC = b"LIGHTEMB"
MODEL_FORMAT_VERSION = 1

PHRASE_KINDS = ("object", "character", "location", "action", "vocabulary")

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lower-cased, punctuation-separated word tokens; deterministic."""
    return _TOKEN.findall(text.casefold())


@dataclass(frozen=True)
class ScoredCandidates:
    """Scores aligned with the candidate list; ties break on candidate text."""

    candidates: tuple[str, ...]
    scores: tuple[float, ...]
    argmax_index: int

    @property
    def best(self) -> str:
        return self.candidates[self.argmax_index]


def score_with_tiebreak(candidates: list[str], scores: list[float]) -> ScoredCandidates:
    if not candidates:
        raise ValueError("candidate set must be non-empty")
    top = max(scores)
    tied = [i for i, s in enumerate(scores) if s == top]
    best = min(tied, key=lambda i: candidates[i])
    return ScoredCandidates(tuple(candidates), tuple(float(s) for s in scores), best)


def random_rank(rng: np.random.Generator, candidates: list[str]) -> ScoredCandidates:
    """Uniform choice over candidate indices for the given generator state."""
    if not candidates:
        raise ValueError("candidate set must be non-empty")
    idx = int(rng.integers(len(candidates)))
    scores = [0.0] * len(candidates)
    scores[idx] = 1.0
    return ScoredCandidates(tuple(candidates), tuple(scores), idx)


# -- TF-IDF retrieval -------------------------------------------------------

@dataclass
class CorpusStats:
    """Document frequencies over a training corpus, for TF-IDF weighting."""

    doc_count: int
    doc_freq: dict[str, int]

    def idf(self, token: str) -> float:
        df = self.doc_freq.get(token)
        if df is None:
            return 0.0  # unknown tokens carry no weight
        return float(np.log(self.doc_count / max(df, 1)))


def build_corpus_stats(documents: list[str]) -> CorpusStats:
    doc_freq: dict[str, int] = {}
    for doc in documents:
        for token in set(tokenize(doc)):
            doc_freq[token] = doc_freq.get(token, 0) + 1
    return CorpusStats(len(documents), doc_freq)


def _tfidf_vector(stats: CorpusStats, text: str) -> dict[str, float]:
    counts: dict[str, int] = {}
    for token in tokenize(text):
        counts[token] = counts.get(token, 0) + 1
    return {t: c * stats.idf(t) for t, c in counts.items() if stats.idf(t) != 0.0}


def _cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if not a or not b:
        return 0.0
    dot = sum(w * b[t] for t, w in a.items() if t in b)
    na = sum(w * w for w in a.values()) ** 0.5
    nb = sum(w * w for w in b.values()) ** 0.5
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def ir_rank(stats: CorpusStats, context: str, candidates: list[str]) -> ScoredCandidates:
    """Cosine similarity of TF-IDF bag vectors between context and candidates."""
    if not stats.doc_freq:
        raise EmptyVocabulary("corpus statistics have an empty vocabulary")
    ctx = _tfidf_vector(stats, context)
    scores = [_cosine(ctx, _tfidf_vector(stats, c)) for c in candidates]
    return score_with_tiebreak(candidates, scores)


# -- embedding bi-encoder ------------------------------------------------------

@dataclass
class Hyperparams:
    dim: int = 32
    lr: float = 0.1
    margin: float = 0.2
    epochs: int = 10
    batch_size: int = 32
    seed: int = 0
    loss: str = "margin_ranking"

    def to_dict(self) -> dict:
        return {
            "dim": self.dim, "lr": self.lr, "margin": self.margin,
            "epochs": self.epochs, "batch_size": self.batch_size,
            "seed": self.seed, "loss": self.loss,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparams":
        return cls(**{k: d[k] for k in cls().to_dict() if k in d})


@dataclass
class EmbeddingModel:
    """Shared vocabulary + embedding matrix for contexts and candidates."""

    vocab: dict[str, int]
    dim: int
    matrix: np.ndarray  # shape (|vocab|, dim), float32
    hyperparams: Hyperparams
    registry: list[tuple[str, str]] = field(default_factory=list)  # (phrase, kind)

    def embed(self, text: str) -> np.ndarray:
        """Mean of token embeddings; out-of-vocabulary tokens count as zero vectors."""
        tokens = tokenize(text)
        if not tokens:
            return np.zeros(self.dim, dtype=np.float64)
        acc = np.zeros(self.dim, dtype=np.float64)
        for t in tokens:
            idx = self.vocab.get(t)
            if idx is not None:
                acc += self.matrix[idx].astype(np.float64)
        return acc / len(tokens)


def _mean_rows(matrix: np.ndarray, token_ids: list[int], total: int, dim: int) -> np.ndarray:
    if total == 0:
        return np.zeros(dim, dtype=np.float64)
    if not token_ids:
        return np.zeros(dim, dtype=np.float64)
    return matrix[token_ids].sum(axis=0) / total


def _batch_loss_and_grad(
    matrix: np.ndarray,
    batch: list[tuple[list[int], int, list[int], int, str]],
    margin: float,
    kink_tol: float | None = None,
) -> tuple[float, np.ndarray, int]:
    """Hinge ranking loss with in-batch negatives, plus its gradient.

    ``batch`` rows are (context token ids, context token total, gold token ids,
    gold token total, gold text). Negatives are the other golds in the batch,
    skipping any with text equal to the positive. Returns (loss, grad, pairs).
    """
    dim = matrix.shape[1]
    ctx = np.stack([_mean_rows(matrix, c, ct, dim) for c, ct, _, _, _ in batch])
    gold = np.stack([_mean_rows(matrix, g, gt, dim) for _, _, g, gt, _ in batch])
    scores = ctx @ gold.T
    pos = np.diag(scores)

    loss = 0.0
    pairs = 0
    d_ctx = np.zeros_like(ctx)
    d_gold = np.zeros_like(gold)
    n = len(batch)
    for i in range(n):
        for j in range(n):
            if i == j or batch[j][4] == batch[i][4]:
                continue
            hinge = margin - pos[i] + scores[i, j]
            if kink_tol is not None and abs(hinge) < kink_tol:
                raise KinkDetected(f"hinge argument {hinge:.3e} sits on the loss kink")
            if hinge > 0:
                loss += hinge
                pairs += 1
                d_ctx[i] += gold[j] - gold[i]
                d_gold[i] -= ctx[i]
                d_gold[j] += ctx[i]
    grad = np.zeros_like(matrix)
    for i, (c_ids, c_total, g_ids, g_total, _) in enumerate(batch):
        if c_total:
            np.add.at(grad, c_ids, d_ctx[i] / c_total)
        if g_total:
            np.add.at(grad, g_ids, d_gold[i] / g_total)
    return float(loss), grad, pairs


def _encode_rows(
    pairs: list[tuple[str, str]], vocab: dict[str, int]
) -> list[tuple[list[int], int, list[int], int, str]]:
    rows = []
    for context, gold in pairs:
        c_tokens = tokenize(context)
        g_tokens = tokenize(gold)
        c_ids = [vocab[t] for t in c_tokens if t in vocab]
        g_ids = [vocab[t] for t in g_tokens if t in vocab]
        rows.append((c_ids, len(c_tokens), g_ids, len(g_tokens), gold))
    return rows


def train_embedding(
    examples: list[tuple[str, str]],
    hyperparams: Hyperparams | None = None,
    registry: list[tuple[str, str]] | None = None,
) -> tuple[EmbeddingModel, list[float]]:
    """Fit the bi-encoder on (context, gold) pairs; fully seeded and reproducible.

    Returns the model and the per-epoch mean loss trace. Zero epochs returns
    the seeded initialization untouched.
    """
    if not examples:
        raise EmptyBatch("no training examples")
    hp = hyperparams or Hyperparams()
    vocab: dict[str, int] = {}
    for context, gold in examples:
        for token in tokenize(context) + tokenize(gold):
            if token not in vocab:
                vocab[token] = len(vocab)
    if not vocab:
        raise EmptyVocabulary("training examples contain no tokens")

    rng = np.random.default_rng(hp.seed)
    matrix = rng.normal(0.0, 0.1, size=(len(vocab), hp.dim))
    rows = _encode_rows(examples, vocab)

    trace: list[float] = []
    for _ in range(hp.epochs):
        order = rng.permutation(len(rows))
        epoch_loss = 0.0
        for start in range(0, len(rows), hp.batch_size):
            batch = [rows[k] for k in order[start : start + hp.batch_size]]
            if len(batch) < 2:
                continue  # no in-batch negatives available
            loss, grad, _ = _batch_loss_and_grad(matrix, batch, hp.margin)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"training diverged (loss={loss})")
            matrix -= hp.lr * grad
            epoch_loss += loss
        if not np.all(np.isfinite(matrix)):
            raise NonFiniteLoss("embedding matrix became non-finite")
        trace.append(epoch_loss / len(rows))
    model = EmbeddingModel(
        vocab, hp.dim, matrix.astype(np.float32), hp, list(registry or [])
    )
    return model, trace


def build_candidate_cache(model: EmbeddingModel, candidates: list[str]) -> dict[str, np.ndarray]:
    """Precompute candidate vectors for reuse; keyed by candidate text."""
    return {c: model.embed(c) for c in dict.fromkeys(candidates)}


def embed_rank(
    model: EmbeddingModel,
    context: str,
    candidates: list[str],
    cache: dict[str, np.ndarray] | None = None,
) -> ScoredCandidates:
    """Dot product of mean embeddings; bit-identical with or without the cache."""
    ctx = model.embed(context)
    scores = []
    for cand in candidates:
        vec = cache[cand] if cache is not None and cand in cache else model.embed(cand)
        scores.append(float(ctx @ vec))
    return score_with_tiebreak(candidates, scores)


def nearest_neighbors(
    model: EmbeddingModel, query_text: str, k: int, kind_filter: str
) -> list[tuple[str, float]]:
    """Top-k registry phrases of one kind by dot product, ties on text."""
    if kind_filter not in PHRASE_KINDS:
        raise UnknownKind(f"unknown phrase kind {kind_filter!r}")
    if k <= 0:
        return []
    query = model.embed(query_text)
    scored = [
        (phrase, float(query @ model.embed(phrase)))
        for phrase, kind in model.registry
        if kind == kind_filter
    ]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]


def gradient_check(
    model: EmbeddingModel,
    batch: list[tuple[str, str]],
    sample_entries: int = 48,
    step: float = 1e-5,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Raises KinkDetected when the batch sits on a hinge nondifferentiability;
    resample and try again.
    """
    if not batch:
        raise EmptyBatch("gradient check needs a batch")
    rows = _encode_rows(batch, model.vocab)
    matrix = model.matrix.astype(np.float64)
    margin = model.hyperparams.margin
    _, grad, _ = _batch_loss_and_grad(matrix, rows, margin, kink_tol=10 * step)

    rng = np.random.default_rng(seed)
    total = matrix.size
    picks = rng.choice(total, size=min(sample_entries, total), replace=False)
    worst = 0.0
    flat = matrix.reshape(-1)
    for flat_idx in picks:
        original = flat[flat_idx]
        flat[flat_idx] = original + step
        up, _, _ = _batch_loss_and_grad(matrix, rows, margin)
        flat[flat_idx] = original - step
        down, _, _ = _batch_loss_and_grad(matrix, rows, margin)
        flat[flat_idx] = original
        numeric = (up - down) / (2 * step)
        analytic = grad.reshape(-1)[flat_idx]
        denom = max(abs(analytic), abs(numeric), 1e-8)
        worst = max(worst, abs(analytic - numeric) / denom)
    return worst


# -- ranker front-ends ---------------------------------------------------------

class RandomRanker:
    """Picks a uniform candidate using the generator handed in per example."""

    name = "random"

    def rank(self, context: str, candidates: list[str], rng) -> ScoredCandidates:
        return random_rank(rng, candidates)


class IRRanker:
    """TF-IDF word-overlap ranker built from training-split statistics."""

    name = "ir"

    def __init__(self, stats: CorpusStats) -> None:
        self.stats = stats

    def rank(self, context: str, candidates: list[str], rng=None) -> ScoredCandidates:
        return ir_rank(self.stats, context, candidates)


class EmbeddingRanker:
    """Bi-encoder ranker; pass a candidate cache to skip re-embedding."""

    name = "embed"

    def __init__(self, model: EmbeddingModel, cache: dict[str, np.ndarray] | None = None) -> None:
        self.model = model
        self.cache = cache

    def rank(self, context: str, candidates: list[str], rng=None) -> ScoredCandidates:
        return embed_rank(self.model, context, candidates, self.cache)


# -- model files ------------------------------------------------------------------

def save_model(model: EmbeddingModel, path) -> None:
    """Binary layout: magic, version, dim, vocab size, hyperparams JSON,
    newline-separated vocabulary, then the row-major little-endian f32 matrix."""
    hp_blob = json.dumps(model.hyperparams.to_dict(), sort_keys=True).encode("utf-8")
    vocab_blob = "\n".join(
        token for token, _ in sorted(model.vocab.items(), key=lambda kv: kv[1])
    ).encode("utf-8")
    registry_blob = json.dumps(
        [[p, k] for p, k in model.registry], ensure_ascii=False
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<III", MODEL_FORMAT_VERSION, model.dim, len(model.vocab)))
        for blob in (hp_blob, vocab_blob, registry_blob):
            fh.write(struct.pack("<I", len(blob)))
            fh.write(blob)
        fh.write(np.ascontiguousarray(model.matrix, dtype="<f4").tobytes())


def load_model(path) -> EmbeddingModel:
    with open(path, "rb") as fh:
        magic = fh.read(len(MODEL_MAGIC))
        if magic != MODEL_MAGIC:
            raise VersionMismatch(f"{path}: not an embedding model file")
        version, dim, vocab_size = struct.unpack("<III", fh.read(12))
        if version != MODEL_FORMAT_VERSION:
            raise VersionMismatch(f"{path}: unsupported model version {version}")
        blobs = []
        for _ in range(3):
            (length,) = struct.unpack("<I", fh.read(4))
            blobs.append(fh.read(length))
        hp = Hyperparams.from_dict(json.loads(blobs[0]))
        tokens = blobs[1].decode("utf-8").split("\n") if blobs[1] else []
        registry = [(p, k) for p, k in json.loads(blobs[2])]
        raw = fh.read(vocab_size * dim * 4)
    matrix = np.frombuffer(raw, dtype="<f4").reshape(vocab_size, dim).copy()
    vocab = {token: i for i, token in enumerate(tokens)}
    return EmbeddingModel(vocab, dim, matrix, hp, registry)
