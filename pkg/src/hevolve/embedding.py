"""Vector representations of normalized heuristic source.

Two backends: a remote embedding model spoken to over HTTP (POST raw text,
flat numeric array back), and a deterministic hash fallback that needs no
network or model download. The metrics downstream depend only on cosine
similarities and Euclidean distances, so the fallback's token-n-gram
hashing is enough for desk-scale runs and CI.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BackendUnavailableError, EmbeddingError, UndefinedSimilarityError
from .normalize import NormalizedSource

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")
_NGRAM_ORDERS = (1, 2, 3)


@dataclass
class CodeEmbedding:
    vector: np.ndarray
    source_id: str = ""
    backend_tag: str = ""

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=float)
        if self.vector.ndim != 1:
            raise EmbeddingError("embedding vector must be one-dimensional")
        if not np.all(np.isfinite(self.vector)):
            raise EmbeddingError("embedding vector has non-finite components")


@dataclass
class EmbedderConfig:
    backend: str = "hash_fallback"  # or "remote_model"
    endpoint: str = ""
    dimension: int = 256
    cache_path: str | None = None
    retries: int = 3
    degrade_to_hash: bool = False

    def __post_init__(self):
        if self.dimension <= 0:
            raise ValueError("dimension must be positive")
        if self.backend not in ("hash_fallback", "remote_model"):
            raise ValueError(f"unknown embedding backend {self.backend!r}")


def hash_embed(text: str, dimension: int) -> np.ndarray:
    """Token n-gram hashing into ``dimension`` signed buckets, L2-normalized.

    Deterministic across processes (content hashing, no PYTHONHASHSEED
    dependence); never returns a zero vector.
    """
    vec = np.zeros(dimension, dtype=float)
    tokens = _TOKEN_RE.findall(text)
    if not tokens:
        vec[0] = 1.0
        return vec
    for order in _NGRAM_ORDERS:
        for i in range(len(tokens) - order + 1):
            gram = "\x1f".join(tokens[i : i + order])
            digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
            value = int.from_bytes(digest, "big")
            bucket = value % dimension
            sign = 1.0 if (value >> 60) & 1 else -1.0
            vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        vec[0] = 1.0
        return vec
    return vec / norm


class EmbeddingProvider:
    """Maps normalized source text to fixed-dimension vectors, with an
    optional on-disk cache keyed by content hash. ``backend_calls`` counts
    actual backend invocations (cache hits perform none)."""

    def __init__(self, cfg: EmbedderConfig | None = None):
        self.cfg = cfg or EmbedderConfig()
        self.backend_calls = 0
        self._memory: dict[str, np.ndarray] = {}
        if self.cfg.cache_path:
            Path(self.cfg.cache_path).mkdir(parents=True, exist_ok=True)

    @property
    def tag(self) -> str:
        if self.cfg.backend == "hash_fallback":
            return f"hash_fallback:d{self.cfg.dimension}"
        return f"remote_model:{self.cfg.endpoint}"

    def embed(self, src: NormalizedSource) -> CodeEmbedding:
        key = hashlib.sha256(
            (self.tag + "\x00" + src.text).encode("utf-8")
        ).hexdigest()
        vec = self._memory.get(key)
        if vec is None:
            vec = self._load_cached(key)
        if vec is None:
            vec = self._compute(src.text)
            self._store_cached(key, vec)
        self._memory[key] = vec
        if vec.shape[0] != self.cfg.dimension and self.cfg.backend == "hash_fallback":
            raise EmbeddingError("cached vector dimension mismatch")
        return CodeEmbedding(vector=vec, source_id=src.original_id, backend_tag=self.tag)

    def _compute(self, text: str) -> np.ndarray:
        if self.cfg.backend == "hash_fallback":
            self.backend_calls += 1
            return hash_embed(text, self.cfg.dimension)
        try:
            vec = self._remote_embed(text)
        except BackendUnavailableError:
            if not self.cfg.degrade_to_hash:
                raise
            return hash_embed(text, self.cfg.dimension)
        return vec

    def _remote_embed(self, text: str) -> np.ndarray:
        import requests

        endpoint = self.cfg.endpoint or os.environ.get("EMBED_ENDPOINT", "")
        if not endpoint:
            raise BackendUnavailableError("no embedding endpoint configured")
        headers = {"Content-Type": "text/plain"}
        token = os.environ.get("EMBED_TOKEN", "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        delay = 0.5
        last_error: Exception | None = None
        for _ in range(self.cfg.retries):
            try:
                self.backend_calls += 1
                resp = requests.post(
                    endpoint, data=text.encode("utf-8"), headers=headers, timeout=30
                )
                resp.raise_for_status()
                vec = np.asarray(resp.json(), dtype=float)
                if vec.ndim != 1:
                    raise EmbeddingError("endpoint did not return a flat array")
                return vec
            except Exception as exc:  # transport, HTTP status, or JSON shape
                last_error = exc
                time.sleep(delay)
                delay *= 2
        raise BackendUnavailableError(
            f"embedding endpoint failed after {self.cfg.retries} attempts: {last_error}"
        )

    def _cache_file(self, key: str) -> Path | None:
        if not self.cfg.cache_path:
            return None
        return Path(self.cfg.cache_path) / f"{key}.json"

    def _load_cached(self, key: str) -> np.ndarray | None:
        path = self._cache_file(key)
        if path is None or not path.exists():
            return None
        try:
            return np.asarray(json.loads(path.read_text()), dtype=float)
        except (json.JSONDecodeError, ValueError):
            return None

    def _store_cached(self, key: str, vec: np.ndarray) -> None:
        path = self._cache_file(key)
        if path is None:
            return
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(vec.tolist()))
        os.replace(tmp, path)  # atomic per key


def cosine_similarity(a: CodeEmbedding, b: CodeEmbedding) -> float:
    """(a.b)/(|a||b|); exact symmetry, scale-invariant for k > 0."""
    va, vb = a.vector, b.vector
    if va.shape != vb.shape:
        raise EmbeddingError(
            f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}"
        )
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise UndefinedSimilarityError("cosine similarity with a zero vector")
    sim = float(np.dot(va, vb) / (na * nb))
    return max(-1.0, min(1.0, sim))
