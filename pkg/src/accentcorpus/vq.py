"""K-means vector quantization of continuous feature frames.

Frames come from a simple binary matrix file (header: n and dim as uint32
little-endian, payload: float32 little-endian, row-major; ``.npy`` files are
also accepted). Fitting uses k-means++ seeding and Lloyd iterations with
farthest-point repair for empty clusters; token sequences drop consecutive
repeats.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class Codebook:
    k: int
    dim: int
    centroids: np.ndarray
    train_distortion: float
    # per-iteration distortions from fitting; not persisted
    distortion_history: list[float] | None = None

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=np.float64)
        if self.centroids.shape != (self.k, self.dim):
            raise ValueError(
                f"centroids shape {self.centroids.shape} != ({self.k}, {self.dim})"
            )
        if not np.all(np.isfinite(self.centroids)):
            raise ValueError("non-finite centroids")

    def save(self, path: str | Path) -> None:
        np.savez(
            path, centroids=self.centroids,
            train_distortion=np.float64(self.train_distortion),
        )

    @classmethod
    def load(cls, path: str | Path) -> "Codebook":
        data = np.load(path)
        centroids = data["centroids"]
        return cls(
            k=centroids.shape[0], dim=centroids.shape[1],
            centroids=centroids,
            train_distortion=float(data["train_distortion"]),
        )


@dataclass
class TokenSequence:
    tokens: list[int]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def write_matrix(path: str | Path, frames: np.ndarray) -> None:
    frames = np.ascontiguousarray(frames, dtype="<f4")
    if frames.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {frames.shape}")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", frames.shape[0], frames.shape[1]))
        fh.write(frames.tobytes(order="C"))


def read_matrix(path: str | Path) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".npy":
        frames = np.load(path)
        if frames.ndim != 2:
            raise ValueError(f"expected a 2-d matrix in {path}")
        return np.asarray(frames, dtype=np.float64)
    raw = path.read_bytes()
    if len(raw) < 8:
        raise ValueError(f"truncated matrix file {path}")
    n, dim = struct.unpack("<II", raw[:8])
    expected = 8 + 4 * n * dim
    if len(raw) != expected:
        raise ValueError(
            f"matrix file {path} has {len(raw)} bytes, expected {expected} "
            f"for {n}x{dim}"
        )
    frames = np.frombuffer(raw[8:], dtype="<f4").reshape(n, dim)
    return frames.astype(np.float64)


def _sq_dists(frames: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (n, k) squared Euclidean distances; clipped because the expansion can
    # go slightly negative in floating point.
    d = (
        np.sum(frames ** 2, axis=1)[:, None]
        - 2.0 * frames @ centroids.T
        + np.sum(centroids ** 2, axis=1)[None, :]
    )
    return np.maximum(d, 0.0)


def _kmeanspp_init(frames: np.ndarray, k: int,
                   rng: np.random.Generator) -> np.ndarray:
    n = frames.shape[0]
    centroids = np.empty((k, frames.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = frames[first]
    closest = _sq_dists(frames, centroids[:1])[:, 0]
    for i in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # All remaining mass sits on existing centroids; pick uniformly.
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centroids[i] = frames[idx]
        closest = np.minimum(
            closest, _sq_dists(frames, centroids[i:i + 1])[:, 0]
        )
    return centroids


def fit_kmeans(frames: np.ndarray, k: int, max_iters: int = 100,
               seed: int = 0) -> Codebook:
    """Lloyd's algorithm with k-means++ seeding.

    Iterates until the assignment reaches a fixpoint or ``max_iters``;
    distortion (mean squared distance) is asserted non-increasing every
    iteration. Empty clusters are re-seeded from the farthest point.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2:
        raise ValueError(f"expected a 2-d frame matrix, got {frames.shape}")
    n, dim = frames.shape
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < k:
        raise ValueError(f"need at least k={k} frames, got {n}")
    if not np.all(np.isfinite(frames)):
        raise ValueError("non-finite values in frames")

    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(frames, k, rng)
    prev_assign = None
    prev_distortion = np.inf
    distortion = np.inf
    history: list[float] = []
    for _ in range(max_iters):
        dists = _sq_dists(frames, centroids)
        assign = np.argmin(dists, axis=1)
        distortion = float(dists[np.arange(n), assign].mean())
        assert distortion <= prev_distortion * (1 + 1e-12) + 1e-12, (
            f"distortion increased: {prev_distortion} -> {distortion}"
        )
        prev_distortion = distortion
        history.append(distortion)
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            break
        prev_assign = assign

        for c in range(k):
            members = frames[assign == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
        empty = np.setdiff1d(np.arange(k), np.unique(assign))
        if len(empty):
            point_costs = _sq_dists(frames, centroids).min(axis=1)
            for c in empty:
                farthest = int(np.argmax(point_costs))
                centroids[c] = frames[farthest]
                point_costs[farthest] = 0.0

    final = _sq_dists(frames, centroids)
    assign = np.argmin(final, axis=1)
    distortion = float(final[np.arange(n), assign].mean())
    history.append(distortion)
    return Codebook(k=k, dim=dim, centroids=centroids,
                    train_distortion=distortion,
                    distortion_history=history)


def quantize(codebook: Codebook, frames: np.ndarray) -> TokenSequence:
    """Nearest-centroid token ids; ties go to the lowest id."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[1] != codebook.dim:
        raise ValueError(
            f"frames shape {frames.shape} incompatible with codebook dim "
            f"{codebook.dim}"
        )
    assign = np.argmin(_sq_dists(frames, codebook.centroids), axis=1)
    return TokenSequence(tokens=[int(t) for t in assign])


def dedup(seq: TokenSequence) -> TokenSequence:
    """Collapse runs of equal adjacent tokens to a single token."""
    out: list[int] = []
    for token in seq.tokens:
        if not out or out[-1] != token:
            out.append(token)
    return TokenSequence(tokens=out)
