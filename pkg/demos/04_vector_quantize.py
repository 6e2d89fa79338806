"""Discretizing continuous feature frames into token sequences.

Synthetic frames stand in for self-supervised speech features: k-means
builds the codebook, quantization maps frames to cluster ids, and collapsing
adjacent repeats yields the token sequence a downstream sequence model sees.
"""
import numpy as np

from accentcorpus import vq

rng = np.random.default_rng(0)

# Three well-separated clusters, visited in slow succession like speech
# frames dwelling on a phone before moving to the next.
centers = np.array([[0.0, 0.0], [6.0, 0.0], [3.0, 5.0]])
dwell = [0, 0, 0, 1, 1, 2, 2, 2, 2, 1, 0, 0]
frames = np.vstack([
    centers[c] + rng.normal(scale=0.3, size=(1, 2)) for c in dwell
])

codebook = vq.fit_kmeans(frames, k=3, seed=0)
print(f"codebook: k={codebook.k} dim={codebook.dim} "
      f"distortion={codebook.train_distortion:.4f}")
print("distortion per Lloyd iteration:",
      [f"{d:.4f}" for d in codebook.distortion_history])

tokens = vq.quantize(codebook, frames)
print(f"\nraw tokens:    {tokens.tokens}")
deduped = vq.dedup(tokens)
print(f"deduped:       {deduped.tokens}")
print(f"compression:   {len(tokens)} -> {len(deduped)} tokens")

# The matrix file format round-trips through disk.
import tempfile
from pathlib import Path

path = Path(tempfile.mkdtemp(prefix="vq-demo-")) / "frames.bin"
vq.write_matrix(path, frames)
loaded = vq.read_matrix(path)
print(f"\nmatrix file round trip: {loaded.shape}, "
      f"max abs error {np.abs(loaded - frames).max():.2e}")
