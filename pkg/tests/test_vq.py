import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from accentcorpus import vq


def best_two_cluster_distortion(frames: np.ndarray) -> float:
    """Brute force over every nonempty 2-partition of the rows."""
    n = len(frames)
    best = np.inf
    for mask in range(1, 2 ** n - 1):
        members = [bool(mask & (1 << i)) for i in range(n)]
        a = frames[np.array(members)]
        b = frames[~np.array(members)]
        cost = (
            ((a - a.mean(axis=0)) ** 2).sum()
            + ((b - b.mean(axis=0)) ** 2).sum()
        ) / n
        best = min(best, cost)
    return best


class TestFit:
    def test_k1_centroid_is_mean_distortion_is_variance(self):
        frames = np.array([[0.0], [2.0], [4.0]])
        cb = vq.fit_kmeans(frames, k=1)
        assert cb.centroids[0, 0] == pytest.approx(2.0, abs=1e-12)
        assert cb.train_distortion == pytest.approx(8.0 / 3.0, abs=1e-12)

    def test_two_blobs_match_brute_force(self):
        rng = np.random.default_rng(42)
        blob_a = rng.normal(0.0, 0.05, size=(5, 2))
        blob_b = rng.normal(5.0, 0.05, size=(5, 2)) + [0.0, 3.0]
        frames = np.vstack([blob_a, blob_b])
        cb = vq.fit_kmeans(frames, k=2, seed=1)
        assert cb.train_distortion == pytest.approx(
            best_two_cluster_distortion(frames), rel=1e-9
        )
        means = sorted(
            (tuple(c) for c in cb.centroids), key=lambda c: c[0]
        )
        np.testing.assert_allclose(means[0], blob_a.mean(axis=0), atol=1e-9)
        np.testing.assert_allclose(means[1], blob_b.mean(axis=0), atol=1e-9)

    def test_n_equals_k_gives_zero_distortion(self):
        frames = np.arange(12, dtype=float).reshape(4, 3)
        cb = vq.fit_kmeans(frames, k=4, seed=0)
        assert cb.train_distortion <= 1e-12

    def test_n_below_k_rejected(self):
        with pytest.raises(ValueError):
            vq.fit_kmeans(np.zeros((3, 2)), k=4)

    def test_non_finite_rejected(self):
        frames = np.array([[0.0], [np.nan]])
        with pytest.raises(ValueError):
            vq.fit_kmeans(frames, k=1)

    def test_distortion_history_non_increasing_on_random_instances(self):
        rng = np.random.default_rng(0)
        for trial in range(100):
            n = int(rng.integers(5, 40))
            dim = int(rng.integers(1, 4))
            k = int(rng.integers(1, min(n, 6)))
            frames = rng.normal(size=(n, dim))
            cb = vq.fit_kmeans(frames, k=k, max_iters=25, seed=trial)
            h = cb.distortion_history
            assert all(
                h[i + 1] <= h[i] * (1 + 1e-12) + 1e-12
                for i in range(len(h) - 1)
            ), (trial, h)

    def test_deterministic_under_seed(self):
        frames = np.random.default_rng(3).normal(size=(50, 4))
        a = vq.fit_kmeans(frames, k=5, seed=11)
        b = vq.fit_kmeans(frames, k=5, seed=11)
        np.testing.assert_array_equal(a.centroids, b.centroids)

    def test_paper_scale_codebook_shape(self):
        rng = np.random.default_rng(1)
        frames = rng.normal(size=(2000, 16))
        cb = vq.fit_kmeans(frames, k=500, max_iters=3, seed=0)
        assert cb.centroids.shape == (500, 16)


class TestQuantize:
    def test_exact_centroid_match(self):
        cb = vq.Codebook(k=3, dim=1, centroids=[[0.0], [1.0], [2.0]],
                         train_distortion=0.0)
        assert vq.quantize(cb, np.array([[1.0]])).tokens == [1]

    def test_tie_goes_to_lowest_id(self):
        cb = vq.Codebook(k=6, dim=1,
                         centroids=[[9.0], [9.0], [0.0], [9.0], [9.0], [2.0]],
                         train_distortion=0.0)
        # frame at 1.0 is equidistant to centroids 2 and 5
        assert vq.quantize(cb, np.array([[1.0]])).tokens == [2]

    def test_centroids_quantize_to_identity(self):
        rng = np.random.default_rng(5)
        centroids = rng.normal(size=(8, 3))
        cb = vq.Codebook(k=8, dim=3, centroids=centroids,
                         train_distortion=0.0)
        assert vq.quantize(cb, centroids).tokens == list(range(8))

    def test_dim_mismatch(self):
        cb = vq.Codebook(k=1, dim=2, centroids=[[0.0, 0.0]],
                         train_distortion=0.0)
        with pytest.raises(ValueError):
            vq.quantize(cb, np.zeros((3, 3)))


class TestDedup:
    def test_run_collapse(self):
        assert vq.dedup(vq.TokenSequence([5, 5, 3, 3, 3, 5])).tokens == [5, 3, 5]

    def test_empty(self):
        assert vq.dedup(vq.TokenSequence([])).tokens == []

    @given(st.lists(st.integers(0, 9), max_size=40))
    def test_idempotent_and_never_longer(self, tokens):
        once = vq.dedup(vq.TokenSequence(tokens))
        twice = vq.dedup(once)
        assert twice.tokens == once.tokens
        assert len(once) <= len(tokens)
        assert all(a != b for a, b in zip(once.tokens, once.tokens[1:]))


class TestMatrixFile:
    def test_round_trip(self, tmp_path):
        frames = np.random.default_rng(0).normal(size=(7, 3)).astype(np.float32)
        path = tmp_path / "frames.bin"
        vq.write_matrix(path, frames)
        np.testing.assert_allclose(vq.read_matrix(path), frames, atol=0)

    def test_npy_accepted(self, tmp_path):
        frames = np.zeros((2, 2), dtype=np.float32)
        path = tmp_path / "frames.npy"
        np.save(path, frames)
        assert vq.read_matrix(path).shape == (2, 2)

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"\x01\x00")
        with pytest.raises(ValueError, match="truncated"):
            vq.read_matrix(path)

    def test_size_mismatch(self, tmp_path):
        import struct

        path = tmp_path / "bad.bin"
        path.write_bytes(struct.pack("<II", 2, 2) + b"\x00" * 8)
        with pytest.raises(ValueError, match="expected"):
            vq.read_matrix(path)

    def test_codebook_save_load(self, tmp_path):
        cb = vq.fit_kmeans(np.random.default_rng(0).normal(size=(20, 2)), k=3)
        path = tmp_path / "cb.npz"
        cb.save(path)
        loaded = vq.Codebook.load(path)
        np.testing.assert_array_equal(loaded.centroids, cb.centroids)
        assert loaded.train_distortion == cb.train_distortion
