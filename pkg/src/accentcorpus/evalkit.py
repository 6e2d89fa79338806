"""Objective metrics over ingested artifacts: WER/CER, cosine similarity,
speaker/accent embedding scores, and classification-probability pooling.

ASR hypotheses, embeddings, and probabilities are read from sidecar files;
running the underlying models is out of scope here.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Word-internal apostrophes survive normalization so that contractions count
# as distinct tokens ("let's" vs "lets" is a substitution).
_PUNCT_RE = re.compile(r"[^\w\s']", re.UNICODE)
_WS_RE = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Lowercase, strip punctuation (keeping apostrophes), collapse spaces."""
    text = _PUNCT_RE.sub(" ", text.lower())
    return _WS_RE.sub(" ", text).strip()


@dataclass
class EditResult:
    """Levenshtein alignment counts against a reference of length ref_len."""

    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    @property
    def edits(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self) -> float:
        return self.edits / self.ref_len

    @property
    def counts(self) -> tuple[int, int, int, int]:
        return (self.substitutions, self.deletions, self.insertions,
                self.ref_len)


def _align(ref: list, hyp: list) -> EditResult:
    """DP alignment with a deterministic backtrace (diagonal, then deletion,
    then insertion on ties)."""
    nr, nh = len(ref), len(hyp)
    dist = np.zeros((nr + 1, nh + 1), dtype=np.int64)
    dist[:, 0] = np.arange(nr + 1)
    dist[0, :] = np.arange(nh + 1)
    for i in range(1, nr + 1):
        for j in range(1, nh + 1):
            sub = dist[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1])
            dele = dist[i - 1, j] + 1
            ins = dist[i, j - 1] + 1
            dist[i, j] = min(sub, dele, ins)

    subs = deles = inss = 0
    i, j = nr, nh
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i, j] == dist[i - 1, j - 1] + (
            ref[i - 1] != hyp[j - 1]
        ):
            subs += ref[i - 1] != hyp[j - 1]
            i -= 1
            j -= 1
        elif i > 0 and dist[i, j] == dist[i - 1, j] + 1:
            deles += 1
            i -= 1
        else:
            inss += 1
            j -= 1
    return EditResult(substitutions=int(subs), deletions=deles,
                      insertions=inss, ref_len=nr)


def wer(ref: str, hyp: str) -> EditResult:
    """Token-level edit rate; raises on an empty reference."""
    ref_tokens = normalize_text(ref).split()
    hyp_tokens = normalize_text(hyp).split()
    if not ref_tokens:
        raise ValueError("empty reference after normalization")
    return _align(ref_tokens, hyp_tokens)


def cer(ref: str, hyp: str) -> EditResult:
    """Character-level edit rate on normalized text, spaces kept."""
    ref_chars = list(normalize_text(ref))
    hyp_chars = list(normalize_text(hyp))
    if not ref_chars:
        raise ValueError("empty reference after normalization")
    return _align(ref_chars, hyp_chars)


def pooled_rate(results: list[EditResult]) -> float:
    """Corpus-level rate: total edits over total reference length."""
    total_ref = sum(r.ref_len for r in results)
    if total_ref == 0:
        raise ValueError("no reference tokens to pool")
    return sum(r.edits for r in results) / total_ref


@dataclass
class Embedding:
    vec: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        self.vec = np.asarray(self.vec, dtype=np.float64)
        if self.vec.ndim != 1:
            raise ValueError(f"embedding must be 1-d, got {self.vec.shape}")
        if not np.all(np.isfinite(self.vec)):
            raise ValueError(f"non-finite embedding {self.source_id!r}")


def cosine(a: Embedding, b: Embedding) -> float:
    na = np.linalg.norm(a.vec)
    nb = np.linalg.norm(b.vec)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for a zero vector")
    return float(np.dot(a.vec, b.vec) / (na * nb))


def aecs_diff(conv: Embedding, accented: Embedding,
              native: Embedding) -> float:
    """cosine(conv, accented) − cosine(conv, native); higher means the
    converted audio sits closer to the accented reference."""
    return cosine(conv, accented) - cosine(conv, native)


def aggregate_probs(probs: list[float]) -> float:
    if not probs:
        raise ValueError("empty probability list")
    arr = np.asarray(probs, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    return float(arr.mean())


def load_embedding_sidecar(path: str | Path) -> dict[str, Embedding]:
    """One record per line: ``utt_id<TAB>float,float,...``."""
    out: dict[str, Embedding] = {}
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            utt_id, values = line.split("\t", 1)
            vec = np.array([float(v) for v in values.split(",")])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad embedding line") from exc
        out[utt_id] = Embedding(vec=vec, source_id=utt_id)
    return out


def load_prob_sidecar(path: str | Path) -> dict[str, float]:
    """One record per line: ``utt_id<TAB>probability``."""
    out: dict[str, float] = {}
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            utt_id, value = line.split("\t", 1)
            out[utt_id] = float(value)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad probability line") from exc
    return out


def load_hyp_sidecar(path: str | Path) -> dict[str, str]:
    """One record per line: ``utt_id<TAB>hypothesis text``."""
    out: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        utt_id, _, text = line.partition("\t")
        out[utt_id] = text
    return out


def evaluate_corpus(
    refs: dict[str, str],
    hyps: dict[str, str],
    probs: dict[str, float] | None = None,
) -> dict:
    """Per-utterance WER/CER rows plus corpus aggregates.

    WER/CER aggregates are reported both pooled (total edits / total
    reference length) and as the mean of per-utterance rates; probabilities
    pool by mean.
    """
    rows = []
    wer_results, cer_results = [], []
    for utt_id in sorted(refs):
        if utt_id not in hyps:
            rows.append({"utt_id": utt_id, "error": "missing hypothesis"})
            continue
        w = wer(refs[utt_id], hyps[utt_id])
        c = cer(refs[utt_id], hyps[utt_id])
        wer_results.append(w)
        cer_results.append(c)
        row = {
            "utt_id": utt_id,
            "wer": w.rate,
            "wer_counts": w.counts,
            "cer": c.rate,
        }
        if probs and utt_id in probs:
            row["prob"] = probs[utt_id]
        rows.append(row)
    if not wer_results:
        raise ValueError("no scorable utterances")
    aggregate = {
        "wer_pooled": pooled_rate(wer_results),
        "wer_mean": float(np.mean([r.rate for r in wer_results])),
        "cer_pooled": pooled_rate(cer_results),
        "cer_mean": float(np.mean([r.rate for r in cer_results])),
        "n_utterances": len(wer_results),
    }
    if probs:
        scored = [probs[u] for u in sorted(refs) if u in probs]
        if scored:
            aggregate["prob_mean"] = aggregate_probs(scored)
    return {"rows": rows, "aggregate": aggregate}
