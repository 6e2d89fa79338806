"""Objective evaluation: WER/CER, speaker similarity, accent alignment.

Hypotheses and embeddings normally arrive as sidecar files produced by
external recognizers and classifiers; here they are synthesized inline.
"""
import numpy as np

from accentcorpus import evalkit
from accentcorpus.evalkit import Embedding

print("word error rate against ASR hypotheses:")
pairs = [
    ("let's go", "let's go"),
    ("let's go", "lets go home"),
    ("please call stella", "please call stella"),
    ("ask her to bring these things", "ask her to bring this thing"),
]
results = []
for ref, hyp in pairs:
    result = evalkit.wer(ref, hyp)
    results.append(result)
    s, d, i, n = result.counts
    print(f"  {ref!r:>35} vs {hyp!r:<28} "
          f"WER={result.rate:.2f} (S={s} D={d} I={i} N={n})")
print(f"pooled WER: {evalkit.pooled_rate(results):.3f} "
      f"(total edits over total reference words)")
print(f"mean WER:   {np.mean([r.rate for r in results]):.3f}")

print("\ncharacter error rate is the same alignment over characters:")
print(f"  abc vs abd -> {evalkit.cer('abc', 'abd').rate:.3f}")

rng = np.random.default_rng(1)
speaker = Embedding(rng.normal(size=192), "slt")
converted = Embedding(speaker.vec + rng.normal(scale=0.3, size=192), "conv")
print(f"\nspeaker similarity (SECS): "
      f"{evalkit.cosine(converted, speaker):.3f}")

accented = Embedding(rng.normal(size=64), "hindi-ref")
native = Embedding(rng.normal(size=64), "american-ref")
drifted = Embedding(0.8 * accented.vec + 0.2 * rng.normal(size=64), "conv")
diff = evalkit.aecs_diff(drifted, accented, native)
print(f"accent alignment (AECS difference): {diff:.3f} "
      f"(positive: closer to the accented reference)")

probs = [0.84, 0.79, 0.83, 0.82]
print(f"\naccent classification probability, pooled: "
      f"{evalkit.aggregate_probs(probs):.3f}")
