"""Full transliteration without network access.

The gateway content-addresses every request, so seeding its cache with known
responses makes the whole pipeline reproducible offline — the same mechanism
the test suite and any archived corpus rerun use.
"""
import json
import tempfile
from pathlib import Path

from accentcorpus import g2p, translit
from accentcorpus.gateway import Gateway, LlmRequest

lexicon = g2p.default_lexicon()
cache_dir = Path(tempfile.mkdtemp(prefix="translit-demo-"))
gateway = Gateway(cache_dir=cache_dir, mode="replay")
config = translit.TranslitConfig(lexicon=lexicon)

# A canned response in the JSON shape the prompt requests: three candidates
# per word plus a pronunciation-similarity ordering.
response = json.dumps({
    "Let's": {
        "phonemes": "lˈɛts",
        "choices": ["レツ", "レッツ", "レテス"],
        "similarity order": ["レッツ", "レツ", "レテス"],
    },
    "go": {
        "phonemes": "ɡˈoʊ",
        "choices": ["ゴー", "ゴウ", "ゴ"],
        "similarity order": ["ゴー", "ゴウ", "ゴ"],
    },
}, ensure_ascii=False)

words = [g2p.phonemize_word(lexicon, w) for w in ("Let's", "go")]
prompt = translit.build_prompt(words, "japanese")
for model_id, count in config.model_runs:
    for run_index in range(count):
        gateway.seed_llm(
            LlmRequest(model_id=model_id, prompt=prompt, params={},
                       run_index=run_index),
            response,
        )

sentence = translit.transliterate("Let's go", "japanese", gateway, config)
print(f"rendered: {sentence.rendered}")
print(f"network calls made: {gateway.network_calls}")

print("\nper-word vote scores (rank weights 3/2/1 over six runs):")
for token, ranking in sentence.provenance["scores"].items():
    print(f"  {token}:")
    for candidate, score in ranking:
        print(f"    {candidate:>6}  {score:.0f}")
