"""From English text to a transliteration prompt.

Walks the first pipeline stage: look up each word in the pronunciation
dictionary, render stress-marked IPA, and instantiate the word-level
transliteration prompt for a target language.
"""
from accentcorpus import g2p, translit

lexicon = g2p.default_lexicon()
print(f"lexicon entries: {len(lexicon)}")

sentence = "Let's go"
items = g2p.phonemize_sentence(lexicon, sentence)
print(f"\nphonemes for {sentence!r}:")
for item in items:
    print(f"  {item.token:>8} -> {item.seq.render()}")

words = [item.seq for item in items]
prompt = translit.build_prompt(words, "japanese")
print("\n--- prompt sent to the language model " + "-" * 30)
print(prompt)
print("-" * 68)

# The same template serves every supported language; only the language name
# and the in-paragraph example change.
for language in ("korean", "hindi", "mandarin"):
    first_line = translit.build_prompt(words, language).splitlines()[0]
    print(f"\n{language}: {first_line[:72]}...")
