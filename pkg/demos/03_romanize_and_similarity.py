"""Romanization and pronunciation-similarity scoring.

The romanizers turn target-script candidates into ASCII so they can be
compared against the source word's phonemes with a weighted edit distance;
the pipeline uses that score to break ties between equally voted candidates.
"""
from accentcorpus import phonosim, romanize

samples = [
    ("ko", "액센트"),
    ("ja", "アクセント"),
    ("hi", "अक्सेंट्"),
]
print("romanizations of three transliterations of 'accent':")
for script, text in samples:
    print(f"  {script}  {text:　<6} -> {romanize.romanize(script, text)}")

print("\nHangul syllables decompose arithmetically:")
for syllable in "액센트":
    triple = romanize.decompose_hangul(syllable)
    print(f"  {syllable} -> initial={triple.initial} "
          f"medial={triple.medial} final={triple.final}")

print("\nsimilarity of each romanization to the IPA of 'accent' (ˈæksɛnt):")
accent_keys = phonosim.keys_from_ipa("ˈæksɛnt")
for script, text in samples:
    roman = romanize.romanize(script, text)
    score = phonosim.similarity(accent_keys, phonosim.keys_from_roman(roman))
    print(f"  {roman:>10}: {score:.3f}")

print("\nscoring candidate romanizations against 'go' (ɡˈoʊ):")
go = phonosim.keys_from_ipa("ɡˈoʊ")
for roman in ("goo", "gou", "go", "ga"):
    score = phonosim.similarity(go, phonosim.keys_from_roman(roman))
    print(f"  {roman:>4}: {score:.3f}")
