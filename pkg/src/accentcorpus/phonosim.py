"""Pronunciation similarity between IPA phone sequences and romanized text.

Both sides are reduced to a small inventory of coarse phone classes; the
score is one minus a normalized weighted edit distance. Used to break ties
between transliteration candidates and for audit reports.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .g2p import PhonemeSequence, parse_ipa

# Coarse class keys. "lr" merges liquids, "fv" the labiodental fricatives,
# "y" is the palatal glide (roman y / IPA j), "j" the voiced affricate.
CONSONANT_KEYS = (
    "p", "b", "t", "d", "k", "g", "ts", "ch", "j", "s", "z", "sh", "fv",
    "m", "n", "lr", "w", "y", "h",
)
VOWEL_KEYS = ("a", "e", "i", "o", "u", "ə")

# Groups sharing a reduced substitution cost: manner for consonants,
# backness for vowels.
KEY_GROUPS = {
    "stop": {"p", "b", "t", "d", "k", "g"},
    "affricate": {"ts", "ch", "j"},
    "fricative": {"s", "z", "sh", "fv", "h"},
    "nasal": {"m", "n"},
    "approximant": {"lr", "w", "y"},
    "back_vowel": {"a", "o", "u"},
    "front_vowel": {"i", "e"},
    "central_vowel": {"ə"},
}
_GROUP_OF = {key: name for name, keys in KEY_GROUPS.items() for key in keys}

# Vowels commonly inserted after word-final consonants by syllable-timed
# scripts; cheap to insert at the end of a sequence.
EPENTHETIC = frozenset(["u", "ə", "i"])

IPA_TO_KEY = {
    "p": "p", "b": "b", "t": "t", "d": "d", "k": "k", "ɡ": "g", "g": "g",
    "tʃ": "ch", "dʒ": "j", "f": "fv", "v": "fv", "θ": "t", "ð": "d",
    "s": "s", "z": "z", "ʃ": "sh", "ʒ": "sh", "h": "h",
    "m": "m", "n": "n", "ŋ": "n", "l": "lr", "ɹ": "lr", "r": "lr",
    "w": "w", "j": "y",
    "ɑ": "a", "æ": "a", "ʌ": "a", "aɪ": "a", "aʊ": "a",
    "ɛ": "e", "eɪ": "e", "ɪ": "i", "i": "i",
    "oʊ": "o", "ɔ": "o", "ɔɪ": "o", "ʊ": "u", "u": "u",
    "ə": "ə", "ɝ": "ə", "ɚ": "ə",
}

# Romanizer-output units, longest first. "ng" is read as the velar nasal,
# which matches Korean finals at the cost of rare Japanese n+g sequences.
ROMAN_UNITS = {
    "ts": "ts", "ch": "ch", "sh": "sh", "th": "t", "kh": "k", "gh": "g",
    "ph": "fv", "bh": "b", "dh": "d", "jh": "j", "ny": "n", "ng": "n",
    "rh": "lr",
    "eu": "ə", "eo": "ə", "ae": "a", "oe": "o",
    "p": "p", "b": "b", "t": "t", "d": "d", "k": "k", "g": "g", "q": "k",
    "f": "fv", "v": "fv", "s": "s", "z": "z", "h": "h", "m": "m", "n": "n",
    "l": "lr", "r": "lr", "w": "w", "y": "y", "j": "j",
    "a": "a", "e": "e", "i": "i", "o": "o", "u": "u",
}
_ROMAN_UNITS_ORDERED = sorted(ROMAN_UNITS, key=len, reverse=True)
_DOUBLED_LETTER = re.compile(r"([a-z])\1+")


@dataclass(frozen=True)
class PhoneKeySeq:
    keys: tuple[str, ...]

    def __post_init__(self):
        known = set(CONSONANT_KEYS) | set(VOWEL_KEYS)
        for key in self.keys:
            if key not in known:
                raise ValueError(f"unknown phone class {key!r}")

    def __len__(self) -> int:
        return len(self.keys)


def keys_from_ipa(seq: PhonemeSequence | str) -> PhoneKeySeq:
    """Map IPA phones to class keys; adjacent t+s merge into the ts class."""
    if isinstance(seq, str):
        seq = parse_ipa(seq)
    if not seq.phones:
        raise ValueError("empty phone sequence")
    keys: list[str] = []
    for phone in seq.phones:
        try:
            key = IPA_TO_KEY[phone]
        except KeyError:
            raise ValueError(f"unmapped IPA symbol {phone!r}") from None
        if key == "s" and keys and keys[-1] == "t":
            keys[-1] = "ts"
        else:
            keys.append(key)
    return PhoneKeySeq(tuple(keys))


def keys_from_roman(text: str) -> PhoneKeySeq:
    """Greedy longest-match tokenization of romanizer output.

    Doubled letters collapse first (gemination and long vowels carry no
    extra class information), then units map many-to-one onto classes.
    """
    collapsed = _DOUBLED_LETTER.sub(r"\1", text.lower())
    keys: list[str] = []
    i = 0
    while i < len(collapsed):
        ch = collapsed[i]
        if ch.isspace() or ch in ".,!?;:'\"-":
            i += 1
            continue
        for unit in _ROMAN_UNITS_ORDERED:
            if collapsed.startswith(unit, i):
                keys.append(ROMAN_UNITS[unit])
                i += len(unit)
                break
        else:
            raise ValueError(
                f"untokenizable residue {collapsed[i:]!r} in {text!r}"
            )
    return PhoneKeySeq(tuple(keys))


def _sub_cost(x: str, y: str, within_group: float) -> float:
    if x == y:
        return 0.0
    if _GROUP_OF[x] == _GROUP_OF[y]:
        return within_group
    return 1.0


def similarity(
    a: PhoneKeySeq,
    b: PhoneKeySeq,
    *,
    within_group_cost: float = 0.5,
    epenthesis_cost: float = 0.3,
) -> float:
    """1 − normalized weighted Levenshtein distance, in [0, 1].

    Substitutions inside one class group cost ``within_group_cost``;
    inserting or deleting a sequence-final epenthetic vowel costs
    ``epenthesis_cost``; everything else costs 1. Normalizer is
    max(len(a), len(b)); two empty sequences score 1 by convention.
    """
    ka, kb = a.keys, b.keys
    la, lb = len(ka), len(kb)
    if la == 0 and lb == 0:
        return 1.0

    def indel(keys: tuple[str, ...], idx: int) -> float:
        if idx == len(keys) - 1 and keys[idx] in EPENTHETIC:
            return epenthesis_cost
        return 1.0

    dist = [[0.0] * (lb + 1) for _ in range(la + 1)]
    for i in range(1, la + 1):
        dist[i][0] = dist[i - 1][0] + indel(ka, i - 1)
    for j in range(1, lb + 1):
        dist[0][j] = dist[0][j - 1] + indel(kb, j - 1)
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            dist[i][j] = min(
                dist[i - 1][j - 1] + _sub_cost(ka[i - 1], kb[j - 1],
                                               within_group_cost),
                dist[i - 1][j] + indel(ka, i - 1),
                dist[i][j - 1] + indel(kb, j - 1),
            )
    return 1.0 - dist[la][lb] / max(la, lb)


def ipa_roman_similarity(ipa: PhonemeSequence | str, roman: str) -> float:
    """Convenience wrapper scoring an IPA sequence against roman text."""
    return similarity(keys_from_ipa(ipa), keys_from_roman(roman))
