"""Dictionary-based grapheme-to-phoneme conversion.

Parses a pronunciation lexicon in the common dictionary line format
(``WORD  PH PH PH``, ``;;;`` comments, ``WORD(2)`` variant suffixes) and
converts ARPAbet phone sequences to stress-marked IPA strings suitable for
prompt construction.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

# The 39-phone ARPAbet inventory mapped to IPA. Unstressed AH is refined to
# schwa after the stress digit is read, see _to_ipa().
ARPABET_TO_IPA = {
    "AA": "ɑ", "AE": "æ", "AH": "ʌ", "AO": "ɔ", "AW": "aʊ", "AY": "aɪ",
    "EH": "ɛ", "ER": "ɝ", "EY": "eɪ", "IH": "ɪ", "IY": "i", "OW": "oʊ",
    "OY": "ɔɪ", "UH": "ʊ", "UW": "u",
    "B": "b", "CH": "tʃ", "D": "d", "DH": "ð", "F": "f", "G": "ɡ",
    "HH": "h", "JH": "dʒ", "K": "k", "L": "l", "M": "m", "N": "n",
    "NG": "ŋ", "P": "p", "R": "ɹ", "S": "s", "SH": "ʃ", "T": "t",
    "TH": "θ", "V": "v", "W": "w", "Y": "j", "Z": "z", "ZH": "ʒ",
}

ARPABET_VOWELS = frozenset(
    ["AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY",
     "OW", "OY", "UH", "UW"]
)

STRESS_MARK = "ˈ"

# IPA symbols that can appear in a rendered sequence; longest-first for the
# greedy tokenizer used by parse_ipa().
_IPA_INVENTORY = sorted(
    set(ARPABET_TO_IPA.values()) | {"ə"}, key=len, reverse=True
)
_IPA_VOWELS = frozenset(ARPABET_TO_IPA[v] for v in ARPABET_VOWELS) | {"ə"}

_VARIANT_RE = re.compile(r"^(.*)\((\d+)\)$")
_TERMINAL_PUNCT = ".!?"
_STRIP_PUNCT = ".,!?;:\"()[]"


class LexiconError(ValueError):
    """Raised for unreadable or empty lexicon files."""


class OOVError(KeyError):
    """Raised when a word has no lexicon entry. Carries the token."""

    def __init__(self, token: str):
        super().__init__(token)
        self.token = token

    def __str__(self) -> str:
        return f"out-of-vocabulary word: {self.token!r}"


@dataclass
class Lexicon:
    """Pronunciation dictionary with per-word variant lists.

    Keys are normalized (lowercased, apostrophes preserved); values are lists
    of ARPAbet phone sequences, first-listed variant first.
    """

    entries: dict[str, list[list[str]]]
    alphabet_id: str = "arpabet"
    issues: list[tuple[int, str]] = field(default_factory=list)

    def lookup(self, word: str) -> list[list[str]]:
        key = normalize_word(word)
        if key not in self.entries:
            raise OOVError(word)
        return self.entries[key]

    def __contains__(self, word: str) -> bool:
        return normalize_word(word) in self.entries

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class PhonemeSequence:
    """A word with its IPA phones and the primary-stress position."""

    word: str
    phones: list[str]
    stress_index: int | None = None

    def __post_init__(self):
        if not self.phones:
            raise ValueError(f"empty phone sequence for {self.word!r}")
        if self.stress_index is not None:
            if not 0 <= self.stress_index < len(self.phones):
                raise ValueError(
                    f"stress index {self.stress_index} out of range for "
                    f"{self.phones}"
                )
            if self.phones[self.stress_index] not in _IPA_VOWELS:
                raise ValueError(
                    f"stress index {self.stress_index} does not point at a "
                    f"vowel in {self.phones}"
                )

    def render(self) -> str:
        """IPA string with ˈ immediately before the stressed vowel."""
        parts = []
        for i, phone in enumerate(self.phones):
            if i == self.stress_index:
                parts.append(STRESS_MARK)
            parts.append(phone)
        return "".join(parts)

    def starts_with_vowel(self) -> bool:
        return self.phones[0] in _IPA_VOWELS


def normalize_word(word: str) -> str:
    """Lowercase and strip surrounding punctuation, keeping apostrophes."""
    return word.strip(_STRIP_PUNCT + " ").lower()


def is_vowel(ipa_phone: str) -> bool:
    return ipa_phone in _IPA_VOWELS


def _to_ipa(arpabet_phones: list[str]) -> tuple[list[str], int | None]:
    """Convert one ARPAbet pronunciation to IPA phones + stress index.

    Only primary stress (digit 1) is kept; AH with stress digit 0 becomes
    schwa.
    """
    phones: list[str] = []
    stress_index = None
    for symbol in arpabet_phones:
        base = symbol.rstrip("012")
        digit = symbol[len(base):]
        if base == "AH" and digit == "0":
            ipa = "ə"
        else:
            ipa = ARPABET_TO_IPA[base]
        if digit == "1":
            stress_index = len(phones)
        phones.append(ipa)
    return phones, stress_index


def _valid_phone(symbol: str) -> bool:
    base = symbol.rstrip("012")
    if base not in ARPABET_TO_IPA:
        return False
    digit = symbol[len(base):]
    return digit == "" or (base in ARPABET_VOWELS and digit in "012")


def load_lexicon(path: str | Path, format: str = "cmudict") -> Lexicon:
    """Parse a dictionary-format lexicon file.

    Malformed lines (too few fields, unknown phone symbols) are recorded in
    ``Lexicon.issues`` with their line numbers and skipped.
    """
    if format != "cmudict":
        raise LexiconError(f"unknown lexicon format: {format!r}")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        raise LexiconError(f"cannot read lexicon {path}: {exc}") from exc

    entries: dict[str, list[list[str]]] = {}
    issues: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith(";;;"):
            continue
        fields = line.split()
        if len(fields) < 2:
            issues.append((lineno, f"expected WORD PHONES, got {line!r}"))
            continue
        head, phones = fields[0], fields[1:]
        match = _VARIANT_RE.match(head)
        if match:
            head = match.group(1)
        bad = [p for p in phones if not _valid_phone(p)]
        if bad:
            issues.append((lineno, f"unknown phone symbol(s) {bad} in {line!r}"))
            continue
        word = head.lower()
        if not word:
            issues.append((lineno, f"empty word in {line!r}"))
            continue
        entries.setdefault(word, []).append(phones)

    if not entries:
        raise LexiconError(f"zero valid entries in lexicon {path}")
    return Lexicon(entries=entries, issues=issues)


def default_lexicon() -> Lexicon:
    """Load the small dictionary bundled with the package."""
    from importlib.resources import files

    path = files("accentcorpus.assets").joinpath("lexicon_small.dict")
    return load_lexicon(str(path))


def phonemize_word(lexicon: Lexicon, word: str) -> PhonemeSequence:
    """Convert a word to its IPA phone sequence, first-listed variant."""
    if not normalize_word(word):
        raise ValueError("word empty after normalization")
    variants = lexicon.lookup(word)
    phones, stress_index = _to_ipa(variants[0])
    return PhonemeSequence(word=word, phones=phones, stress_index=stress_index)


@dataclass
class PhonemizedToken:
    """One sentence token: surface form, phonemes (None if OOV), trailing
    punctuation stripped off the token."""

    token: str
    seq: PhonemeSequence | None
    trailing: str = ""


def phonemize_sentence(lexicon: Lexicon, text: str) -> list[PhonemizedToken]:
    """Phonemize each whitespace-separated word of a sentence.

    Trailing sentence punctuation is stripped from each token and recorded in
    ``trailing``. Per-token OOV failures leave ``seq`` as None; only a
    sentence with no phonemizable token at all raises.
    """
    if not text.strip():
        raise ValueError("empty sentence")
    items: list[PhonemizedToken] = []
    for raw in text.split():
        token = raw.rstrip(_STRIP_PUNCT)
        trailing = raw[len(token):]
        if not token:
            continue
        try:
            seq = phonemize_word(lexicon, token)
        except OOVError:
            seq = None
        items.append(PhonemizedToken(token=token, seq=seq, trailing=trailing))
    if not items:
        raise ValueError(f"no words in sentence {text!r}")
    if all(item.seq is None for item in items):
        oov = [item.token for item in items]
        raise OOVError(", ".join(oov))
    return items


def parse_ipa(rendered: str) -> PhonemeSequence:
    """Inverse of PhonemeSequence.render() for round-trip checks."""
    phones: list[str] = []
    stress_index = None
    i = 0
    pending_stress = False
    while i < len(rendered):
        if rendered[i] == STRESS_MARK:
            pending_stress = True
            i += 1
            continue
        for symbol in _IPA_INVENTORY:
            if rendered.startswith(symbol, i):
                if pending_stress:
                    stress_index = len(phones)
                    pending_stress = False
                phones.append(symbol)
                i += len(symbol)
                break
        else:
            raise ValueError(f"unrecognized IPA at {rendered[i:]!r}")
    return PhonemeSequence(word=rendered, phones=phones, stress_index=stress_index)
