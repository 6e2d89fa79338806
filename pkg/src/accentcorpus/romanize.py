"""Deterministic romanizers for Hangul, katakana, and Devanagari.

These are letter-faithful transliterations (final ㄱ renders as "g", not the
sound-change "k"), kept ASCII so the output can feed edit-distance scoring.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

logger = logging.getLogger(__name__)

HANGUL_BASE = 0xAC00
HANGUL_LAST = 0xD7A3

# Revised-Romanization letter tables, indexed by jamo position.
INITIALS = [
    "g", "kk", "n", "d", "tt", "r", "m", "b", "pp", "s", "ss", "", "j",
    "jj", "ch", "k", "t", "p", "h",
]
MEDIALS = [
    "a", "ae", "ya", "yae", "eo", "e", "yeo", "ye", "o", "wa", "wae", "oe",
    "yo", "u", "wo", "we", "wi", "yu", "eu", "ui", "i",
]
FINALS = [
    "", "g", "kk", "gs", "n", "nj", "nh", "d", "l", "lg", "lm", "lb", "ls",
    "lt", "lp", "lh", "m", "b", "bs", "s", "ss", "ng", "j", "ch", "k", "t",
    "p", "h",
]


@dataclass(frozen=True)
class JamoTriple:
    """Initial/medial/final letter indices of a precomposed Hangul syllable."""

    initial: int
    medial: int
    final: int


def decompose_hangul(syllable: str) -> JamoTriple:
    """Split one precomposed syllable into its jamo indices."""
    if len(syllable) != 1:
        raise ValueError(f"expected a single codepoint, got {syllable!r}")
    code = ord(syllable)
    if not HANGUL_BASE <= code <= HANGUL_LAST:
        raise ValueError(f"not a precomposed Hangul syllable: {syllable!r}")
    offset = code - HANGUL_BASE
    initial = offset // (21 * 28)
    medial = (offset % (21 * 28)) // 28
    final = offset % 28
    return JamoTriple(initial, medial, final)


def compose_hangul(triple: JamoTriple) -> str:
    if not (0 <= triple.initial <= 18 and 0 <= triple.medial <= 20
            and 0 <= triple.final <= 27):
        raise ValueError(f"jamo indices out of range: {triple}")
    return chr(
        HANGUL_BASE + (triple.initial * 21 + triple.medial) * 28 + triple.final
    )


def romanize_hangul(text: str) -> str:
    """Letter-by-letter romanization; non-Hangul characters pass through."""
    out = []
    for ch in text:
        code = ord(ch)
        if HANGUL_BASE <= code <= HANGUL_LAST:
            triple = decompose_hangul(ch)
            out.append(INITIALS[triple.initial])
            out.append(MEDIALS[triple.medial])
            out.append(FINALS[triple.final])
        else:
            out.append(ch)
    return "".join(out)


# Hepburn-style katakana table. Two-character combinations (yoon and foreign
# extensions) must be matched before single kana.
KATAKANA_DIGRAPHS = {
    "キャ": "kya", "キュ": "kyu", "キョ": "kyo",
    "シャ": "sha", "シュ": "shu", "ショ": "sho", "シェ": "she",
    "チャ": "cha", "チュ": "chu", "チョ": "cho", "チェ": "che",
    "ニャ": "nya", "ニュ": "nyu", "ニョ": "nyo",
    "ヒャ": "hya", "ヒュ": "hyu", "ヒョ": "hyo",
    "ミャ": "mya", "ミュ": "myu", "ミョ": "myo",
    "リャ": "rya", "リュ": "ryu", "リョ": "ryo",
    "ギャ": "gya", "ギュ": "gyu", "ギョ": "gyo",
    "ジャ": "ja", "ジュ": "ju", "ジョ": "jo", "ジェ": "je",
    "ビャ": "bya", "ビュ": "byu", "ビョ": "byo",
    "ピャ": "pya", "ピュ": "pyu", "ピョ": "pyo",
    "ファ": "fa", "フィ": "fi", "フェ": "fe", "フォ": "fo", "フュ": "fyu",
    "ウィ": "wi", "ウェ": "we", "ウォ": "wo",
    "ティ": "ti", "トゥ": "tu", "テュ": "tyu",
    "ディ": "di", "ドゥ": "du", "デュ": "dyu",
    "ツァ": "tsa", "ツィ": "tsi", "ツェ": "tse", "ツォ": "tso",
    "ヴァ": "va", "ヴィ": "vi", "ヴェ": "ve", "ヴォ": "vo",
    "イェ": "ye", "クァ": "kwa", "グァ": "gwa",
}

KATAKANA_BASE = {
    "ア": "a", "イ": "i", "ウ": "u", "エ": "e", "オ": "o",
    "カ": "ka", "キ": "ki", "ク": "ku", "ケ": "ke", "コ": "ko",
    "ガ": "ga", "ギ": "gi", "グ": "gu", "ゲ": "ge", "ゴ": "go",
    "サ": "sa", "シ": "shi", "ス": "su", "セ": "se", "ソ": "so",
    "ザ": "za", "ジ": "ji", "ズ": "zu", "ゼ": "ze", "ゾ": "zo",
    "タ": "ta", "チ": "chi", "ツ": "tsu", "テ": "te", "ト": "to",
    "ダ": "da", "ヂ": "ji", "ヅ": "zu", "デ": "de", "ド": "do",
    "ナ": "na", "ニ": "ni", "ヌ": "nu", "ネ": "ne", "ノ": "no",
    "ハ": "ha", "ヒ": "hi", "フ": "fu", "ヘ": "he", "ホ": "ho",
    "バ": "ba", "ビ": "bi", "ブ": "bu", "ベ": "be", "ボ": "bo",
    "パ": "pa", "ピ": "pi", "プ": "pu", "ペ": "pe", "ポ": "po",
    "マ": "ma", "ミ": "mi", "ム": "mu", "メ": "me", "モ": "mo",
    "ヤ": "ya", "ユ": "yu", "ヨ": "yo",
    "ラ": "ra", "リ": "ri", "ル": "ru", "レ": "re", "ロ": "ro",
    "ワ": "wa", "ヲ": "o", "ン": "n", "ヴ": "vu",
    "ァ": "a", "ィ": "i", "ゥ": "u", "ェ": "e", "ォ": "o",
}

SOKUON = "ッ"
CHOON = "ー"
_VOWEL_LETTERS = "aeiou"


def romanize_katakana(text: str) -> str:
    """Hepburn-style romanization.

    ー doubles the previous vowel, ッ doubles the next consonant, ン is "n".
    Orphan ッ/ー (nothing to attach to) are reported and emitted as-is.
    """
    out: list[str] = []
    pending_sokuon = False
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == CHOON:
            if out and out[-1] and out[-1][-1] in _VOWEL_LETTERS:
                out.append(out[-1][-1])
            else:
                logger.warning("orphan %r at position %d", CHOON, i)
                out.append(CHOON)
            i += 1
            continue
        if ch == SOKUON:
            if pending_sokuon:
                logger.warning("orphan %r at position %d", SOKUON, i)
                out.append(SOKUON)
            pending_sokuon = True
            i += 1
            continue
        roman = None
        if i + 1 < len(text) and text[i:i + 2] in KATAKANA_DIGRAPHS:
            roman = KATAKANA_DIGRAPHS[text[i:i + 2]]
            i += 2
        elif ch in KATAKANA_BASE:
            roman = KATAKANA_BASE[ch]
            i += 1
        else:
            if pending_sokuon:
                logger.warning("orphan %r before %r", SOKUON, ch)
                out.append(SOKUON)
                pending_sokuon = False
            out.append(ch)
            i += 1
            continue
        if pending_sokuon:
            if roman[0] not in _VOWEL_LETTERS:
                roman = roman[0] + roman
            else:
                logger.warning("orphan %r before vowel kana", SOKUON)
                out.append(SOKUON)
            pending_sokuon = False
        out.append(roman)
    if pending_sokuon:
        logger.warning("orphan %r at end of string", SOKUON)
        out.append(SOKUON)
    return "".join(out)


# Devanagari tables: independent vowels, dependent matras, consonants.
DEVANAGARI_VOWELS = {
    "अ": "a", "आ": "aa", "इ": "i", "ई": "ii", "उ": "u", "ऊ": "uu",
    "ऋ": "ri", "ए": "e", "ऐ": "ai", "ओ": "o", "औ": "au",
    "ऍ": "e", "ऑ": "o",
}
DEVANAGARI_MATRAS = {
    "ा": "aa", "ि": "i", "ी": "ii", "ु": "u", "ू": "uu", "ृ": "ri",
    "े": "e", "ै": "ai", "ो": "o", "ौ": "au", "ॅ": "e", "ॉ": "o",
}
DEVANAGARI_CONSONANTS = {
    "क": "k", "ख": "kh", "ग": "g", "घ": "gh", "ङ": "ng",
    "च": "ch", "छ": "chh", "ज": "j", "झ": "jh", "ञ": "ny",
    "ट": "t", "ठ": "th", "ड": "d", "ढ": "dh", "ण": "n",
    "त": "t", "थ": "th", "द": "d", "ध": "dh", "न": "n",
    "प": "p", "फ": "ph", "ब": "b", "भ": "bh", "म": "m",
    "य": "y", "र": "r", "ल": "l", "व": "v",
    "श": "sh", "ष": "sh", "स": "s", "ह": "h",
    "क़": "q", "ख़": "kh", "ग़": "g", "ज़": "z", "ड़": "r", "ढ़": "rh",
    "फ़": "f", "ळ": "l",
}
VIRAMA = "्"
ANUSVARA = "ं"
CANDRABINDU = "ँ"
VISARGA = "ः"


def romanize_devanagari(text: str) -> str:
    """Romanize with the inherent vowel rendered unless a virama or matra
    follows; anusvara becomes "m". Unmapped codepoints are reported and
    emitted as-is."""
    out: list[str] = []
    pending_a = False

    def flush():
        nonlocal pending_a
        if pending_a:
            out.append("a")
            pending_a = False

    for i, ch in enumerate(text):
        if ch in DEVANAGARI_CONSONANTS:
            flush()
            out.append(DEVANAGARI_CONSONANTS[ch])
            pending_a = True
        elif ch in DEVANAGARI_MATRAS:
            pending_a = False
            out.append(DEVANAGARI_MATRAS[ch])
        elif ch == VIRAMA:
            pending_a = False
        elif ch in DEVANAGARI_VOWELS:
            flush()
            out.append(DEVANAGARI_VOWELS[ch])
        elif ch in (ANUSVARA, CANDRABINDU):
            flush()
            out.append("m")
        elif ch == VISARGA:
            flush()
            out.append("h")
        else:
            flush()
            if "ऀ" <= ch <= "ॿ":
                logger.warning("unmapped Devanagari codepoint %r at %d", ch, i)
            out.append(ch)
    flush()
    return "".join(out)


ROMANIZERS = {
    "ko": romanize_hangul,
    "ja": romanize_katakana,
    "hi": romanize_devanagari,
}


def romanize(script: str, text: str) -> str:
    """Dispatch by script id ("ko", "ja", "hi")."""
    try:
        fn = ROMANIZERS[script]
    except KeyError:
        raise ValueError(f"unknown script {script!r}; expected ko, ja, or hi")
    return fn(text)
