"""Accent-parallel speech corpus construction.

English text is transliterated word-by-word into a target script through a
language-model prompt, the result is synthesized by a multilingual TTS
provider conditioned on the transcription alone, and the resulting paired
corpus is evaluated with objective metrics plus a MUSHRA listening-test
harness.
"""

__version__ = "0.1.0"

from .corpus import (
    CorpusManifest, PairedUtterance, SpeakerRef, SplitAssignment,
    build_manifest, select_augmentation, split_transcripts,
)
from .evalkit import (
    EditResult, Embedding, aecs_diff, aggregate_probs, cer, cosine, wer,
)
from .g2p import (
    Lexicon, OOVError, PhonemeSequence, default_lexicon, load_lexicon,
    phonemize_sentence, phonemize_word,
)
from .gateway import Gateway, LlmEndpoint, LlmRequest, TtsEndpoint, TtsRequest
from .mushra import MushraResponse, MushraSession, MushraStats, MushraStore, compute_stats
from .phonosim import PhoneKeySeq, keys_from_ipa, keys_from_roman, similarity
from .romanize import (
    JamoTriple, compose_hangul, decompose_hangul, romanize_devanagari,
    romanize_hangul, romanize_katakana,
)
from .translit import (
    ArticleKey, TranslitChoice, TranslitConfig, TranslitRun, TranslitSentence,
    aggregate_candidates, assemble_sentence, build_prompt, parse_response,
    resolve_article, transliterate,
)
from .vq import Codebook, TokenSequence, dedup, fit_kmeans, quantize
