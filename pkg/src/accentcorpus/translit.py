"""Word-level transliteration of English sentences into a target script.

The prompt asks a language model for three target-script candidates per word
plus a pronunciation-similarity ordering; several runs are aggregated by
rank-weighted voting and the winners are joined back into a sentence with the
source punctuation. Articles are resolved separately because their
pronunciation depends on the following word.
"""
from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from importlib.resources import files
from pathlib import Path
from typing import Mapping, Sequence

from . import phonosim, romanize
from .g2p import Lexicon, PhonemeSequence, default_lexicon, normalize_word, phonemize_sentence

LANGUAGES = {
    "hindi": "Hindi",
    "japanese": "Japanese",
    "korean": "Korean",
    "mandarin": "Mandarin",
}
_LANGUAGE_ALIASES = {
    "hi": "hindi", "ja": "japanese", "jp": "japanese", "ko": "korean",
    "kr": "korean", "zh": "mandarin", "cmn": "mandarin",
}

SCRIPT_RANGES = {
    "hindi": ((0x0900, 0x097F),),
    "japanese": ((0x30A0, 0x30FF),),
    "korean": ((0xAC00, 0xD7A3),),
    "mandarin": ((0x4E00, 0x9FFF), (0x3400, 0x4DBF)),
}

ROMANIZER_FOR = {
    "hindi": romanize.romanize_devanagari,
    "japanese": romanize.romanize_katakana,
    "korean": romanize.romanize_hangul,
}

DEFAULT_RUN_PLAN = (("gpt-3.5-turbo", 3), ("gpt-4o", 3))
DEFAULT_WEIGHTS = (3, 2, 1)

ARTICLES = frozenset(["a", "an", "the"])

_TERMINALS = ".!?"


class TranslitError(ValueError):
    """Transliteration could not produce a complete sentence."""


class TranslitParseError(TranslitError):
    """A model response did not contain a usable JSON object."""


def canonical_language(language: str) -> str:
    key = language.strip().lower()
    key = _LANGUAGE_ALIASES.get(key, key)
    if key not in LANGUAGES:
        raise TranslitError(
            f"unsupported language {language!r}; expected one of "
            f"{sorted(LANGUAGES)}"
        )
    return key


@dataclass
class TranslitChoice:
    """One word's candidates from a single model run."""

    word: str
    phonemes: str
    choices: list[str]
    similarity_order: list[str]


@dataclass
class TranslitRun:
    """Parsed candidates of one model run over a prompt."""

    model_id: str
    run_index: int
    per_word: dict[str, TranslitChoice]
    raw: str
    problems: dict[str, str] = field(default_factory=dict)


@dataclass
class TranslitSentence:
    """The assembled sentence handed to the TTS provider."""

    language: str
    tokens: list[str]
    rendered: str
    provenance: dict = field(default_factory=dict)


class ArticleKey(Enum):
    THE_V = "THE_V"
    THE_C = "THE_C"
    A = "A"
    AN = "AN"


_ARTICLE_PHONES = {
    ArticleKey.THE_V: ("the", ["ð", "i"]),
    ArticleKey.THE_C: ("the", ["ð", "ə"]),
    ArticleKey.A: ("a", ["ə"]),
    ArticleKey.AN: ("an", ["æ", "n"]),
}


def article_phonemes(key: ArticleKey) -> PhonemeSequence:
    word, phones = _ARTICLE_PHONES[key]
    return PhonemeSequence(word=word, phones=list(phones))


def resolve_article(article: str, next_seq: PhonemeSequence) -> ArticleKey:
    """Pick the article pronunciation from the next word's first phone."""
    word = normalize_word(article)
    vowel_next = next_seq.starts_with_vowel()
    if word == "the":
        return ArticleKey.THE_V if vowel_next else ArticleKey.THE_C
    if word in ("a", "an"):
        return ArticleKey.AN if vowel_next else ArticleKey.A
    raise TranslitError(f"not an article: {article!r}")


def _asset_text(name: str) -> str:
    return files("accentcorpus.assets").joinpath(name).read_text(encoding="utf-8")


def default_few_shots() -> str:
    return _asset_text("few_shots_hindi.txt").rstrip("\n")


def _prompt_example(language_key: str) -> dict:
    table = json.loads(_asset_text("prompt_examples.json"))
    return table[language_key]


_INSTRUCTION = (
    "Can you provide me with three {lang} words to represent the phoneme "
    "sequences delimited by triple backticks. For example, in {lang}, "
    '"{ex_word} ({ex_ipa})" is expected to have {lang} representation of '
    '"{ex_translit}"; where "ˈ" in phonemes represents the stress point of '
    "the word. Here, your task is to provide me with three {lang} words "
    "that can replace the phoneme senquences, delimited by triple backticks. "
    "Please focus on phonetically similar characters instead of similar "
    "characters in terms of the meaning. The expected output should be in "
    "JSON format. You can first list three possible choices of the words "
    "and then re-order them in order of the similarity of the pronunciation."
)


def build_prompt(
    words: Sequence[PhonemeSequence],
    language: str,
    few_shots: str | None = None,
) -> str:
    """Byte-deterministic prompt for one sentence's words."""
    if not words:
        raise TranslitError("empty word list")
    lang_key = canonical_language(language)
    lang = LANGUAGES[lang_key]
    example = _prompt_example(lang_key)
    if few_shots is None:
        few_shots = default_few_shots()

    lines = [
        _INSTRUCTION.format(
            lang=lang,
            ex_word=example["word"],
            ex_ipa=example["ipa"],
            ex_translit=example["transliteration"],
        ),
        "The following is the example in Hindi language.",
        few_shots,
        "```",
    ]
    for seq in words:
        lines.append(f"{seq.word}: {seq.render()}")
    lines.append("```")
    lines.append(
        "Again, the responses should be in a JSON format and sort them in "
        "order of the similarity to each phoneme sequence."
    )
    lines.append("{")
    for seq in words:
        lines.append(f'  "{seq.word}": {{')
        lines.append(f'"phonemes": "{seq.render()}",')
        lines.append(
            f'"choices": [`1st choices of {lang} characters`, '
            f"`2nd choices of {lang} characters`, "
            f"`3rd choices of {lang} characters`],"
        )
        lines.append(
            f'"similarity order": [`1st most similar {lang} characters`, '
            f"`2nd most similar {lang} characters`, "
            f"`3rd most similar {lang} characters`],"
        )
        lines.append("},")
    lines.append("}")
    return "\n".join(lines)


_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)
_TRAILING_COMMA_RE = re.compile(r",(\s*[}\]])")


def _try_load(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        return json.loads(_TRAILING_COMMA_RE.sub(r"\1", text))
    except json.JSONDecodeError:
        return None


def _balanced_objects(text: str):
    """Yield substrings spanning balanced top-level {...} groups."""
    depth = 0
    start = None
    in_string = False
    escape = False
    for i, ch in enumerate(text):
        if in_string:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}":
            if depth > 0:
                depth -= 1
                if depth == 0 and start is not None:
                    yield text[start:i + 1]
                    start = None


def _extract_json(raw: str) -> dict:
    candidates = [raw.strip()]
    candidates.extend(m.strip() for m in _FENCE_RE.findall(raw))
    candidates.extend(_balanced_objects(raw))
    for cand in candidates:
        obj = _try_load(cand)
        if isinstance(obj, dict):
            return obj
    raise TranslitParseError("no parsable object in response")


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s.strip())


def _in_script(text: str, language_key: str) -> bool:
    ranges = SCRIPT_RANGES[language_key]
    return bool(text) and all(
        any(lo <= ord(ch) <= hi for lo, hi in ranges) for ch in text
    )


def parse_response(
    raw: str,
    expected_words: Sequence[str],
    language: str | None = None,
    model_id: str = "",
    run_index: int = 0,
) -> TranslitRun:
    """Extract and validate one run's per-word candidates.

    Individual bad words are recorded in ``problems`` and skipped; the run is
    only rejected when no word validates.
    """
    if not raw.strip():
        raise TranslitParseError("empty response")
    obj = _extract_json(raw)
    lang_key = canonical_language(language) if language else None

    lookup = {}
    for key, value in obj.items():
        lookup[_nfc(key)] = value
        lookup.setdefault(_nfc(key).lower(), value)

    per_word: dict[str, TranslitChoice] = {}
    problems: dict[str, str] = {}
    for word in expected_words:
        entry = lookup.get(_nfc(word), lookup.get(_nfc(word).lower()))
        if entry is None:
            problems[word] = "missing"
            continue
        if not isinstance(entry, dict):
            problems[word] = "entry is not an object"
            continue
        choices = entry.get("choices")
        order = entry.get("similarity order", entry.get("similarity_order"))
        if not (isinstance(choices, list) and len(choices) == 3
                and all(isinstance(c, str) for c in choices)):
            problems[word] = "choices is not a list of 3 strings"
            continue
        if not (isinstance(order, list) and len(order) == 3
                and all(isinstance(c, str) for c in order)):
            problems[word] = "similarity order is not a list of 3 strings"
            continue
        choices = [_nfc(c) for c in choices]
        order = [_nfc(c) for c in order]
        if sorted(order) != sorted(choices):
            problems[word] = "similarity order is not a permutation of choices"
            continue
        if lang_key is not None:
            bad = [c for c in order if not _in_script(c, lang_key)]
            if bad:
                problems[word] = f"candidates outside {lang_key} script: {bad}"
                continue
        per_word[word] = TranslitChoice(
            word=word,
            phonemes=str(entry.get("phonemes", "")),
            choices=choices,
            similarity_order=order,
        )
    if not per_word:
        raise TranslitParseError(
            f"no valid word entries in response (problems: {problems})"
        )
    return TranslitRun(
        model_id=model_id, run_index=run_index, per_word=per_word,
        raw=raw, problems=problems,
    )


def _candidate_similarity(
    candidate: str, seq: PhonemeSequence | None, language_key: str
) -> float:
    romanizer = ROMANIZER_FOR.get(language_key)
    if seq is None or romanizer is None:
        return 0.0
    try:
        roman = romanizer(candidate)
        return phonosim.similarity(
            phonosim.keys_from_ipa(seq), phonosim.keys_from_roman(roman)
        )
    except ValueError:
        return 0.0


def aggregate_candidates(
    runs: Sequence[TranslitRun],
    weights: Sequence[float] = DEFAULT_WEIGHTS,
    *,
    expected_tokens: Sequence[str] | None = None,
    phoneme_seqs: Mapping[str, PhonemeSequence] | None = None,
    language: str | None = None,
) -> dict[str, list[tuple[str, float]]]:
    """Rank-weighted voting over the runs' similarity orders.

    Candidates are merged after Unicode NFC normalization. Ties break by raw
    frequency across runs, then pronunciation similarity against the word's
    phonemes (when available), then code-point order.
    """
    if not runs:
        raise TranslitError("no runs to aggregate")
    weights = tuple(float(w) for w in weights)
    if len(weights) != 3 or any(w <= 0 for w in weights) or not (
        weights[0] > weights[1] > weights[2]
    ):
        raise TranslitError(
            f"weights must be a strictly decreasing positive triple, got {weights}"
        )
    lang_key = canonical_language(language) if language else None

    tokens: list[str] = []
    if expected_tokens is not None:
        tokens = list(expected_tokens)
    else:
        for run in runs:
            for token in run.per_word:
                if token not in tokens:
                    tokens.append(token)

    result: dict[str, list[tuple[str, float]]] = {}
    for token in tokens:
        scores: dict[str, float] = {}
        freq: dict[str, int] = {}
        for run in runs:
            choice = run.per_word.get(token)
            if choice is None:
                continue
            for rank, cand in enumerate(choice.similarity_order):
                cand = _nfc(cand)
                scores[cand] = scores.get(cand, 0.0) + weights[rank]
                freq[cand] = freq.get(cand, 0) + 1
        if not scores:
            raise TranslitError(f"token {token!r} present in zero runs")
        seq = phoneme_seqs.get(token) if phoneme_seqs else None
        sims = {
            cand: (_candidate_similarity(cand, seq, lang_key)
                   if lang_key else 0.0)
            for cand in scores
        }
        ranked = sorted(
            scores.items(),
            key=lambda kv: (-kv[1], -freq[kv[0]], -sims[kv[0]], kv[0]),
        )
        result[token] = ranked
    return result


def _split_tokens(source: str) -> list[tuple[str, str]]:
    """(token, trailing punctuation) pairs for each whitespace word."""
    pairs = []
    for raw in source.split():
        token = raw.rstrip(".,!?;:\"")
        if not token:
            continue
        pairs.append((token, raw[len(token):]))
    return pairs


def assemble_sentence(
    selections: Mapping[str, str] | Sequence[str],
    source: str,
    language: str,
) -> TranslitSentence:
    """Join per-word winners, reinsert internal commas, close the sentence.

    ``selections`` is either a token→candidate map or a list aligned with the
    source words (needed when one surface token resolves differently per
    occurrence, e.g. articles).
    """
    lang_key = canonical_language(language)
    pairs = _split_tokens(source)
    if not pairs:
        raise TranslitError("empty source sentence")

    if isinstance(selections, Mapping):
        picked = []
        for token, _ in pairs:
            if token not in selections:
                raise TranslitError(f"missing selection for {token!r}")
            picked.append(selections[token])
    else:
        picked = list(selections)
        if len(picked) != len(pairs):
            raise TranslitError(
                f"{len(picked)} selections for {len(pairs)} words"
            )

    parts = []
    for (token, trailing), candidate in zip(pairs, picked):
        parts.append(candidate + ("," if "," in trailing else ""))
    terminal = "."
    last_trailing = pairs[-1][1]
    for ch in last_trailing:
        if ch in _TERMINALS:
            terminal = ch
            break
    rendered = " ".join(parts) + terminal
    return TranslitSentence(language=lang_key, tokens=picked, rendered=rendered)


@dataclass
class TranslitConfig:
    """Run plan and assets for the transliteration pipeline."""

    model_runs: tuple = DEFAULT_RUN_PLAN
    weights: tuple = DEFAULT_WEIGHTS
    params: dict = field(default_factory=dict)
    lexicon: Lexicon | None = None
    few_shots: str | None = None
    audit_dir: str | Path | None = None
    max_workers: int = 8

    @property
    def total_runs(self) -> int:
        return sum(count for _, count in self.model_runs)


def sentence_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def _execute_runs(gateway, prompt: str, expected: Sequence[str],
                  language: str, config: TranslitConfig) -> list[TranslitRun]:
    from .gateway import LlmRequest

    requests = []
    for model_id, count in config.model_runs:
        for run_index in range(count):
            requests.append(LlmRequest(
                model_id=model_id, prompt=prompt,
                params=dict(config.params), run_index=run_index,
            ))

    def run_one(req):
        from .gateway import GatewayError

        try:
            raw = gateway.llm_complete(req)
            return parse_response(
                raw, expected, language=language,
                model_id=req.model_id, run_index=req.run_index,
            ), None
        except (TranslitParseError, GatewayError) as exc:
            return None, f"{req.model_id}#{req.run_index}: {exc}"

    workers = min(len(requests), config.max_workers) or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(run_one, requests))

    runs = [run for run, _ in outcomes if run is not None]
    failures = [msg for _, msg in outcomes if msg is not None]
    if not runs:
        raise TranslitError(
            f"all runs failed for words {list(expected)}: {failures}"
        )
    return runs


def _fetch_article(gateway, language: str, key: ArticleKey,
                   config: TranslitConfig) -> str:
    seq = article_phonemes(key)
    prompt = build_prompt([seq], language, few_shots=config.few_shots)
    runs = _execute_runs(gateway, prompt, [seq.word], language, config)
    ranked = aggregate_candidates(
        runs, config.weights, expected_tokens=[seq.word],
        phoneme_seqs={seq.word: seq}, language=language,
    )
    return ranked[seq.word][0][0]


def transliterate(
    text: str,
    language: str,
    gateway,
    config: TranslitConfig | None = None,
) -> TranslitSentence:
    """Full pipeline for one sentence: phonemize, prompt, vote, assemble.

    Responses come through the gateway, so a cache-complete run is fully
    reproducible offline. Raw responses are persisted to ``config.audit_dir``
    when set.
    """
    config = config or TranslitConfig()
    lang_key = canonical_language(language)
    lexicon = config.lexicon or default_lexicon()

    items = phonemize_sentence(lexicon, text)
    oov = [it.token for it in items if it.seq is None]
    if oov:
        raise TranslitError(f"out-of-vocabulary words: {oov}")

    # Articles are spliced from a per-key table; everything else is prompted.
    occurrence_kinds: list[tuple[str, ArticleKey | None]] = []
    needed_keys: set[ArticleKey] = set()
    for idx, item in enumerate(items):
        word = normalize_word(item.token)
        if word in ARTICLES:
            nxt = next(
                (it.seq for it in items[idx + 1:] if it.seq is not None), None
            )
            key = resolve_article(word, nxt) if nxt is not None else (
                ArticleKey.THE_C if word == "the" else ArticleKey.A
            )
            occurrence_kinds.append((item.token, key))
            needed_keys.add(key)
        else:
            occurrence_kinds.append((item.token, None))

    prompt_seqs: list[PhonemeSequence] = []
    seen: set[str] = set()
    for item in items:
        if normalize_word(item.token) in ARTICLES or item.token in seen:
            continue
        seen.add(item.token)
        prompt_seqs.append(item.seq)

    article_table = {
        key: _fetch_article(gateway, lang_key, key, config)
        for key in sorted(needed_keys, key=lambda k: k.value)
    }

    ranked: dict[str, list[tuple[str, float]]] = {}
    runs: list[TranslitRun] = []
    prompt = None
    if prompt_seqs:
        expected = [seq.word for seq in prompt_seqs]
        prompt = build_prompt(prompt_seqs, lang_key, few_shots=config.few_shots)
        runs = _execute_runs(gateway, prompt, expected, lang_key, config)
        ranked = aggregate_candidates(
            runs, config.weights, expected_tokens=expected,
            phoneme_seqs={seq.word: seq for seq in prompt_seqs},
            language=lang_key,
        )

    selections = []
    for token, key in occurrence_kinds:
        if key is not None:
            selections.append(article_table[key])
        else:
            selections.append(ranked[token][0][0])

    sentence = assemble_sentence(selections, text, lang_key)
    sentence.provenance = {
        "scores": {token: ranking for token, ranking in ranked.items()},
        "articles": {key.value: cand for key, cand in article_table.items()},
        "run_plan": list(config.model_runs),
        "weights": list(config.weights),
        "params": dict(config.params),
    }

    if config.audit_dir is not None:
        _write_audit(Path(config.audit_dir), text, lang_key, prompt,
                     runs, sentence)
    return sentence


def _write_audit(audit_dir: Path, text: str, language: str,
                 prompt: str | None, runs: list[TranslitRun],
                 sentence: TranslitSentence) -> None:
    audit_dir.mkdir(parents=True, exist_ok=True)
    shash = sentence_hash(text)
    for run in runs:
        record = {
            "sentence_hash": shash,
            "text": text,
            "language": language,
            "model_id": run.model_id,
            "run_index": run.run_index,
            "raw": run.raw,
            "per_word": {
                w: {"choices": c.choices, "similarity_order": c.similarity_order}
                for w, c in run.per_word.items()
            },
            "problems": run.problems,
        }
        name = f"{shash}_{language}_{run.model_id}_{run.run_index:02d}.json"
        (audit_dir / name).write_text(
            json.dumps(record, ensure_ascii=False, indent=2), encoding="utf-8"
        )
    summary = {
        "sentence_hash": shash,
        "text": text,
        "language": language,
        "prompt": prompt,
        "rendered": sentence.rendered,
        "tokens": sentence.tokens,
        "provenance": sentence.provenance,
    }
    (audit_dir / f"{shash}_{language}_result.json").write_text(
        json.dumps(summary, ensure_ascii=False, indent=2), encoding="utf-8"
    )
