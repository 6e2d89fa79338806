"""Corpus manifest construction: speakers, splits, augmentation selection,
and paired-utterance records with referential-integrity validation."""
from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence, TypeVar

MANIFEST_VERSION = 1
SPLITS = ("train", "val", "test")

T = TypeVar("T")


@dataclass
class SpeakerRef:
    speaker_id: str
    l1_accent: str
    prompt_audio: list[str] = field(default_factory=list)


@dataclass
class PairedUtterance:
    """Same speaker and text on both sides; only the accent differs."""

    utt_id: str
    text: str
    source_accent: str
    target_accent: str
    source_audio: str | None = None
    target_audio: str | None = None
    split: str = "train"
    origin: str = "synthesized"  # or "ground-truth"
    # transliterated text driving the target-side synthesis
    target_text: str | None = None

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"bad split {self.split!r} for {self.utt_id}")
        if self.origin not in ("synthesized", "ground-truth"):
            raise ValueError(f"bad origin {self.origin!r} for {self.utt_id}")


@dataclass
class CorpusManifest:
    version: int
    speakers: list[SpeakerRef]
    utterances: list[PairedUtterance]
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "speakers": [asdict(s) for s in self.speakers],
            "utterances": [asdict(u) for u in self.utterances],
            "provenance": self.provenance,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, indent=2),
            encoding="utf-8",
        )

    @classmethod
    def from_dict(cls, data: dict) -> "CorpusManifest":
        return cls(
            version=data["version"],
            speakers=[SpeakerRef(**s) for s in data["speakers"]],
            utterances=[PairedUtterance(**u) for u in data["utterances"]],
            provenance=data.get("provenance", {}),
        )

    @classmethod
    def load(cls, path: str | Path) -> "CorpusManifest":
        return cls.from_dict(
            json.loads(Path(path).read_text(encoding="utf-8"))
        )


@dataclass
class SplitAssignment:
    train: list[str]
    val: list[str]
    test: list[str]
    seed: int

    def split_of(self, transcript_id: str) -> str:
        for name in SPLITS:
            if transcript_id in set(getattr(self, name)):
                return name
        raise KeyError(transcript_id)

    def to_dict(self) -> dict:
        return {"train": self.train, "val": self.val, "test": self.test,
                "seed": self.seed}

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "SplitAssignment":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(train=data["train"], val=data["val"], test=data["test"],
                   seed=data["seed"])


def split_transcripts(
    ids: Sequence[str], sizes: tuple[int, int, int], seed: int
) -> SplitAssignment:
    """Seeded shuffle, then partition into train/val/test of exact sizes."""
    if len(sizes) != 3 or any(s < 0 for s in sizes):
        raise ValueError(f"sizes must be 3 nonnegative ints, got {sizes}")
    if sum(sizes) != len(ids):
        raise ValueError(
            f"sizes {sizes} sum to {sum(sizes)}, but there are {len(ids)} "
            "transcripts"
        )
    shuffled = list(ids)
    random.Random(seed).shuffle(shuffled)
    n_train, n_val, _ = sizes
    return SplitAssignment(
        train=shuffled[:n_train],
        val=shuffled[n_train:n_train + n_val],
        test=shuffled[n_train + n_val:],
        seed=seed,
    )


def select_augmentation(
    transcripts: Sequence[T],
    max_words: int = 15,
    count: int = 4500,
    seed: int = 0,
    text_of: Callable[[T], str] = lambda t: t,
) -> list[T]:
    """Keep transcripts with strictly fewer than ``max_words`` whitespace
    tokens, then draw a seeded sample of exactly ``count`` of them."""
    eligible = [t for t in transcripts if len(text_of(t).split()) < max_words]
    if count > len(eligible):
        raise ValueError(
            f"need {count} transcripts but only {len(eligible)} pass the "
            f"<{max_words}-word filter"
        )
    return random.Random(seed).sample(eligible, count)


def build_manifest(
    speakers: Sequence[SpeakerRef],
    utterances: Sequence[PairedUtterance],
    provenance: dict | None = None,
    asset_root: str | Path | None = None,
) -> tuple[CorpusManifest, list[str]]:
    """Assemble a manifest plus a validation report.

    The report lists dangling audio references, duplicate ids, and split
    leaks (identical text appearing in two different splits). Validation is
    read-only and idempotent.
    """
    report: list[str] = []
    root = Path(asset_root) if asset_root is not None else None

    def exists(ref: str | None) -> bool:
        if not ref:
            return False
        if root is None:
            return True
        return (root / ref).exists()

    seen_speakers: set[str] = set()
    for speaker in speakers:
        if speaker.speaker_id in seen_speakers:
            report.append(f"duplicate speaker id {speaker.speaker_id}")
        seen_speakers.add(speaker.speaker_id)
        for ref in speaker.prompt_audio:
            if not exists(ref):
                report.append(
                    f"speaker {speaker.speaker_id}: missing prompt audio {ref}"
                )

    seen_utts: set[str] = set()
    text_splits: dict[str, set[str]] = {}
    for utt in utterances:
        if utt.utt_id in seen_utts:
            report.append(f"duplicate utterance id {utt.utt_id}")
        seen_utts.add(utt.utt_id)
        if not exists(utt.source_audio):
            report.append(f"{utt.utt_id}: missing source_audio")
        if not exists(utt.target_audio):
            report.append(f"{utt.utt_id}: missing target_audio")
        text_splits.setdefault(" ".join(utt.text.split()), set()).add(utt.split)
    for text, splits in sorted(text_splits.items()):
        if len(splits) > 1:
            report.append(
                f"split leak: text {text!r} appears in {sorted(splits)}"
            )

    manifest = CorpusManifest(
        version=MANIFEST_VERSION,
        speakers=list(speakers),
        utterances=list(utterances),
        provenance=provenance or {},
    )
    return manifest, report


def load_transcripts(path: str | Path) -> list[tuple[str, str]]:
    """Read ``id<TAB>text`` lines; bare-text lines get generated ids."""
    out: list[tuple[str, str]] = []
    for idx, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines()
    ):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" in line:
            tid, text = line.split("\t", 1)
        else:
            tid, text = f"t{idx + 1:05d}", line
        out.append((tid, text))
    return out
