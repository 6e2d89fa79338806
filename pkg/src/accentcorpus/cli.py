"""Command-line entry point wiring all pipeline stages.

Exit codes: 0 success, 1 operational failure (printed as
``error[<category>]: message``), 2 usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__, corpus, evalkit, g2p, phonosim, romanize, translit, vq
from .gateway import (
    Gateway, GatewayError, LlmEndpoint, TtsEndpoint, TtsRequest,
    llm_endpoint_from_config, tts_endpoint_from_config,
)

DEFAULT_MODELS = [model for model, _ in translit.DEFAULT_RUN_PLAN]


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    return json.loads(Path(path).read_text(encoding="utf-8"))


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _run_plan(config: dict, total_runs: int | None) -> tuple:
    models = config.get("models", DEFAULT_MODELS)
    per_model = config.get("runs_per_model", 3)
    if total_runs is None:
        return tuple((m, per_model) for m in models)
    base, extra = divmod(total_runs, len(models))
    return tuple(
        (m, base + (1 if i < extra else 0)) for i, m in enumerate(models)
    )


def _gateway(args, config: dict, need_llm=False, need_tts=False) -> Gateway:
    mode = getattr(args, "mode", None) or config.get("mode", "replay")
    cache = getattr(args, "cache", None) or config.get("cache_dir", "cache")
    llm = tts = None
    if need_llm:
        llm = llm_endpoint_from_config(config.get("llm", {}))
    if need_tts:
        tts = tts_endpoint_from_config(config.get("tts", {}))
    return Gateway(
        cache_dir=cache, llm=llm, tts=tts, mode=mode,
        max_in_flight=config.get("max_in_flight", 4),
        max_retries=config.get("max_retries", 3),
        backoff_s=config.get("backoff_s", 0.2),
        timeout_s=config.get("timeout_s", 60.0),
    )


def _lexicon(args) -> g2p.Lexicon:
    path = getattr(args, "lexicon", None)
    if path:
        return g2p.load_lexicon(path)
    return g2p.default_lexicon()


# -- subcommand implementations ---------------------------------------------


def cmd_phonemize(args) -> int:
    lexicon = _lexicon(args)
    items = g2p.phonemize_sentence(lexicon, args.text)
    for item in items:
        if item.seq is None:
            print(f"warning: out-of-vocabulary {item.token!r}",
                  file=sys.stderr)
        else:
            print(f"{item.token}\t{item.seq.render()}")
    return 0


def cmd_romanize(args) -> int:
    print(romanize.romanize(args.script, args.text))
    return 0


def cmd_phonosim(args) -> int:
    score = phonosim.ipa_roman_similarity(args.ipa, args.roman)
    print(f"{score:.4f}")
    return 0


def cmd_transliterate(args) -> int:
    config = load_config(args.config)
    gateway = _gateway(args, config, need_llm=True)
    tconfig = translit.TranslitConfig(
        model_runs=_run_plan(config, args.runs),
        weights=tuple(config.get("weights", translit.DEFAULT_WEIGHTS)),
        params=config.get("params", {}),
        lexicon=_lexicon(args),
        audit_dir=args.audit,
    )
    sentence = translit.transliterate(args.text, args.lang, gateway, tconfig)
    payload = {
        "language": sentence.language,
        "text": args.text,
        "rendered": sentence.rendered,
        "tokens": sentence.tokens,
        "provenance": sentence.provenance,
    }
    print(json.dumps(payload, ensure_ascii=False, sort_keys=True))
    return 0


def cmd_synth(args) -> int:
    config = load_config(args.config)
    gateway = _gateway(args, config, need_tts=True)
    manifest = corpus.CorpusManifest.load(args.manifest)
    speakers = {s.speaker_id: s for s in manifest.speakers}
    synthesized = 0
    for utt in manifest.utterances:
        if utt.target_audio:
            continue
        text = utt.target_text or utt.text
        speaker_id = utt.utt_id.split("_", 1)[0]
        speaker = speakers.get(speaker_id)
        req = TtsRequest(
            text=text,
            speaker_prompt=tuple(speaker.prompt_audio) if speaker else (),
            params=config.get("tts", {}).get("params", {}),
        )
        result = gateway.tts_synthesize(req)
        utt.target_audio = str(
            result.path.relative_to(gateway.cache_dir)
        )
        synthesized += 1
    manifest.save(args.manifest)
    print(f"synthesized {synthesized} utterances")
    return 0


def cmd_build_dataset(args) -> int:
    transcripts = corpus.load_transcripts(args.transcripts)
    speakers_cfg = json.loads(Path(args.speakers).read_text(encoding="utf-8"))
    speakers = [corpus.SpeakerRef(**s) for s in speakers_cfg]
    langs = [translit.canonical_language(l) for l in args.langs.split(",")]

    ids = [tid for tid, _ in transcripts]
    if args.sizes:
        sizes = tuple(int(s) for s in args.sizes.split(","))
        assignment = corpus.split_transcripts(ids, sizes, args.seed)
    else:
        assignment = corpus.SplitAssignment(
            train=ids, val=[], test=[], seed=args.seed
        )

    texts = dict(transcripts)
    utterances = []
    for speaker in speakers:
        for lang in langs:
            for tid in ids:
                utterances.append(corpus.PairedUtterance(
                    utt_id=f"{speaker.speaker_id}_{lang}_{tid}",
                    text=texts[tid],
                    source_accent=speaker.l1_accent,
                    target_accent=lang,
                    split=assignment.split_of(tid),
                ))
    provenance = {
        "tool_version": __version__,
        "seed": args.seed,
        "transcripts": str(args.transcripts),
        "languages": langs,
    }
    manifest, report = corpus.build_manifest(
        speakers, utterances, provenance=provenance
    )
    manifest.save(args.out)
    for issue in report:
        print(f"warning: {issue}", file=sys.stderr)
    print(f"wrote {args.out}: {len(utterances)} utterances, "
          f"{len(speakers)} speakers, splits "
          f"{len(assignment.train)}/{len(assignment.val)}/{len(assignment.test)}")
    return 0


def cmd_vq(args) -> int:
    if args.vq_command == "fit":
        frames = vq.read_matrix(args.frames)
        codebook = vq.fit_kmeans(frames, k=args.k, max_iters=args.iters,
                                 seed=args.seed)
        codebook.save(args.out)
        print(f"fit k={codebook.k} dim={codebook.dim} "
              f"distortion={codebook.train_distortion:.6f}")
        return 0
    codebook = vq.Codebook.load(args.codebook)
    frames = vq.read_matrix(args.frames)
    tokens = vq.quantize(codebook, frames)
    if not args.keep_repeats:
        tokens = vq.dedup(tokens)
    print(" ".join(str(t) for t in tokens))
    return 0


def cmd_eval(args) -> int:
    manifest = corpus.CorpusManifest.load(args.manifest)
    refs = {u.utt_id: u.text for u in manifest.utterances}
    hyps = evalkit.load_hyp_sidecar(args.hyp)
    probs = evalkit.load_prob_sidecar(args.probs) if args.probs else None
    report = evalkit.evaluate_corpus(refs, hyps, probs=probs)

    if args.spk_emb:
        conv = evalkit.load_embedding_sidecar(args.spk_emb[0])
        ref_emb = evalkit.load_embedding_sidecar(args.spk_emb[1])
        secs = [
            evalkit.cosine(conv[u], ref_emb[u])
            for u in sorted(conv) if u in ref_emb
        ]
        if secs:
            report["aggregate"]["secs_mean"] = sum(secs) / len(secs)
    if args.accent_emb:
        conv = evalkit.load_embedding_sidecar(args.accent_emb[0])
        accented = evalkit.load_embedding_sidecar(args.accent_emb[1])
        native = evalkit.load_embedding_sidecar(args.accent_emb[2])
        diffs = [
            evalkit.aecs_diff(conv[u], accented[u], native[u])
            for u in sorted(conv) if u in accented and u in native
        ]
        if diffs:
            report["aggregate"]["aecs_diff_mean"] = sum(diffs) / len(diffs)

    if args.out:
        Path(args.out).write_text(
            json.dumps(report, ensure_ascii=False, indent=2),
            encoding="utf-8",
        )
    agg = report["aggregate"]
    print(f"{'metric':<16} value")
    for key in sorted(agg):
        value = agg[key]
        if isinstance(value, float):
            print(f"{key:<16} {value:.3f}")
        else:
            print(f"{key:<16} {value}")
    return 0


def cmd_mushra(args) -> int:
    from . import mushra

    if args.mushra_command == "serve":
        store_dir = args.store or str(Path(args.session).parent)
        store = mushra.MushraStore(store_dir, asset_root=args.assets)
        session_path = Path(args.session)
        if session_path.is_file():
            config = json.loads(session_path.read_text(encoding="utf-8"))
            if config["session_id"] not in store.sessions:
                store.add_session(config)
        app = mushra.make_app(store, static_dir=args.static)
        import uvicorn

        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
        return 0

    store = mushra.MushraStore(args.store, asset_root=args.assets)
    session_id = args.session
    if session_id.endswith(".json"):
        session_id = json.loads(
            Path(session_id).read_text(encoding="utf-8")
        )["session_id"]
    print(mushra.render_report(store, session_id))
    return 0


def _pipeline_plan(transcripts, langs, total_runs, n_speakers,
                   lexicon) -> dict:
    keys_needed: set[str] = set()
    oov: set[str] = set()
    for _, text in transcripts:
        try:
            items = g2p.phonemize_sentence(lexicon, text)
        except (ValueError, g2p.OOVError):
            continue
        for idx, item in enumerate(items):
            word = g2p.normalize_word(item.token)
            if item.seq is None:
                oov.add(item.token)
                continue
            if word in translit.ARTICLES:
                nxt = next(
                    (it.seq for it in items[idx + 1:] if it.seq is not None),
                    None,
                )
                if nxt is not None:
                    keys_needed.add(
                        translit.resolve_article(word, nxt).value
                    )
    n, n_langs = len(transcripts), len(langs)
    return {
        "transcripts": n,
        "languages": n_langs,
        "runs_per_sentence": total_runs,
        "prompts": n * n_langs,
        "llm_calls": n * n_langs * total_runs,
        "article_prompts": len(keys_needed) * n_langs,
        "article_llm_calls": len(keys_needed) * n_langs * total_runs,
        "tts_calls": n * n_langs * n_speakers,
        "oov_words": sorted(oov),
    }


def cmd_pipeline(args) -> int:
    config = load_config(args.config)
    transcripts = corpus.load_transcripts(args.transcripts)
    langs = [translit.canonical_language(l) for l in args.langs.split(",")]
    plan_runs = _run_plan(config, args.runs)
    total_runs = sum(count for _, count in plan_runs)
    lexicon = _lexicon(args)

    speakers: list[corpus.SpeakerRef] = []
    if args.speakers:
        speakers_cfg = json.loads(
            Path(args.speakers).read_text(encoding="utf-8")
        )
        speakers = [corpus.SpeakerRef(**s) for s in speakers_cfg]

    plan = _pipeline_plan(transcripts, langs, total_runs,
                          len(speakers), lexicon)
    if args.dry_run:
        if args.json:
            print(json.dumps(plan, ensure_ascii=False, sort_keys=True))
        else:
            print(f"transcripts: {plan['transcripts']}")
            print(f"languages: {plan['languages']}")
            print(f"runs per sentence: {plan['runs_per_sentence']}")
            print(f"prompts: {plan['prompts']}")
            print(f"llm calls: {plan['llm_calls']}")
            print(f"article prompts: {plan['article_prompts']} "
                  f"(llm calls: {plan['article_llm_calls']})")
            print(f"tts calls: {plan['tts_calls']}")
            if plan["oov_words"]:
                print(f"oov words: {', '.join(plan['oov_words'])}")
        return 0

    out_dir = Path(args.out or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    gateway = _gateway(args, config, need_llm=True,
                       need_tts=bool(speakers))
    tconfig = translit.TranslitConfig(
        model_runs=plan_runs,
        weights=tuple(config.get("weights", translit.DEFAULT_WEIGHTS)),
        params=config.get("params", {}),
        lexicon=lexicon,
        audit_dir=out_dir / "runs",
    )

    ids = [tid for tid, _ in transcripts]
    if args.sizes:
        sizes = tuple(int(s) for s in args.sizes.split(","))
        assignment = corpus.split_transcripts(ids, sizes, args.seed)
    else:
        assignment = corpus.SplitAssignment(train=ids, val=[], test=[],
                                            seed=args.seed)
    assignment.save(out_dir / "splits.json")

    rendered: dict[tuple[str, str], str] = {}
    for lang in langs:
        for tid, text in transcripts:
            sentence = translit.transliterate(text, lang, gateway, tconfig)
            rendered[(lang, tid)] = sentence.rendered

    utterances = []
    for speaker in speakers:
        for lang in langs:
            for tid, text in transcripts:
                target_text = rendered[(lang, tid)]
                req = TtsRequest(
                    text=target_text,
                    speaker_prompt=tuple(speaker.prompt_audio),
                    params=config.get("tts", {}).get("params", {}),
                )
                result = gateway.tts_synthesize(req)
                utterances.append(corpus.PairedUtterance(
                    utt_id=f"{speaker.speaker_id}_{lang}_{tid}",
                    text=text,
                    source_accent=speaker.l1_accent,
                    target_accent=lang,
                    target_audio=str(
                        result.path.relative_to(gateway.cache_dir)
                    ),
                    target_text=target_text,
                    split=assignment.split_of(tid),
                ))

    provenance = {
        "tool_version": __version__,
        "config_hash": config_hash(config),
        "seed": args.seed,
        "languages": langs,
        "run_plan": [list(p) for p in plan_runs],
    }
    manifest, report = corpus.build_manifest(
        speakers, utterances, provenance=provenance
    )
    manifest.save(out_dir / "manifest.json")
    for issue in report:
        print(f"warning: {issue}", file=sys.stderr)
    print(f"pipeline complete: {len(rendered)} sentences transliterated, "
          f"{len(utterances)} utterances in {out_dir / 'manifest.json'}")
    return 0


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="accentcorpus",
        description="Accent-parallel speech corpus tools",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phonemize", help="print token→IPA lines")
    p.add_argument("text")
    p.add_argument("--lexicon")
    p.set_defaults(func=cmd_phonemize)

    p = sub.add_parser("romanize", help="romanize target-script text")
    p.add_argument("text")
    p.add_argument("--script", required=True, choices=["ko", "ja", "hi"])
    p.set_defaults(func=cmd_romanize)

    p = sub.add_parser("phonosim", help="pronunciation similarity score")
    p.add_argument("--ipa", required=True)
    p.add_argument("--roman", required=True)
    p.set_defaults(func=cmd_phonosim)

    p = sub.add_parser("transliterate", help="transliterate one sentence")
    p.add_argument("--text", required=True)
    p.add_argument("--lang", required=True)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--config")
    p.add_argument("--cache")
    p.add_argument("--mode", choices=["replay", "live"])
    p.add_argument("--lexicon")
    p.add_argument("--audit")
    p.set_defaults(func=cmd_transliterate)

    p = sub.add_parser("synth", help="fill missing audio in a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config")
    p.add_argument("--cache")
    p.add_argument("--mode", choices=["replay", "live"])
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build-dataset", help="construct a corpus manifest")
    p.add_argument("--transcripts", required=True)
    p.add_argument("--speakers", required=True)
    p.add_argument("--langs", required=True)
    p.add_argument("--sizes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="manifest.json")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("vq", help="vector quantization of feature frames")
    vq_sub = p.add_subparsers(dest="vq_command", required=True)
    pf = vq_sub.add_parser("fit")
    pf.add_argument("--frames", required=True)
    pf.add_argument("--k", type=int, default=500)
    pf.add_argument("--iters", type=int, default=100)
    pf.add_argument("--seed", type=int, default=0)
    pf.add_argument("--out", required=True)
    pq = vq_sub.add_parser("quantize")
    pq.add_argument("--codebook", required=True)
    pq.add_argument("--frames", required=True)
    pq.add_argument("--keep-repeats", action="store_true")
    p.set_defaults(func=cmd_vq)

    p = sub.add_parser("eval", help="objective metrics over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--probs")
    p.add_argument("--spk-emb", nargs=2, metavar=("CONV", "REF"))
    p.add_argument("--accent-emb", nargs=3,
                   metavar=("CONV", "ACCENTED", "NATIVE"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("mushra", help="listening-test service and reports")
    mushra_sub = p.add_subparsers(dest="mushra_command", required=True)
    ps = mushra_sub.add_parser("serve")
    ps.add_argument("--session", required=True,
                    help="session config JSON (created if new)")
    ps.add_argument("--store")
    ps.add_argument("--assets")
    ps.add_argument("--static")
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--port", type=int, default=8765)
    pr = mushra_sub.add_parser("report")
    pr.add_argument("--session", required=True)
    pr.add_argument("--store", required=True)
    pr.add_argument("--assets")
    p.set_defaults(func=cmd_mushra)

    p = sub.add_parser("pipeline", help="end-to-end corpus construction")
    p.add_argument("--transcripts", required=True)
    p.add_argument("--langs", required=True)
    p.add_argument("--speakers")
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--sizes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--cache")
    p.add_argument("--mode", choices=["replay", "live"])
    p.add_argument("--lexicon")
    p.add_argument("--out")
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    return parser


_ERROR_CATEGORIES = (
    (translit.TranslitError, "transliteration"),
    (GatewayError, "gateway"),
    (g2p.LexiconError, "lexicon"),
    (g2p.OOVError, "oov"),
    (FileNotFoundError, "io"),
    (json.JSONDecodeError, "config"),
    (ValueError, "input"),
    (KeyError, "input"),
)


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single CLI error boundary
        for exc_type, category in _ERROR_CATEGORIES:
            if isinstance(exc, exc_type):
                print(f"error[{category}]: {exc}", file=sys.stderr)
                return 1
        raise


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
