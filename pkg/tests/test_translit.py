import json
import unicodedata
from importlib.resources import files

import pytest
from hypothesis import given, strategies as st

from accentcorpus import g2p, translit
from accentcorpus.gateway import Gateway, LlmRequest


def words_for(lexicon, *tokens):
    return [g2p.phonemize_word(lexicon, t) for t in tokens]


def golden_prompt() -> str:
    return files("accentcorpus.assets").joinpath(
        "golden_prompt_japanese.txt"
    ).read_text(encoding="utf-8")


def make_run(per_word: dict[str, list[str]], model="m", idx=0):
    """TranslitRun where each word maps to a similarity order (3 strings)."""
    return translit.TranslitRun(
        model_id=model,
        run_index=idx,
        per_word={
            word: translit.TranslitChoice(
                word=word, phonemes="", choices=sorted(order),
                similarity_order=list(order),
            )
            for word, order in per_word.items()
        },
        raw="",
    )


class TestBuildPrompt:
    def test_matches_golden_bytes(self, lexicon):
        prompt = translit.build_prompt(
            words_for(lexicon, "Let's", "go"), "japanese"
        )
        assert prompt.encode("utf-8") == golden_prompt().encode("utf-8")

    def test_empty_word_list(self):
        with pytest.raises(translit.TranslitError):
            translit.build_prompt([], "japanese")

    def test_unsupported_language(self, lexicon):
        with pytest.raises(translit.TranslitError, match="unsupported"):
            translit.build_prompt(words_for(lexicon, "go"), "klingon")

    def test_deterministic(self, lexicon):
        words = words_for(lexicon, "Let's", "go")
        assert translit.build_prompt(words, "ja") == translit.build_prompt(
            words, "ja"
        )

    def test_language_name_substituted(self, lexicon):
        prompt = translit.build_prompt(words_for(lexicon, "go"), "korean")
        assert "Korean words" in prompt
        assert "Japanese words" not in prompt


class TestParseResponse:
    def test_fig_response(self, fig_response):
        run = translit.parse_response(
            fig_response, ["Let's", "go"], language="japanese"
        )
        lets = run.per_word["Let's"]
        assert lets.choices == ["レツ", "レッツ", "レテス"]
        assert lets.similarity_order == ["レッツ", "レツ", "レテス"]
        assert run.per_word["go"].similarity_order == ["ゴー", "ゴウ", "ゴ"]
        assert run.problems == {}

    def test_non_json_is_an_error(self):
        with pytest.raises(translit.TranslitParseError, match="no parsable"):
            translit.parse_response("hello", ["go"])

    def test_missing_word_flagged(self, fig_response):
        obj = json.loads(fig_response)
        del obj["go"]
        run = translit.parse_response(
            json.dumps(obj, ensure_ascii=False), ["Let's", "go"],
            language="japanese",
        )
        assert "go" not in run.per_word
        assert run.problems["go"] == "missing"

    def test_tolerates_prose_and_code_fence(self, fig_response):
        raw = f"Sure! Here you go:\n```json\n{fig_response}\n```\nEnjoy."
        run = translit.parse_response(raw, ["Let's", "go"], language="ja")
        assert run.per_word["Let's"].similarity_order[0] == "レッツ"

    def test_tolerates_trailing_commas(self):
        raw = (
            '{"go": {"phonemes": "ɡˈoʊ", "choices": ["ゴー", "ゴウ", "ゴ"],'
            ' "similarity order": ["ゴー", "ゴウ", "ゴ"],},}'
        )
        run = translit.parse_response(raw, ["go"], language="ja")
        assert run.per_word["go"].similarity_order[0] == "ゴー"

    def test_script_mismatch_rejected_per_word(self, fig_response):
        obj = json.loads(fig_response)
        obj["go"]["choices"] = ["go", "gou", "g"]
        obj["go"]["similarity order"] = ["go", "gou", "g"]
        run = translit.parse_response(
            json.dumps(obj, ensure_ascii=False), ["Let's", "go"],
            language="japanese",
        )
        assert "Let's" in run.per_word
        assert "go" in run.problems

    def test_wrong_length_rejected(self):
        raw = '{"go": {"choices": ["ゴー", "ゴ"], "similarity order": ["ゴー", "ゴ"]}}'
        with pytest.raises(translit.TranslitParseError):
            translit.parse_response(raw, ["go"], language="ja")

    def test_not_a_permutation_rejected(self):
        raw = (
            '{"go": {"choices": ["ゴー", "ゴウ", "ゴ"],'
            ' "similarity order": ["ゴー", "ゴー", "ゴ"]}}'
        )
        with pytest.raises(translit.TranslitParseError):
            translit.parse_response(raw, ["go"], language="ja")

    def test_unicode_normalized_to_nfc(self):
        decomposed = unicodedata.normalize("NFD", "ガ")
        assert decomposed != "ガ"
        raw = json.dumps({
            "go": {"choices": [decomposed, "ゴウ", "ゴ"],
                   "similarity order": [decomposed, "ゴウ", "ゴ"]}
        }, ensure_ascii=False)
        run = translit.parse_response(raw, ["go"], language="ja")
        assert run.per_word["go"].similarity_order[0] == "ガ"


class TestAggregate:
    def test_six_identical_runs(self, fig_response):
        runs = [
            translit.parse_response(fig_response, ["Let's", "go"],
                                    language="ja", model_id="m", run_index=i)
            for i in range(6)
        ]
        ranked = translit.aggregate_candidates(runs)
        assert ranked["Let's"][0] == ("レッツ", 18.0)

    def test_single_run_identity(self):
        runs = [make_run({"w": ["X", "Y", "Z"]})]
        ranked = translit.aggregate_candidates(runs)
        assert ranked["w"] == [("X", 3.0), ("Y", 2.0), ("Z", 1.0)]

    def test_two_run_tie_broken_by_codepoint_when_all_else_equal(self):
        runs = [
            make_run({"w": ["X", "Y", "Z"]}),
            make_run({"w": ["Y", "X", "Z"]}, idx=1),
        ]
        ranked = translit.aggregate_candidates(runs)
        scores = dict(ranked["w"])
        assert scores == {"X": 5.0, "Y": 5.0, "Z": 2.0}
        # same score, same frequency, no phonemes -> code-point order
        assert [c for c, _ in ranked["w"]] == ["X", "Y", "Z"]

    def test_tie_broken_by_frequency_first(self):
        # P scores 3+0, Q scores 2+1: tie at 3... use a clearer setup:
        # P appears once with rank 0 (3 points); Q twice with ranks 1,2
        # (2+1=3 points). Frequency prefers Q.
        runs = [
            make_run({"w": ["P", "Q", "R"]}),
            make_run({"w": ["R", "Q", "S"]}, idx=1),
        ]
        ranked = translit.aggregate_candidates(runs)
        scores = dict(ranked["w"])
        assert scores["Q"] == 4.0  # 2 + 2
        assert scores["R"] == 4.0  # 1 + 3
        # both rank twice; equal frequency -> codepoint Q < R
        assert [c for c, _ in ranked["w"]][:2] == ["Q", "R"]

    def test_phonetic_similarity_breaks_remaining_tie(self, lexicon):
        go = g2p.phonemize_word(lexicon, "go")
        # both candidates appear once at rank 0 across two runs
        runs = [
            make_run({"go": ["ゴー", "ミ", "ム"]}),
            make_run({"go": ["ミー", "ゴー", "ム"]}, idx=1),
        ]
        # Scores: ゴー 3+2=5, ミ 2, ミー 3, ム 1+1=2.
        ranked = translit.aggregate_candidates(
            runs, phoneme_seqs={"go": go}, language="japanese"
        )
        assert ranked["go"][0][0] == "ゴー"
        # ミ and ム tie at 2 with equal frequency; ゴ-like wins on phonetics
        # only through the leading slot; the tie pair orders by similarity.
        scores = dict(ranked["go"])
        assert scores["ミ"] == scores["ム"] == 2.0

    def test_nfc_merging_across_runs(self):
        nfd = unicodedata.normalize("NFD", "ガー")
        runs = [
            make_run({"w": ["ガー", "ヤ", "ユ"]}),
            make_run({"w": [nfd, "ヤ", "ユ"]}, idx=1),
        ]
        ranked = translit.aggregate_candidates(runs)
        assert ranked["w"][0] == ("ガー", 6.0)

    def test_zero_coverage_is_an_error(self):
        runs = [make_run({"w": ["X", "Y", "Z"]})]
        with pytest.raises(translit.TranslitError, match="zero runs"):
            translit.aggregate_candidates(runs, expected_tokens=["w", "v"])

    def test_weight_validation(self):
        runs = [make_run({"w": ["X", "Y", "Z"]})]
        for bad in ((1, 2, 3), (3, 3, 1), (3, 2), (3, 2, 0)):
            with pytest.raises(translit.TranslitError):
                translit.aggregate_candidates(runs, weights=bad)

    def test_no_runs(self):
        with pytest.raises(translit.TranslitError):
            translit.aggregate_candidates([])

    @given(st.permutations(range(5)))
    def test_run_order_permutation_invariance(self, order):
        base = [
            make_run({"w": ["A", "B", "C"]}, idx=0),
            make_run({"w": ["B", "A", "C"]}, idx=1),
            make_run({"w": ["C", "B", "A"]}, idx=2),
            make_run({"w": ["A", "C", "B"]}, idx=3),
            make_run({"w": ["B", "C", "A"]}, idx=4),
        ]
        expected = translit.aggregate_candidates(base)
        shuffled = translit.aggregate_candidates([base[i] for i in order])
        assert shuffled == expected

    def test_monotone_adding_first_rank_never_lowers_score(self):
        runs = [make_run({"w": ["X", "Y", "Z"]})]
        before = dict(translit.aggregate_candidates(runs)["w"])
        runs.append(make_run({"w": ["Y", "X", "Z"]}, idx=1))
        after = dict(translit.aggregate_candidates(runs)["w"])
        assert after["Y"] >= before["Y"]

    def test_top1_appears_in_some_runs_choices(self, fig_response):
        runs = [
            translit.parse_response(fig_response, ["Let's", "go"],
                                    language="ja")
        ]
        ranked = translit.aggregate_candidates(runs)
        for token, candidates in ranked.items():
            top = candidates[0][0]
            assert any(
                top in run.per_word[token].choices
                for run in runs if token in run.per_word
            )


class TestResolveArticle:
    def test_the_before_vowel(self, lexicon):
        apple = g2p.phonemize_word(lexicon, "apple")
        assert translit.resolve_article("the", apple) is translit.ArticleKey.THE_V

    def test_the_before_consonant(self, lexicon):
        go = g2p.phonemize_word(lexicon, "go")
        assert translit.resolve_article("the", go) is translit.ArticleKey.THE_C

    def test_a_before_phonetic_vowel(self, lexicon):
        hour = g2p.phonemize_word(lexicon, "hour")
        assert hour.starts_with_vowel()  # "hour" starts with a vowel phone
        assert translit.resolve_article("a", hour) is translit.ArticleKey.AN

    def test_not_an_article(self, lexicon):
        with pytest.raises(translit.TranslitError):
            translit.resolve_article("cat", g2p.phonemize_word(lexicon, "go"))


class TestAssemble:
    def test_fig_sentence(self):
        sentence = translit.assemble_sentence(
            {"Let's": "レッツ", "go": "ゴー"}, "Let's go", "japanese"
        )
        assert sentence.rendered == "レッツ ゴー."
        assert sentence.tokens == ["レッツ", "ゴー"]

    def test_single_word(self):
        assert translit.assemble_sentence(
            {"go": "ゴー"}, "go", "ja"
        ).rendered == "ゴー."

    def test_comma_reinserted(self):
        assert translit.assemble_sentence(
            {"go": "ゴー"}, "go, go", "ja"
        ).rendered == "ゴー, ゴー."

    def test_source_terminal_kept(self):
        assert translit.assemble_sentence(
            {"go": "ゴー"}, "go!", "ja"
        ).rendered == "ゴー!"

    def test_missing_selection(self):
        with pytest.raises(translit.TranslitError, match="missing selection"):
            translit.assemble_sentence({"go": "ゴー"}, "Let's go", "ja")

    def test_positional_selections(self):
        sentence = translit.assemble_sentence(
            ["ジ", "アップル"], "the apple", "ja"
        )
        assert sentence.rendered == "ジ アップル."


def seed_all_runs(gw: Gateway, prompt: str, response: str,
                  config: translit.TranslitConfig):
    for model_id, count in config.model_runs:
        for run_index in range(count):
            gw.seed_llm(
                LlmRequest(model_id=model_id, prompt=prompt,
                           params=dict(config.params), run_index=run_index),
                response,
            )


class TestTransliterate:
    def test_end_to_end_replay(self, tmp_path, lexicon, fig_response):
        gw = Gateway(cache_dir=tmp_path / "cache", mode="replay")
        config = translit.TranslitConfig(lexicon=lexicon)
        prompt = translit.build_prompt(
            words_for(lexicon, "Let's", "go"), "japanese"
        )
        seed_all_runs(gw, prompt, fig_response, config)

        sentence = translit.transliterate("Let's go", "japanese", gw, config)
        assert sentence.rendered == "レッツ ゴー."
        assert gw.network_calls == 0

        again = translit.transliterate("Let's go", "japanese", gw, config)
        assert again.rendered == sentence.rendered
        assert again.tokens == sentence.tokens
        assert again.provenance == sentence.provenance

    def test_replay_miss_lists_problem(self, tmp_path, lexicon):
        gw = Gateway(cache_dir=tmp_path / "cache", mode="replay")
        config = translit.TranslitConfig(lexicon=lexicon)
        with pytest.raises(translit.TranslitError, match="all runs failed"):
            translit.transliterate("go", "japanese", gw, config)

    def test_oov_words_error(self, tmp_path, lexicon):
        gw = Gateway(cache_dir=tmp_path / "cache", mode="replay")
        config = translit.TranslitConfig(lexicon=lexicon)
        with pytest.raises(translit.TranslitError, match="zzzqx"):
            translit.transliterate("go zzzqx", "japanese", gw, config)

    def test_article_spliced_from_table(self, tmp_path, lexicon):
        gw = Gateway(cache_dir=tmp_path / "cache", mode="replay")
        config = translit.TranslitConfig(lexicon=lexicon)

        apple_prompt = translit.build_prompt(
            words_for(lexicon, "apple"), "japanese"
        )
        apple_resp = json.dumps({
            "apple": {"phonemes": "ˈæpəl",
                      "choices": ["アップル", "アプル", "アポー"],
                      "similarity order": ["アップル", "アプル", "アポー"]}
        }, ensure_ascii=False)
        seed_all_runs(gw, apple_prompt, apple_resp, config)

        the_v = translit.article_phonemes(translit.ArticleKey.THE_V)
        article_prompt = translit.build_prompt([the_v], "japanese")
        article_resp = json.dumps({
            "the": {"phonemes": "ði", "choices": ["ジ", "ザ", "デ"],
                    "similarity order": ["ジ", "ザ", "デ"]}
        }, ensure_ascii=False)
        seed_all_runs(gw, article_prompt, article_resp, config)

        sentence = translit.transliterate("the apple", "japanese", gw, config)
        assert sentence.rendered == "ジ アップル."
        assert sentence.provenance["articles"] == {"THE_V": "ジ"}

    def test_audit_files_written(self, tmp_path, lexicon, fig_response):
        gw = Gateway(cache_dir=tmp_path / "cache", mode="replay")
        config = translit.TranslitConfig(
            lexicon=lexicon, audit_dir=tmp_path / "runs"
        )
        prompt = translit.build_prompt(
            words_for(lexicon, "Let's", "go"), "japanese"
        )
        seed_all_runs(gw, prompt, fig_response, config)
        translit.transliterate("Let's go", "japanese", gw, config)

        run_files = sorted((tmp_path / "runs").glob("*_japanese_*.json"))
        assert len(run_files) == 7  # 6 runs + 1 result summary
        record = json.loads(run_files[0].read_text(encoding="utf-8"))
        assert record["raw"] == fig_response
