import json
import re

import pytest
from hypothesis import given, strategies as st

from accentcorpus import mushra
from mockserver import make_wav


def session_config(tmp_path, n_trials=2, conditions=("gt", "synth"),
                   session_id="s1", axis="naturalness", seed=7):
    stimuli_dir = tmp_path / "audio"
    stimuli_dir.mkdir(exist_ok=True)
    trials = []
    for t in range(n_trials):
        stimuli = {}
        for cond in conditions:
            path = stimuli_dir / f"{cond}_{t}.wav"
            path.write_bytes(make_wav(0.1))
            stimuli[cond] = str(path.relative_to(tmp_path))
        trials.append({"trial_id": f"trial{t}", "stimuli": stimuli})
    return {
        "session_id": session_id,
        "axis": axis,
        "conditions": list(conditions),
        "trials": trials,
        "group_label": "hindi-familiar",
        "seed": seed,
    }


@pytest.fixture
def store(tmp_path):
    return mushra.MushraStore(tmp_path / "store", asset_root=tmp_path)


class TestStats:
    def test_hand_computed_ci(self):
        stats = mushra.compute_stats([80, 70, 90])
        assert stats.mean == pytest.approx(80.0)
        assert stats.ci_half_width == pytest.approx(24.84, abs=0.01)
        assert stats.rendered == "80.00 ± 24.84"

    def test_constant_scores(self):
        stats = mushra.compute_stats([50, 50, 50, 50])
        assert stats.rendered == "50.00 ± 0.00"

    def test_single_score_rejected(self):
        with pytest.raises(mushra.MushraError):
            mushra.compute_stats([50])

    def test_rendering_shape(self):
        stats = mushra.compute_stats([1, 2, 3, 4, 5])
        assert re.fullmatch(r"\d+\.\d{2} ± \d+\.\d{2}", stats.rendered)

    @given(st.lists(st.integers(0, 100), min_size=2, max_size=20),
           st.randoms())
    def test_permutation_invariance(self, scores, rnd):
        shuffled = list(scores)
        rnd.shuffle(shuffled)
        a = mushra.compute_stats(scores)
        b = mushra.compute_stats(shuffled)
        assert a.mean == pytest.approx(b.mean)
        assert a.ci_half_width == pytest.approx(b.ci_half_width)

    @given(st.lists(st.integers(0, 100), min_size=2, max_size=20))
    def test_adding_mean_never_increases_spread(self, scores):
        import statistics

        mean = sum(scores) / len(scores)
        s_before = statistics.stdev(scores)
        s_after = statistics.stdev(scores + [mean])
        assert s_after <= s_before + 1e-9


class TestCreateSession:
    def test_minimal_session(self, tmp_path):
        session = mushra.create_session(
            session_config(tmp_path, n_trials=3), asset_root=tmp_path
        )
        assert len(session.trials) == 3
        assert all(len(t.stimuli) == 2 for t in session.trials)
        assert len(session.handles) == 6

    def test_needs_two_conditions(self, tmp_path):
        config = session_config(tmp_path, conditions=("only",))
        with pytest.raises(mushra.MushraError, match="2 conditions"):
            mushra.create_session(config, asset_root=tmp_path)

    def test_duplicate_condition_ids(self, tmp_path):
        config = session_config(tmp_path)
        config["conditions"] = ["gt", "gt"]
        with pytest.raises(mushra.MushraError, match="duplicate"):
            mushra.create_session(config, asset_root=tmp_path)

    def test_missing_stimulus_file(self, tmp_path):
        config = session_config(tmp_path)
        config["trials"][0]["stimuli"]["gt"] = "nope.wav"
        with pytest.raises(mushra.MushraError, match="missing stimulus"):
            mushra.create_session(config, asset_root=tmp_path)

    def test_trial_must_cover_every_condition(self, tmp_path):
        config = session_config(tmp_path)
        del config["trials"][0]["stimuli"]["gt"]
        with pytest.raises(mushra.MushraError, match="every condition"):
            mushra.create_session(config, asset_root=tmp_path)

    def test_bad_axis(self, tmp_path):
        config = session_config(tmp_path)
        config["axis"] = "speediness"
        with pytest.raises(mushra.MushraError, match="axis"):
            mushra.create_session(config, asset_root=tmp_path)

    def test_same_evaluator_same_order(self, tmp_path):
        session = mushra.create_session(
            session_config(tmp_path), asset_root=tmp_path
        )
        assert session.presentation_order("eva", "trial0") == \
            session.presentation_order("eva", "trial0")

    def test_evaluators_generally_differ(self, tmp_path):
        session = mushra.create_session(
            session_config(tmp_path, conditions=("a", "b", "c", "d")),
            asset_root=tmp_path,
        )
        orders = {
            tuple(session.presentation_order(f"eval{i}", "trial0"))
            for i in range(10)
        }
        assert len(orders) >= 2


class TestStore:
    def test_submit_and_read_back(self, store, tmp_path):
        session = store.add_session(session_config(tmp_path))
        ack = store.submit("s1", "eva", "trial0", {"gt": 80, "synth": 20})
        assert ack == {"status": "ok", "replaced": False}
        responses = store.responses("s1")
        assert len(responses) == 1
        assert responses[0].scores == {"gt": 80, "synth": 20}
        assert session.conditions == ["gt", "synth"]

    def test_handle_keyed_scores_translated(self, store, tmp_path):
        session = store.add_session(session_config(tmp_path))
        handles = session.presentation_order("eva", "trial0")
        scores = {handles[0]: 70, handles[1]: 30}
        store.submit("s1", "eva", "trial0", scores)
        stored = store.responses("s1")[0]
        assert set(stored.scores) == {"gt", "synth"}

    def test_score_out_of_range_rejected(self, store, tmp_path):
        store.add_session(session_config(tmp_path))
        with pytest.raises(mushra.MushraError, match="out of range"):
            store.submit("s1", "eva", "trial0", {"gt": 101, "synth": 0})

    def test_partial_scores_rejected(self, store, tmp_path):
        store.add_session(session_config(tmp_path))
        with pytest.raises(mushra.MushraError, match="missing scores"):
            store.submit("s1", "eva", "trial0", {"gt": 50})

    def test_unknown_trial_rejected(self, store, tmp_path):
        store.add_session(session_config(tmp_path))
        with pytest.raises(mushra.MushraError, match="unknown trial"):
            store.submit("s1", "eva", "nope", {"gt": 50, "synth": 50})

    def test_non_integer_score_rejected(self, store, tmp_path):
        store.add_session(session_config(tmp_path))
        with pytest.raises(mushra.MushraError, match="integer"):
            store.submit("s1", "eva", "trial0", {"gt": 50.5, "synth": 50})

    def test_duplicate_replaces(self, store, tmp_path):
        store.add_session(session_config(tmp_path))
        store.submit("s1", "eva", "trial0", {"gt": 10, "synth": 20})
        ack = store.submit("s1", "eva", "trial0", {"gt": 90, "synth": 80})
        assert ack["replaced"] is True
        responses = store.responses("s1")
        assert len(responses) == 1
        assert responses[0].scores["gt"] == 90

    def test_persistence_round_trip_bit_identical(self, store, tmp_path):
        store.add_session(session_config(tmp_path))
        store.submit("s1", "eva", "trial0", {"gt": 77, "synth": 23},
                     timestamp="2026-01-01T00:00:00+00:00")
        reloaded = mushra.MushraStore(store.root, asset_root=tmp_path)
        original = [r.to_dict() for r in store.responses("s1")]
        recovered = [r.to_dict() for r in reloaded.responses("s1")]
        assert original == recovered

    def test_next_trial_progression_and_blinding(self, store, tmp_path):
        store.add_session(session_config(tmp_path, n_trials=2))
        first = store.next_trial("s1", "eva")
        assert first["done"] is False
        assert first["trial_id"] == "trial0"
        payload = json.dumps(first)
        assert "gt" not in payload.replace("gt_0", "")  # only via filenames
        for cond in ("gt", "synth"):
            assert cond not in first["stimuli"]
        store.submit("s1", "eva", "trial0", {"gt": 1, "synth": 2})
        second = store.next_trial("s1", "eva")
        assert second["trial_id"] == "trial1"
        store.submit("s1", "eva", "trial1", {"gt": 1, "synth": 2})
        done = store.next_trial("s1", "eva")
        assert done["done"] is True
        assert done["completed"] == 2

    def test_stats_per_condition(self, store, tmp_path):
        store.add_session(session_config(tmp_path, n_trials=3))
        for trial, (a, b) in zip(
            ("trial0", "trial1", "trial2"), ((80, 10), (70, 20), (90, 30))
        ):
            store.submit("s1", "eva", trial, {"gt": a, "synth": b})
        rows = store.stats("s1")
        by_id = {r.condition_id: r for r in rows}
        assert by_id["gt"].rendered == "80.00 ± 24.84"
        assert by_id["synth"].n == 3

    def test_report_rendering(self, store, tmp_path):
        store.add_session(session_config(tmp_path))
        store.submit("s1", "e1", "trial0", {"gt": 50, "synth": 50})
        store.submit("s1", "e2", "trial0", {"gt": 50, "synth": 50})
        text = mushra.render_report(store, "s1")
        assert "50.00 ± 0.00" in text
        assert "hindi-familiar" in text


class TestHttpApi:
    @pytest.fixture
    def client(self, store, tmp_path):
        from fastapi.testclient import TestClient

        store.add_session(session_config(tmp_path, n_trials=2))
        app = mushra.make_app(store)
        return TestClient(app)

    def test_next_trial_blinded(self, client):
        resp = client.get("/api/session/s1/next-trial",
                          params={"evaluator": "eva"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["trial_id"] == "trial0"
        assert len(body["stimuli"]) == 2
        assert "gt" not in json.dumps(body["stimuli"])
        assert "synth" not in json.dumps(body["stimuli"])

    def test_stimulus_streams_audio(self, client):
        trial = client.get("/api/session/s1/next-trial",
                           params={"evaluator": "eva"}).json()
        handle = trial["stimuli"][0]
        resp = client.get(f"/api/stimulus/{handle}")
        assert resp.status_code == 200
        assert resp.content[:4] == b"RIFF"

    def test_unknown_stimulus_404(self, client):
        assert client.get("/api/stimulus/deadbeef").status_code == 404

    def test_rating_flow(self, client):
        trial = client.get("/api/session/s1/next-trial",
                           params={"evaluator": "eva"}).json()
        scores = {handle: 60 for handle in trial["stimuli"]}
        resp = client.post("/api/rating", json={
            "session_id": "s1", "evaluator_id": "eva",
            "trial_id": trial["trial_id"], "scores": scores,
        })
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"
        nxt = client.get("/api/session/s1/next-trial",
                         params={"evaluator": "eva"}).json()
        assert nxt["trial_id"] == "trial1"

    def test_bad_rating_400(self, client):
        resp = client.post("/api/rating", json={
            "session_id": "s1", "evaluator_id": "eva",
            "trial_id": "trial0", "scores": {"bogus": 50},
        })
        assert resp.status_code == 400

    def test_stats_endpoint(self, client):
        trial = client.get("/api/session/s1/next-trial",
                           params={"evaluator": "e1"}).json()
        for ev in ("e1", "e2"):
            client.post("/api/rating", json={
                "session_id": "s1", "evaluator_id": ev,
                "trial_id": trial["trial_id"],
                "scores": {h: 40 for h in trial["stimuli"]},
            })
        resp = client.get("/api/stats/s1")
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert all(row["rendered"] == "40.00 ± 0.00" for row in rows)
