"""MUSHRA listening-test backend: sessions, blinded stimuli, response
storage, and mean ± 95% confidence-interval statistics.

Evaluators see only opaque stimulus handles; condition identities stay on the
server. Responses append to a line-delimited log so the store recovers by
replay; a duplicate (evaluator, trial) submission replaces the earlier answer.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import random
import threading
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from scipy import stats as _scipy_stats

logger = logging.getLogger(__name__)

AXES = {
    "naturalness": (
        "Rate how natural each sample sounds, that is, whether it could have "
        "been spoken by humans, ignoring accent and background noise, on a "
        "scale from 0 to 100."
    ),
    "accentedness": (
        "Rate the strength of the accent in each sample on a scale from "
        "0 to 100."
    ),
}


class MushraError(ValueError):
    """Invalid session configuration or rating submission."""


@dataclass
class Trial:
    trial_id: str
    stimuli: dict[str, str]  # condition_id -> audio path


@dataclass
class MushraSession:
    session_id: str
    axis: str
    conditions: list[str]
    trials: list[Trial]
    group_label: str = ""
    seed: int = 0
    status: str = "open"
    # handle -> (trial_id, condition_id); filled at creation
    handles: dict[str, tuple[str, str]] = field(default_factory=dict)

    @property
    def instruction(self) -> str:
        return AXES[self.axis]

    def handle_of(self, trial_id: str, condition_id: str) -> str:
        digest = hashlib.sha256(
            f"{self.seed}:{self.session_id}:{trial_id}:{condition_id}"
            .encode("utf-8")
        ).hexdigest()[:16]
        return digest

    def presentation_order(self, evaluator_id: str,
                           trial_id: str) -> list[str]:
        """Seeded per-evaluator permutation of the trial's stimulus handles."""
        conditions = list(self.conditions)
        rng = random.Random(f"{self.seed}:{evaluator_id}:{trial_id}")
        rng.shuffle(conditions)
        return [self.handle_of(trial_id, c) for c in conditions]

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "axis": self.axis,
            "conditions": self.conditions,
            "trials": [asdict(t) for t in self.trials],
            "group_label": self.group_label,
            "seed": self.seed,
            "status": self.status,
        }


@dataclass
class MushraResponse:
    session_id: str
    evaluator_id: str
    trial_id: str
    scores: dict[str, int]  # condition_id -> score 0..100
    timestamp: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MushraStats:
    condition_id: str
    n: int
    mean: float
    ci_half_width: float

    @property
    def rendered(self) -> str:
        return f"{self.mean:.2f} ± {self.ci_half_width:.2f}"


def compute_stats(scores: Iterable[float],
                  condition_id: str = "") -> MushraStats:
    """Mean and two-sided 95% t-interval half-width over raw scores."""
    values = [float(s) for s in scores]
    n = len(values)
    if n < 2:
        raise MushraError(f"need at least 2 scores for a CI, got {n}")
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    sd = math.sqrt(var)
    t_crit = float(_scipy_stats.t.ppf(0.975, n - 1))
    return MushraStats(
        condition_id=condition_id, n=n, mean=mean,
        ci_half_width=t_crit * sd / math.sqrt(n),
    )


def condition_stats(responses: Iterable[MushraResponse],
                    condition_id: str) -> MushraStats:
    """Pool every (evaluator, trial) score for one condition."""
    scores = [
        resp.scores[condition_id]
        for resp in responses if condition_id in resp.scores
    ]
    return compute_stats(scores, condition_id=condition_id)


def create_session(config: dict, asset_root: str | Path | None = None
                   ) -> MushraSession:
    """Validate a session config and derive the stimulus handle map."""
    axis = config.get("axis")
    if axis not in AXES:
        raise MushraError(f"axis must be one of {sorted(AXES)}, got {axis!r}")
    conditions = list(config.get("conditions", []))
    if len(conditions) < 2:
        raise MushraError("need at least 2 conditions")
    if len(set(conditions)) != len(conditions):
        raise MushraError("duplicate condition ids")
    trials_cfg = config.get("trials", [])
    if not trials_cfg:
        raise MushraError("need at least 1 trial")

    root = Path(asset_root) if asset_root is not None else None
    trials = []
    for cfg in trials_cfg:
        stimuli = dict(cfg["stimuli"])
        if set(stimuli) != set(conditions):
            raise MushraError(
                f"trial {cfg['trial_id']} must present every condition "
                f"exactly once; got {sorted(stimuli)}"
            )
        for cond, path in stimuli.items():
            if root is not None and not (root / path).exists():
                raise MushraError(
                    f"trial {cfg['trial_id']}: missing stimulus {path} "
                    f"for condition {cond}"
                )
        trials.append(Trial(trial_id=cfg["trial_id"], stimuli=stimuli))

    session = MushraSession(
        session_id=config["session_id"],
        axis=axis,
        conditions=conditions,
        trials=trials,
        group_label=config.get("group_label", ""),
        seed=int(config.get("seed", 0)),
    )
    for trial in trials:
        for cond in conditions:
            session.handles[session.handle_of(trial.trial_id, cond)] = (
                trial.trial_id, cond,
            )
    return session


class MushraStore:
    """Disk-backed session and response store.

    Layout: ``<root>/<session_id>.session.json`` plus an append-only
    ``<root>/<session_id>.responses.jsonl``; a consolidated snapshot can be
    written on demand. Writes are serialized by a lock.
    """

    def __init__(self, root: str | Path, asset_root: str | Path | None = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.asset_root = Path(asset_root) if asset_root else self.root
        self._lock = threading.Lock()
        self.sessions: dict[str, MushraSession] = {}
        # (session, evaluator, trial) -> MushraResponse, last write wins
        self._responses: dict[tuple[str, str, str], MushraResponse] = {}
        self._load()

    def _load(self) -> None:
        for path in sorted(self.root.glob("*.session.json")):
            config = json.loads(path.read_text(encoding="utf-8"))
            session = create_session(config, asset_root=self.asset_root)
            session.status = config.get("status", "open")
            self.sessions[session.session_id] = session
        for path in sorted(self.root.glob("*.responses.jsonl")):
            for line in path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                record = json.loads(line)
                resp = MushraResponse(**record)
                key = (resp.session_id, resp.evaluator_id, resp.trial_id)
                self._responses[key] = resp

    def add_session(self, config: dict) -> MushraSession:
        session = create_session(config, asset_root=self.asset_root)
        if session.session_id in self.sessions:
            raise MushraError(f"session {session.session_id} already exists")
        path = self.root / f"{session.session_id}.session.json"
        path.write_text(
            json.dumps(session.to_dict(), ensure_ascii=False, indent=2),
            encoding="utf-8",
        )
        self.sessions[session.session_id] = session
        return session

    def session(self, session_id: str) -> MushraSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise MushraError(f"unknown session {session_id!r}") from None

    def resolve_handle(self, handle: str) -> tuple[MushraSession, str, str]:
        for session in self.sessions.values():
            if handle in session.handles:
                trial_id, cond = session.handles[handle]
                return session, trial_id, cond
        raise MushraError(f"unknown stimulus handle {handle!r}")

    def stimulus_path(self, handle: str) -> Path:
        session, trial_id, cond = self.resolve_handle(handle)
        trial = next(t for t in session.trials if t.trial_id == trial_id)
        return self.asset_root / trial.stimuli[cond]

    def responses(self, session_id: str) -> list[MushraResponse]:
        return [
            resp for (sid, _, _), resp in sorted(self._responses.items())
            if sid == session_id
        ]

    def next_trial(self, session_id: str, evaluator_id: str) -> dict:
        """The first unanswered trial for this evaluator, stimuli in their
        seeded order. Exposes handles only, never condition ids."""
        session = self.session(session_id)
        answered = {
            trial for (sid, ev, trial) in self._responses
            if sid == session_id and ev == evaluator_id
        }
        total = len(session.trials)
        for trial in session.trials:
            if trial.trial_id in answered:
                continue
            return {
                "done": False,
                "session_id": session_id,
                "trial_id": trial.trial_id,
                "axis": session.axis,
                "instruction": session.instruction,
                "stimuli": session.presentation_order(
                    evaluator_id, trial.trial_id),
                "completed": len(answered),
                "total": total,
            }
        return {"done": True, "session_id": session_id,
                "completed": len(answered), "total": total}

    def submit(self, session_id: str, evaluator_id: str, trial_id: str,
               scores: dict[str, int], timestamp: str | None = None) -> dict:
        """Validate and store one rating; handle-keyed scores are translated
        to condition ids before storage."""
        session = self.session(session_id)
        if session.status != "open":
            raise MushraError(f"session {session_id} is closed")
        trial = next(
            (t for t in session.trials if t.trial_id == trial_id), None
        )
        if trial is None:
            raise MushraError(f"unknown trial {trial_id!r}")

        by_condition: dict[str, int] = {}
        for key, value in scores.items():
            if key in session.handles:
                h_trial, cond = session.handles[key]
                if h_trial != trial_id:
                    raise MushraError(
                        f"stimulus {key} does not belong to trial {trial_id}"
                    )
            elif key in session.conditions:
                cond = key
            else:
                raise MushraError(f"unknown stimulus or condition {key!r}")
            if not isinstance(value, int) or isinstance(value, bool):
                raise MushraError(f"score for {key} must be an integer")
            if not 0 <= value <= 100:
                raise MushraError(f"score {value} out of range [0, 100]")
            by_condition[cond] = value
        missing = set(session.conditions) - set(by_condition)
        if missing:
            raise MushraError(f"missing scores for conditions {sorted(missing)}")

        response = MushraResponse(
            session_id=session_id,
            evaluator_id=evaluator_id,
            trial_id=trial_id,
            scores=by_condition,
            timestamp=timestamp or datetime.now(timezone.utc).isoformat(),
        )
        key = (session_id, evaluator_id, trial_id)
        with self._lock:
            replaced = key in self._responses
            if replaced:
                logger.info(
                    "replacing response %s/%s/%s", *key
                )
            log = self.root / f"{session_id}.responses.jsonl"
            with open(log, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(response.to_dict(), ensure_ascii=False))
                fh.write("\n")
            self._responses[key] = response
        return {"status": "ok", "replaced": replaced}

    def snapshot(self, session_id: str) -> Path:
        """Write a consolidated JSON snapshot of the session's responses."""
        path = self.root / f"{session_id}.snapshot.json"
        payload = [r.to_dict() for r in self.responses(session_id)]
        path.write_text(
            json.dumps(payload, ensure_ascii=False, indent=2),
            encoding="utf-8",
        )
        return path

    def stats(self, session_id: str) -> list[MushraStats]:
        """Rows for every condition with enough scores for a CI (n >= 2);
        use pending_conditions() for the rest."""
        session = self.session(session_id)
        responses = self.responses(session_id)
        rows = []
        for cond in session.conditions:
            try:
                rows.append(condition_stats(responses, cond))
            except MushraError:
                continue
        return rows

    def pending_conditions(self, session_id: str) -> dict[str, int]:
        """Condition -> score count, for conditions not yet statable."""
        session = self.session(session_id)
        responses = self.responses(session_id)
        counts = {
            cond: sum(1 for r in responses if cond in r.scores)
            for cond in session.conditions
        }
        return {cond: n for cond, n in counts.items() if n < 2}


def render_report(store: MushraStore, session_id: str) -> str:
    """Table of per-condition statistics in ``MM.MM ± H.HH`` form."""
    session = store.session(session_id)
    lines = [
        f"session {session_id}  axis={session.axis}  "
        f"group={session.group_label or '-'}",
        f"{'condition':<32} {'n':>5}  score",
    ]
    for row in store.stats(session_id):
        lines.append(f"{row.condition_id:<32} {row.n:>5}  {row.rendered}")
    for cond, n in store.pending_conditions(session_id).items():
        lines.append(f"{cond:<32} {n:>5}  (insufficient responses)")
    return "\n".join(lines)


def make_app(store: MushraStore, static_dir: str | Path | None = None):
    """FastAPI app exposing the evaluator-facing API.

    Evaluator-facing payloads never contain condition identifiers.
    """
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import FileResponse
    from fastapi.staticfiles import StaticFiles

    app = FastAPI(title="listening-test service")

    @app.get("/api/session/{session_id}/next-trial")
    def next_trial(session_id: str, evaluator: str):
        try:
            return store.next_trial(session_id, evaluator)
        except MushraError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/api/stimulus/{handle}")
    def stimulus(handle: str):
        try:
            path = store.stimulus_path(handle)
        except MushraError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        if not path.exists():
            raise HTTPException(status_code=404, detail="stimulus file missing")
        return FileResponse(path, media_type="audio/wav")

    @app.post("/api/rating")
    def rating(body: dict):
        try:
            return store.submit(
                session_id=body["session_id"],
                evaluator_id=body["evaluator_id"],
                trial_id=body["trial_id"],
                scores=body["scores"],
                timestamp=body.get("timestamp"),
            )
        except KeyError as exc:
            raise HTTPException(status_code=400,
                                detail=f"missing field {exc}")
        except MushraError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/api/stats/{session_id}")
    def stats(session_id: str):
        try:
            rows = store.stats(session_id)
            pending = store.pending_conditions(session_id)
        except MushraError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {
            "session_id": session_id,
            "rows": [
                {"condition_id": r.condition_id, "n": r.n, "mean": r.mean,
                 "ci_half_width": r.ci_half_width, "rendered": r.rendered}
                for r in rows
            ],
            "pending": pending,
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")
    return app
