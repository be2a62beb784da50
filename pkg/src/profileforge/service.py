"""HTTP replay service for the editor.

Serves a read-only store of construction sequences and replays them with
continuous parameter overrides.  Every request works on an immutable store
snapshot and replay is pure, so identical requests give identical bodies
and concurrent replays never share state.
"""

from __future__ import annotations

import json
import sys
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .interpreter import ReplayTrace, replay, trace_to_json
from .model import (
    ConstructionSequence,
    list_parameters,
    sequence_from_json,
    sequence_to_json,
)
from .profile import Profile, profile_to_json
from .quantization import PARAM_DOMAINS, override_error
from .svgout import profile_to_svg


class SequenceStore:
    """id -> sequence map from a directory of .json files.

    reload() builds the whole map before swapping it in, so requests only
    ever observe a complete store version.
    """

    def __init__(self, root: str):
        root_path = Path(root)
        nested = root_path / "sequences"
        self.root = nested if nested.is_dir() else root_path
        self._lock = threading.Lock()
        self._snapshot: dict[str, ConstructionSequence] = {}
        self.reload()

    def reload(self) -> None:
        fresh: dict[str, ConstructionSequence] = {}
        for path in sorted(self.root.glob("*.json")):
            try:
                fresh[path.stem] = sequence_from_json(json.loads(path.read_text()))
            except (OSError, ValueError, KeyError) as exc:
                print(f"sequence store: skipping {path}: {exc}", file=sys.stderr)
        with self._lock:
            self._snapshot = fresh

    def snapshot(self) -> dict[str, ConstructionSequence]:
        with self._lock:
            return self._snapshot


class ReplayRequest(BaseModel):
    overrides: dict[str, float] = Field(default_factory=dict)


def parameter_table(seq: ConstructionSequence) -> list[dict]:
    table = []
    for p in list_parameters(seq):
        lo, hi = PARAM_DOMAINS[p.kind]
        table.append({"index": p.index, "kind": p.kind, "value": p.value, "min": lo, "max": hi})
    return table


def _checked_overrides(seq: ConstructionSequence, raw: dict[str, float]) -> dict[int, float]:
    params = {p.index: p for p in list_parameters(seq)}
    overrides: dict[int, float] = {}
    for key, value in raw.items():
        try:
            index = int(key)
        except ValueError:
            raise HTTPException(400, f"parameter index {key!r} is not an integer")
        if index not in params:
            raise HTTPException(400, f"unknown parameter index {index}")
        problem = override_error(params[index].kind, value)
        if problem:
            raise HTTPException(400, f"parameter {index}: {problem}")
        overrides[index] = value
    return overrides


def _replay_payload(profile: Profile, trace: ReplayTrace) -> dict:
    return {
        "profile": profile_to_json(profile),
        "svg": profile_to_svg(profile),
        "trace": trace_to_json(trace),
        "steps": [
            {"index": r.index, "kind": r.kind, "ok": r.ok, "error": r.error}
            for r in trace.records
        ],
    }


def create_app(data_dir: str) -> FastAPI:
    app = FastAPI(title="profileforge replay service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SequenceStore(data_dir)
    app.state.store = store

    def _get(sequence_id: str) -> ConstructionSequence:
        seq = store.snapshot().get(sequence_id)
        if seq is None:
            raise HTTPException(404, f"no sequence {sequence_id!r}")
        return seq

    @app.get("/sequences")
    def sequences() -> dict:
        snap = store.snapshot()
        return {
            "sequences": [
                {
                    "id": sid,
                    "steps": len(seq.construction_steps()),
                    "parameters": len(list_parameters(seq)),
                }
                for sid, seq in sorted(snap.items())
            ]
        }

    @app.get("/sequences/{sequence_id}")
    def sequence_detail(sequence_id: str) -> dict:
        seq = _get(sequence_id)
        profile, trace = replay(seq)
        payload = _replay_payload(profile, trace)
        payload.update(
            {
                "id": sequence_id,
                "sequence": sequence_to_json(seq),
                "parameters": parameter_table(seq),
            }
        )
        return payload

    @app.post("/sequences/{sequence_id}/replay")
    def sequence_replay(sequence_id: str, request: ReplayRequest) -> dict:
        seq = _get(sequence_id)
        overrides = _checked_overrides(seq, request.overrides)
        profile, trace = replay(seq, overrides)
        return _replay_payload(profile, trace)

    return app
