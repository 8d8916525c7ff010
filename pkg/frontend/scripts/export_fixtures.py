"""Capture wire-level service responses as JSON fixtures for the webui tests.

Runs a small seeded service in-process and writes the exact response bodies
(and one error body) to tests/fixtures/.  The webui test suite validates its
TypeScript types and rendering against these files, so the UI stays coupled
to the real wire format without importing any server code.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from sitgen.datagen.synth import SynthConfig, synth_generate
from sitgen.eval.protocol import sp_design_matrix
from sitgen.gbdt.boosting import SpTrainConfig, sp_train
from sitgen.nn.model import UamatConfig, UamatModel
from sitgen.service.app import ServiceConfig, ServiceState, StateHolder, create_app
from sitgen.service.store import build_tag_store

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
TS = "2019-06-01T10:30:00"


def build_client() -> tuple[TestClient, str]:
    bundle = synth_generate(
        SynthConfig(
            n_users=12, n_tracks=48, n_streams=600, c=4,
            signal_strength=0.9, seed=21, n_mels=16, n_frames=16,
        )
    )
    X, y, vocab = sp_design_matrix(bundle.streams, bundle.demographics)
    forest = sp_train(X, y, SpTrainConfig(rounds=25, max_depth=4), c=4)
    model = UamatModel.build(
        UamatConfig(c=4, n_mels=16, n_frames=16, user_dim=8, width=0.25, init_seed=3)
    )
    users = sorted({s.user for s in bundle.streams})
    tracks = sorted({s.track for s in bundle.streams})
    rng = np.random.default_rng(9)
    embeddings = {u: rng.normal(size=8).astype(np.float32) for u in users}
    store = build_tag_store(
        model, tracks, users, bundle.audio, embeddings,
        labeled_streams=bundle.streams,
    )
    state = ServiceState.assemble(
        forest=forest, vocab=vocab, demographics=bundle.demographics,
        tag_store=store, config=ServiceConfig(),
    )
    # A zero-floor twin keeps model-scored (unfilled) rows in the playlist,
    # so fixtures cover both values of the `filled` flag.
    state_zero = ServiceState.assemble(
        forest=forest, vocab=vocab, demographics=bundle.demographics,
        tag_store=store, config=ServiceConfig(floor=0.0),
    )
    return (
        TestClient(create_app(StateHolder(state))),
        TestClient(create_app(StateHolder(state_zero))),
        users[0],
    )


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    client, client_zero, user = build_client()

    def dump(name: str, payload: object) -> None:
        path = FIXTURE_DIR / name
        path.write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote {path}")

    r = client.get(
        "/v1/situations",
        params={"user": user, "device": "mobile", "network": "wifi", "ts": TS, "k": 3},
    )
    assert r.status_code == 200, r.text
    situations = r.json()
    dump("situations.json", situations)

    top = situations["situations"][0]["tag"]
    r = client.post(
        "/v1/session",
        json={
            "user": user, "device": "mobile", "network": "wifi",
            "ts": TS, "k": 3, "n": 5, "situation": top,
        },
    )
    assert r.status_code == 200, r.text
    dump("session.json", r.json())

    r = client_zero.post(
        "/v1/session",
        json={
            "user": user, "device": "mobile", "network": "wifi",
            "ts": TS, "k": 3, "n": 5, "situation": top,
        },
    )
    assert r.status_code == 200, r.text
    scored = r.json()
    assert any(not t["filled"] for t in scored["tracks"]), "expected unfilled rows"
    dump("session_scored.json", scored)

    r = client.get("/v1/taxonomy")
    assert r.status_code == 200, r.text
    dump("taxonomy.json", r.json())

    r = client.get("/v1/situations", params={"device": "mobile", "network": "wifi"})
    assert r.status_code == 400, r.text
    dump("error.json", r.json())


if __name__ == "__main__":
    main()
