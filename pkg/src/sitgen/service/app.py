"""HTTP serving layer: situation ranking and session generation.

Handlers are plain functions over an immutable ``ServiceState`` snapshot;
the FastAPI layer only parses transport. Reloads swap the snapshot held by
``StateHolder`` atomically, so every request sees one consistent
(forest, store, demographics) triple.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..domain import (
    TIMESTAMP_FORMAT,
    Demographics,
    DeviceSnapshot,
    DeviceType,
    NetworkType,
    Situation,
    TaxonomySubset,
)
from ..features.encoders import CountryVocab
from ..gbdt.boosting import SpForest
from .store import (
    DEFAULT_CAROUSEL_K,
    DEFAULT_SESSION_LENGTH,
    SessionPlan,
    TagStore,
    forest_digest,
    generate_session,
    infer_situations,
)


class RequestError(ValueError):
    """Client error carrying an HTTP status code."""

    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass(frozen=True)
class ServiceConfig:
    floor: float | None = None  # None → 1/C at request time
    default_k: int = DEFAULT_CAROUSEL_K
    default_n: int = DEFAULT_SESSION_LENGTH


@dataclass(frozen=True)
class ServiceState:
    forest: SpForest
    vocab: CountryVocab
    demographics: dict[str, Demographics]
    tag_store: TagStore | None = None
    config: ServiceConfig = field(default_factory=ServiceConfig)
    model_hashes: dict[str, str] = field(default_factory=dict)

    @classmethod
    def assemble(
        cls,
        forest: SpForest,
        vocab: CountryVocab,
        demographics: dict[str, Demographics],
        tag_store: TagStore | None = None,
        config: ServiceConfig = ServiceConfig(),
    ) -> "ServiceState":
        hashes = {"sp": forest_digest(forest)}
        if tag_store is not None:
            hashes["uamat"] = tag_store.model_hash
            hashes["tag_store"] = tag_store.store_hash()
        return cls(
            forest=forest,
            vocab=vocab,
            demographics=demographics,
            tag_store=tag_store,
            config=config,
            model_hashes=hashes,
        )


class StateHolder:
    """Mutable cell whose swap is atomic; handlers read it exactly once."""

    def __init__(self, state: ServiceState):
        self._state = state

    @property
    def state(self) -> ServiceState:
        return self._state

    def swap(self, new_state: ServiceState) -> None:
        self._state = new_state


# ---- parsing helpers ----


def _parse_snapshot(
    device: str, network: str, ts: str | None
) -> DeviceSnapshot:
    try:
        device_type = DeviceType(device)
    except ValueError:
        raise RequestError(400, f"unknown device type {device!r}")
    try:
        network_type = NetworkType(network)
    except ValueError:
        raise RequestError(400, f"unknown network type {network!r}")
    if ts is None:
        stamp = datetime.now()
    else:
        try:
            stamp = datetime.strptime(ts, TIMESTAMP_FORMAT)
        except ValueError:
            raise RequestError(
                400, f"timestamp {ts!r} not in format {TIMESTAMP_FORMAT}"
            )
    return DeviceSnapshot.at(stamp, device_type, network_type)


def _parse_k(state: ServiceState, k: int | None) -> int:
    k = state.config.default_k if k is None else k
    if not 1 <= k <= state.forest.c:
        raise RequestError(400, f"k must be in [1, {state.forest.c}], got {k}")
    return k


def _session_payload(plan: SessionPlan) -> list[dict[str, Any]]:
    return [
        {"track_id": t.track_id, "score": t.score, "filled": t.filled}
        for t in plan.tracks
    ]


# ---- handlers (transport-free; latency is measured on these directly) ----


def handle_health(state: ServiceState) -> dict[str, Any]:
    return {"status": "ok", "model_hashes": dict(state.model_hashes)}


def handle_situations(
    state: ServiceState,
    user: str,
    device: str,
    network: str,
    ts: str | None = None,
    k: int | None = None,
) -> dict[str, Any]:
    if not user:
        raise RequestError(400, "user is required")
    snap = _parse_snapshot(device, network, ts)
    ranking = infer_situations(
        state.forest, state.vocab, state.demographics, user, snap, _parse_k(state, k)
    )
    return {
        "situations": [
            {"tag": s.value, "prob": p} for s, p in ranking.entries
        ],
        "cold_user": ranking.cold_user,
    }


def handle_session(state: ServiceState, body: dict[str, Any]) -> dict[str, Any]:
    if state.tag_store is None:
        raise RequestError(503, "no tag store loaded")
    if not isinstance(body, dict):
        raise RequestError(400, "body must be a JSON object")
    user = body.get("user")
    if not user or not isinstance(user, str):
        raise RequestError(400, "user is required")
    device = body.get("device")
    network = body.get("network")
    if not isinstance(device, str) or not isinstance(network, str):
        raise RequestError(400, "device and network are required")
    snap = _parse_snapshot(device, network, body.get("ts"))
    k = _parse_k(state, body.get("k"))
    n = body.get("n", state.config.default_n)
    if not isinstance(n, int) or n < 1:
        raise RequestError(400, f"n must be a positive integer, got {n!r}")

    ranking = infer_situations(
        state.forest, state.vocab, state.demographics, user, snap, k
    )
    chosen = body.get("situation")
    if chosen is None:
        situation = ranking.entries[0][0]
    else:
        try:
            situation = Situation(chosen)
        except ValueError:
            raise RequestError(400, f"unknown situation {chosen!r}")
        if situation.index >= state.tag_store.c:
            raise RequestError(
                400,
                f"situation {chosen!r} outside the store's subset "
                f"C={state.tag_store.c}",
            )
    plan = generate_session(
        state.tag_store, user, situation, n=n, floor=state.config.floor
    )
    return {
        "situations": [
            {"tag": s.value, "prob": p} for s, p in ranking.entries
        ],
        "situation": situation.value,
        "tracks": _session_payload(plan),
        "cold_user": ranking.cold_user or plan.cold_user,
    }


def handle_user(state: ServiceState, user_id: str) -> dict[str, Any]:
    return {
        "user": user_id,
        "demographics_known": user_id in state.demographics,
        "embedding_available": (
            state.tag_store.has_user(user_id)
            if state.tag_store is not None
            else False
        ),
    }


def handle_taxonomy(state: ServiceState) -> dict[str, Any]:
    subset = TaxonomySubset(state.forest.c)
    return {
        "c": state.forest.c,
        "situations": [s.value for s in subset.members],
    }


# ---- FastAPI wiring ----


def create_app(holder: StateHolder) -> FastAPI:
    app = FastAPI(title="situational-sessions", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestError)
    async def _request_error(_request: Request, exc: RequestError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    @app.get("/v1/health")
    def health():
        return handle_health(holder.state)

    @app.get("/v1/taxonomy")
    def taxonomy():
        return handle_taxonomy(holder.state)

    @app.get("/v1/situations")
    def situations(
        user: str = "",
        device: str = "mobile",
        network: str = "wifi",
        ts: str | None = None,
        k: int | None = None,
    ):
        return handle_situations(holder.state, user, device, network, ts, k)

    @app.post("/v1/session")
    async def session(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise RequestError(400, "body must be valid JSON")
        return handle_session(holder.state, body)

    @app.get("/v1/users/{user_id}")
    def user(user_id: str):
        return handle_user(holder.state, user_id)

    return app
