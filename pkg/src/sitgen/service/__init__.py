"""Serving layer: offline tag store, real-time ranking, HTTP API."""

from .app import (
    RequestError,
    ServiceConfig,
    ServiceState,
    StateHolder,
    create_app,
    handle_health,
    handle_session,
    handle_situations,
    handle_taxonomy,
    handle_user,
)
from .store import (
    DEFAULT_CAROUSEL_K,
    DEFAULT_SESSION_LENGTH,
    SessionPlan,
    SessionTrack,
    SituationRanking,
    TagStore,
    build_tag_store,
    forest_digest,
    generate_session,
    infer_situations,
    model_digest,
    popularity_tables,
)
from .storeio import read_store, store_to_bytes, write_store

__all__ = [
    "RequestError",
    "ServiceConfig",
    "ServiceState",
    "StateHolder",
    "create_app",
    "handle_health",
    "handle_session",
    "handle_situations",
    "handle_taxonomy",
    "handle_user",
    "DEFAULT_CAROUSEL_K",
    "DEFAULT_SESSION_LENGTH",
    "SessionPlan",
    "SessionTrack",
    "SituationRanking",
    "TagStore",
    "build_tag_store",
    "forest_digest",
    "generate_session",
    "infer_situations",
    "model_digest",
    "popularity_tables",
    "read_store",
    "store_to_bytes",
    "write_store",
]
