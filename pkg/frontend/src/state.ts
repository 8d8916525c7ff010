// UI state and the request history log.  Every state change caused by a
// completed (or failed) request is recorded as a HistoryEntry and applied
// through applyEntry, so the current state is always the fold of the log
// over the initial state — replay(log) reproduces it exactly.

import { SessionRequest, SituationQuery } from "./api.js";
import { SessionResponse, SituationsResponse } from "./types.js";

export type Panel = "ranking" | "session";

export interface UiState {
  user: string;
  device: string;
  network: string;
  clockOverride: string | null;
  ranking: SituationsResponse | null;
  chosen: string | null;
  session: SessionResponse | null;
  error: { panel: Panel; message: string } | null;
}

export type HistoryEntry =
  | { kind: "situations"; query: SituationQuery; response: SituationsResponse }
  | { kind: "session"; request: SessionRequest; response: SessionResponse }
  | {
      kind: "failure";
      panel: Panel;
      message: string;
      query?: SituationQuery;
      request?: SessionRequest;
    };

export function initialState(): UiState {
  return {
    user: "",
    device: "mobile",
    network: "wifi",
    clockOverride: null,
    ranking: null,
    chosen: null,
    session: null,
    error: null,
  };
}

export function applyEntry(state: UiState, entry: HistoryEntry): UiState {
  if (entry.kind === "situations") {
    return {
      ...state,
      user: entry.query.user,
      device: entry.query.device,
      network: entry.query.network,
      clockOverride: entry.query.ts,
      ranking: entry.response,
      error: null,
    };
  }
  if (entry.kind === "session") {
    return {
      ...state,
      user: entry.request.user,
      device: entry.request.device,
      network: entry.request.network,
      clockOverride: entry.request.ts,
      ranking: {
        situations: entry.response.situations,
        cold_user: entry.response.cold_user,
      },
      chosen: entry.response.situation,
      session: entry.response,
      error: null,
    };
  }
  return { ...state, error: { panel: entry.panel, message: entry.message } };
}

export function replay(log: readonly HistoryEntry[]): UiState {
  return log.reduce(applyEntry, initialState());
}
