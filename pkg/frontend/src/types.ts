// Wire types for the situational-sessions HTTP API, plus runtime guards.
// The guards are exercised against captured response fixtures in the test
// suite, which is the only coupling between this client and the server code.

export interface SituationEntry {
  tag: string;
  prob: number;
}

export interface SituationsResponse {
  situations: SituationEntry[];
  cold_user: boolean;
}

export interface TrackRow {
  track_id: string;
  score: number;
  filled: boolean;
}

export interface SessionResponse {
  situations: SituationEntry[];
  situation: string;
  tracks: TrackRow[];
  cold_user: boolean;
}

export interface TaxonomyResponse {
  c: number;
  situations: string[];
}

export interface ErrorResponse {
  error: string;
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

export function isSituationEntry(value: unknown): value is SituationEntry {
  return (
    isRecord(value) &&
    typeof value.tag === "string" &&
    typeof value.prob === "number" &&
    Number.isFinite(value.prob)
  );
}

export function isSituationsResponse(value: unknown): value is SituationsResponse {
  return (
    isRecord(value) &&
    Array.isArray(value.situations) &&
    value.situations.every(isSituationEntry) &&
    typeof value.cold_user === "boolean"
  );
}

export function isTrackRow(value: unknown): value is TrackRow {
  return (
    isRecord(value) &&
    typeof value.track_id === "string" &&
    typeof value.score === "number" &&
    Number.isFinite(value.score) &&
    typeof value.filled === "boolean"
  );
}

export function isSessionResponse(value: unknown): value is SessionResponse {
  return (
    isRecord(value) &&
    Array.isArray(value.situations) &&
    value.situations.every(isSituationEntry) &&
    typeof value.situation === "string" &&
    Array.isArray(value.tracks) &&
    value.tracks.every(isTrackRow) &&
    typeof value.cold_user === "boolean"
  );
}

export function isTaxonomyResponse(value: unknown): value is TaxonomyResponse {
  return (
    isRecord(value) &&
    typeof value.c === "number" &&
    Number.isInteger(value.c) &&
    Array.isArray(value.situations) &&
    value.situations.every((s) => typeof s === "string")
  );
}

export function isErrorResponse(value: unknown): value is ErrorResponse {
  return isRecord(value) && typeof value.error === "string";
}
