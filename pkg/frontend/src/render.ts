// HTML renderers for the two panels.  Pure string builders: given a UiState
// they return markup, so they are trivially testable and never talk to the
// network.  Probabilities and scores are printed verbatim from the API
// payload — the client does no inference and no rounding of its own.

import { UiState } from "./state.js";

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderCarousel(state: UiState): string {
  const error = state.error && state.error.panel === "ranking" ? state.error : null;
  const parts: string[] = [];
  if (error) {
    parts.push(
      `<div class="error" data-panel="ranking" role="alert">` +
        `<span class="error-message">${esc(error.message)}</span>` +
        `<button type="button" class="retry" data-panel="ranking">Retry</button>` +
        `</div>`,
    );
  }
  if (state.ranking === null) {
    if (!error) {
      parts.push(`<p class="placeholder">Pick a listener to see situations.</p>`);
    }
    return parts.join("");
  }
  if (state.ranking.cold_user) {
    parts.push(`<span class="cold-badge">new listener — defaults in use</span>`);
  }
  const cards = state.ranking.situations
    .map((entry) => {
      const chosen = state.chosen === entry.tag ? " chosen" : "";
      return (
        `<button type="button" class="card${chosen}" data-tag="${esc(entry.tag)}"` +
        ` data-prob="${esc(String(entry.prob))}">` +
        `<span class="card-tag">${esc(entry.tag)}</span>` +
        `<span class="card-prob">${esc(String(entry.prob))}</span>` +
        `</button>`
      );
    })
    .join("");
  parts.push(`<div class="cards">${cards}</div>`);
  return parts.join("");
}

export function renderSession(state: UiState): string {
  const error = state.error && state.error.panel === "session" ? state.error : null;
  const parts: string[] = [];
  if (error) {
    parts.push(
      `<div class="error" data-panel="session" role="alert">` +
        `<span class="error-message">${esc(error.message)}</span>` +
        `<button type="button" class="retry" data-panel="session">Retry</button>` +
        `</div>`,
    );
  }
  if (state.session === null || state.chosen === null) {
    return parts.join("");
  }
  parts.push(`<h2 class="session-title">Session for ${esc(state.chosen)}</h2>`);
  if (state.session.tracks.length === 0) {
    parts.push(`<p class="empty">No tracks available for this situation.</p>`);
    return parts.join("");
  }
  const rows = state.session.tracks
    .map((track) => {
      const marker = track.filled
        ? `<span class="fill-marker" title="popularity fill">fill</span>`
        : "";
      return (
        `<li class="track" data-track="${esc(track.track_id)}"` +
        ` data-filled="${track.filled}">` +
        `<span class="track-id">${esc(track.track_id)}</span>` +
        `<span class="track-score">${esc(String(track.score))}</span>` +
        marker +
        `</li>`
      );
    })
    .join("");
  parts.push(`<ol class="track-list">${rows}</ol>`);
  return parts.join("");
}
