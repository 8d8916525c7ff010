// Controller wiring the selectors, the situation carousel, and the session
// view together.  Each panel keeps at most one request in flight: starting a
// newer request aborts the one it supersedes.  All server-driven state flows
// through the history log (see state.ts), so the UI never invents values.

import { ServiceClient, SessionRequest, SituationQuery } from "./api.js";
import { renderCarousel, renderSession } from "./render.js";
import { applyEntry, HistoryEntry, initialState, UiState } from "./state.js";

export interface AppConfig {
  carouselK: number;
  sessionLength: number;
}

export const DEFAULT_CONFIG: AppConfig = { carouselK: 3, sessionLength: 10 };

function isAbort(err: unknown): boolean {
  return (
    typeof err === "object" &&
    err !== null &&
    (err as { name?: unknown }).name === "AbortError"
  );
}

function messageOf(err: unknown): string {
  if (err instanceof Error && err.message) {
    return err.message;
  }
  return "service unavailable";
}

const SHELL = `
<form class="controls" autocomplete="off">
  <label>Listener <input id="user" type="text" placeholder="u00000"></label>
  <label>Device
    <select id="device">
      <option value="mobile">mobile</option>
      <option value="desktop">desktop</option>
      <option value="tablet">tablet</option>
    </select>
  </label>
  <label>Network
    <select id="network">
      <option value="wifi">wifi</option>
      <option value="mobile">mobile</option>
      <option value="lan">lan</option>
      <option value="plane">plane</option>
    </select>
  </label>
  <label>Clock override <input id="clock" type="datetime-local"></label>
  <label>Session length <input id="length" type="number" min="1" value="10"></label>
  <button id="refresh" type="button">Refresh</button>
</form>
<section id="carousel" class="panel"></section>
<section id="session" class="panel"></section>
`;

export class App {
  state: UiState = initialState();
  readonly history: HistoryEntry[] = [];

  private rankingAbort: AbortController | null = null;
  private sessionAbort: AbortController | null = null;
  private lastChosenTag: string | null = null;

  private readonly carouselEl: HTMLElement;
  private readonly sessionEl: HTMLElement;
  private readonly userEl: HTMLInputElement;
  private readonly deviceEl: HTMLSelectElement;
  private readonly networkEl: HTMLSelectElement;
  private readonly clockEl: HTMLInputElement;
  private readonly lengthEl: HTMLInputElement;

  constructor(
    root: HTMLElement,
    private readonly client: ServiceClient,
    private readonly config: AppConfig = DEFAULT_CONFIG,
  ) {
    root.innerHTML = SHELL;
    this.carouselEl = root.querySelector("#carousel") as HTMLElement;
    this.sessionEl = root.querySelector("#session") as HTMLElement;
    this.userEl = root.querySelector("#user") as HTMLInputElement;
    this.deviceEl = root.querySelector("#device") as HTMLSelectElement;
    this.networkEl = root.querySelector("#network") as HTMLSelectElement;
    this.clockEl = root.querySelector("#clock") as HTMLInputElement;
    this.lengthEl = root.querySelector("#length") as HTMLInputElement;
    this.lengthEl.value = String(config.sessionLength);

    const refetch = () => void this.refreshRanking();
    this.userEl.addEventListener("change", refetch);
    this.deviceEl.addEventListener("change", refetch);
    this.networkEl.addEventListener("change", refetch);
    this.clockEl.addEventListener("change", refetch);
    (root.querySelector("#refresh") as HTMLButtonElement).addEventListener(
      "click",
      refetch,
    );

    this.carouselEl.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const card = target.closest(".card");
      if (card instanceof HTMLElement && card.dataset.tag) {
        void this.chooseSituation(card.dataset.tag);
        return;
      }
      if (target.closest(".retry")) {
        void this.refreshRanking();
      }
    });
    this.sessionEl.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      if (target.closest(".retry") && this.lastChosenTag !== null) {
        void this.chooseSituation(this.lastChosenTag);
      }
    });
    this.renderPanels();
  }

  private currentQuery(): SituationQuery {
    return {
      user: this.userEl.value.trim(),
      device: this.deviceEl.value,
      network: this.networkEl.value,
      ts: this.clockEl.value === "" ? null : this.clockEl.value,
      k: this.config.carouselK,
    };
  }

  private push(entry: HistoryEntry): void {
    this.history.push(entry);
    this.state = applyEntry(this.state, entry);
    this.renderPanels();
  }

  private renderPanels(): void {
    this.carouselEl.innerHTML = renderCarousel(this.state);
    this.sessionEl.innerHTML = renderSession(this.state);
  }

  async refreshRanking(): Promise<void> {
    const query = this.currentQuery();
    if (query.user === "") {
      return;
    }
    this.rankingAbort?.abort();
    const ctl = new AbortController();
    this.rankingAbort = ctl;
    try {
      const response = await this.client.situations(query, ctl.signal);
      if (ctl !== this.rankingAbort) {
        return;
      }
      this.push({ kind: "situations", query, response });
    } catch (err) {
      if (ctl !== this.rankingAbort || isAbort(err)) {
        return;
      }
      this.push({
        kind: "failure",
        panel: "ranking",
        message: messageOf(err),
        query,
      });
    } finally {
      if (ctl === this.rankingAbort) {
        this.rankingAbort = null;
      }
    }
  }

  async chooseSituation(tag: string): Promise<void> {
    const query = this.currentQuery();
    if (query.user === "") {
      return;
    }
    const length = Number(this.lengthEl.value);
    const request: SessionRequest = {
      user: query.user,
      device: query.device,
      network: query.network,
      ts: query.ts,
      k: query.k,
      n: Number.isInteger(length) && length > 0 ? length : this.config.sessionLength,
      situation: tag,
    };
    this.lastChosenTag = tag;
    this.sessionAbort?.abort();
    const ctl = new AbortController();
    this.sessionAbort = ctl;
    try {
      const response = await this.client.session(request, ctl.signal);
      if (ctl !== this.sessionAbort) {
        return;
      }
      this.push({ kind: "session", request, response });
    } catch (err) {
      if (ctl !== this.sessionAbort || isAbort(err)) {
        return;
      }
      this.push({
        kind: "failure",
        panel: "session",
        message: messageOf(err),
        request,
      });
    } finally {
      if (ctl === this.sessionAbort) {
        this.sessionAbort = null;
      }
    }
  }
}
