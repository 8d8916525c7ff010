// Typed client for the situational-sessions service.  Every method takes an
// optional AbortSignal so callers can cancel a stale request when a newer
// one supersedes it.

import {
  isErrorResponse,
  isSessionResponse,
  isSituationsResponse,
  isTaxonomyResponse,
  SessionResponse,
  SituationsResponse,
  TaxonomyResponse,
} from "./types.js";

export interface SituationQuery {
  user: string;
  device: string;
  network: string;
  ts: string | null;
  k: number;
}

export interface SessionRequest {
  user: string;
  device: string;
  network: string;
  ts: string | null;
  k: number;
  n: number;
  situation: string | null;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function errorMessage(res: Response): Promise<string> {
  try {
    const body: unknown = await res.json();
    if (isErrorResponse(body)) {
      return body.error;
    }
  } catch {
    // fall through to the generic message
  }
  return `request failed with status ${res.status}`;
}

export class ServiceClient {
  private readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  async situations(
    query: SituationQuery,
    signal?: AbortSignal,
  ): Promise<SituationsResponse> {
    const params = new URLSearchParams({
      user: query.user,
      device: query.device,
      network: query.network,
      k: String(query.k),
    });
    if (query.ts !== null) {
      params.set("ts", query.ts);
    }
    const res = await fetch(`${this.baseUrl}/v1/situations?${params.toString()}`, {
      signal,
    });
    if (!res.ok) {
      throw new ApiError(res.status, await errorMessage(res));
    }
    const body: unknown = await res.json();
    if (!isSituationsResponse(body)) {
      throw new ApiError(res.status, "malformed situations payload");
    }
    return body;
  }

  async session(
    request: SessionRequest,
    signal?: AbortSignal,
  ): Promise<SessionResponse> {
    const body: Record<string, unknown> = {
      user: request.user,
      device: request.device,
      network: request.network,
      k: request.k,
      n: request.n,
    };
    if (request.ts !== null) {
      body.ts = request.ts;
    }
    if (request.situation !== null) {
      body.situation = request.situation;
    }
    const res = await fetch(`${this.baseUrl}/v1/session`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (!res.ok) {
      throw new ApiError(res.status, await errorMessage(res));
    }
    const payload: unknown = await res.json();
    if (!isSessionResponse(payload)) {
      throw new ApiError(res.status, "malformed session payload");
    }
    return payload;
  }

  async taxonomy(signal?: AbortSignal): Promise<TaxonomyResponse> {
    const res = await fetch(`${this.baseUrl}/v1/taxonomy`, { signal });
    if (!res.ok) {
      throw new ApiError(res.status, await errorMessage(res));
    }
    const body: unknown = await res.json();
    if (!isTaxonomyResponse(body)) {
      throw new ApiError(res.status, "malformed taxonomy payload");
    }
    return body;
  }
}
