// Thin REST client over the engine's session API. Every method returns the
// engine payload untouched; 4xx bodies are surfaced verbatim as EngineError.

import type {
  ApiError,
  BundleDoc,
  ForecastResponse,
  Metrics,
  RetrospectResponse,
  ScenarioDoc,
  SessionCreated,
  SimEventDoc,
  SimulateResponse,
  TracePage,
} from "./types.js";

export class EngineError extends Error {
  readonly status: number;
  readonly body: ApiError;

  constructor(status: number, body: ApiError) {
    super(`${body.code ?? status}: ${body.message ?? "engine error"}`);
    this.status = status;
    this.body = body;
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  const text = await response.text();
  const body = text ? JSON.parse(text) : {};
  if (!response.ok) {
    throw new EngineError(response.status, body as ApiError);
  }
  return body as T;
}

export class EngineClient {
  constructor(readonly base: string) {}

  createSession(bundle: BundleDoc): Promise<SessionCreated> {
    return request(this.base, "/sessions", {
      method: "POST",
      body: JSON.stringify(bundle),
    });
  }

  getModel(session: string): Promise<BundleDoc> {
    return request(this.base, `/sessions/${session}/model`);
  }

  putScenario(session: string, draft: ScenarioDoc): Promise<{ valid: boolean; problems: string[] }> {
    return request(this.base, `/sessions/${session}/scenario`, {
      method: "PUT",
      body: JSON.stringify(draft),
    });
  }

  simulate(session: string, horizon: number, scenario?: string): Promise<SimulateResponse> {
    return request(this.base, `/sessions/${session}/simulate`, {
      method: "POST",
      body: JSON.stringify(scenario ? { horizon, scenario } : { horizon }),
    });
  }

  trace(session: string, run: string, diagram: string, page = 0, pageSize = 500): Promise<TracePage> {
    const query = `?diagram=${encodeURIComponent(diagram)}&page=${page}&page_size=${pageSize}`;
    return request(this.base, `/sessions/${session}/runs/${run}/trace${query}`);
  }

  events(session: string, run: string): Promise<{ events: SimEventDoc[] }> {
    return request(this.base, `/sessions/${session}/runs/${run}/events`);
  }

  forecast(
    session: string,
    body: {
      partialDiagram: string;
      initial?: Record<string, string>;
      pool?: number;
      rules?: string[];
      resourcePriority?: boolean;
    },
  ): Promise<ForecastResponse> {
    return request(this.base, `/sessions/${session}/forecast`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  retrospect(
    session: string,
    body: {
      diagram: string;
      interval: [number, number];
      snapshots: number[];
      classifier?: string;
      records?: { source: string; object: string; parameter: string; tick: number; value: number }[];
    },
  ): Promise<RetrospectResponse> {
    return request(this.base, `/sessions/${session}/retrospect`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }
}

export type { Metrics };
