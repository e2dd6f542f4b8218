// Thin typed client over the railestate HTTP API. Every number shown in
// the UI originates from one of these bodies.

import type {
  AskBody, ForecastBody, SeriesBody, StationContextBody, StationEntry,
  ZipCollection,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) {
      throw new ApiError(resp.status, `GET ${path} -> ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  zips(month?: string | null, thresholds?: string | null): Promise<ZipCollection> {
    const params = new URLSearchParams();
    if (month) params.set("month", month);
    if (thresholds) params.set("thresholds", thresholds);
    const qs = params.toString();
    return this.get<ZipCollection>(`/zips${qs ? "?" + qs : ""}`);
  }

  stations(): Promise<StationEntry[]> {
    return this.get<StationEntry[]>("/stations");
  }

  series(zip: string): Promise<SeriesBody> {
    return this.get<SeriesBody>(`/zips/${encodeURIComponent(zip)}/series`);
  }

  forecast(zip: string): Promise<ForecastBody> {
    return this.get<ForecastBody>(`/zips/${encodeURIComponent(zip)}/forecast`);
  }

  stationContext(id: string): Promise<StationContextBody> {
    return this.get<StationContextBody>(
      `/stations/${encodeURIComponent(id)}/context`);
  }

  async ask(question: string): Promise<AskBody> {
    const resp = await fetch(this.baseUrl + "/ask", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ question }),
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, `POST /ask -> ${resp.status}`);
    }
    return (await resp.json()) as AskBody;
  }
}
