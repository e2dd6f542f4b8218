// Fixture API bodies shaped exactly like the service responses, plus a
// fetch router for offline tests.

import { vi } from "vitest";
import type {
  AskBody, ForecastBody, SeriesBody, StationContextBody, StationEntry,
  ZipCollection,
} from "../src/types.js";

export const CASE_STUDY_QUESTION =
  "What is the highest price in Falls Church in the year 2000?";
export const CASE_STUDY_ANSWER =
  "The highest price in Falls Church in the year 2000 was $308,002.64";

function square(lon: number, lat: number, size = 0.03): number[][][] {
  return [[
    [lon, lat], [lon + size, lat], [lon + size, lat + size],
    [lon, lat + size], [lon, lat],
  ]];
}

// Four ZIPs, one per band, plus one with no data for the active month.
export const ZIPS: ZipCollection = {
  type: "FeatureCollection",
  features: [
    { type: "Feature", geometry: { type: "Polygon", coordinates: square(-77.30, 38.84) },
      properties: { zip: "22003", value: 350_000, band: "under_400k" } },
    { type: "Feature", geometry: { type: "Polygon", coordinates: square(-77.27, 38.84) },
      properties: { zip: "22046", value: 450_000, band: "from_400k_to_500k" } },
    { type: "Feature", geometry: { type: "Polygon", coordinates: square(-77.24, 38.84) },
      properties: { zip: "22201", value: 550_000, band: "from_500k_to_600k" } },
    { type: "Feature", geometry: { type: "Polygon", coordinates: square(-77.21, 38.84) },
      properties: { zip: "22101", value: 650_000, band: "over_600k" } },
    { type: "Feature", geometry: { type: "Polygon", coordinates: square(-77.18, 38.84) },
      properties: { zip: "20190", value: null, band: null } },
  ],
};

export const STATIONS: StationEntry[] = [
  { station_id: "BAL", name: "Ballston", lat: 38.855, lon: -77.235,
    lines: [{ line_id: "ORG", name: "Orange", color_tag: "orange" }], zip: "22201" },
  { station_id: "CLA", name: "Clarendon", lat: 38.857, lon: -77.232,
    lines: [{ line_id: "ORG", name: "Orange", color_tag: "orange" }], zip: "22201" },
  { station_id: "EFC", name: "East Falls Church", lat: 38.855, lon: -77.265,
    lines: [{ line_id: "ORG", name: "Orange", color_tag: "orange" },
            { line_id: "SLV", name: "Silver", color_tag: "silver" }], zip: "22046" },
];

export const SERIES_22201: SeriesBody = {
  zip: "22201",
  series: [
    { month: "2024-01", value: 500_000 },
    { month: "2024-02", value: 510_000 },
    { month: "2024-03", value: 505_000 },
    { month: "2024-04", value: 520_000 },
    { month: "2024-05", value: 540_000 },
    { month: "2024-06", value: 550_000 },
  ],
  percent_series: [
    { month: "2024-01", value: 0.0 },
    { month: "2024-02", value: 2.0 },
    { month: "2024-03", value: 1.0 },
    { month: "2024-04", value: 4.0 },
    { month: "2024-05", value: 8.0 },
    { month: "2024-06", value: 10.0 },
  ],
  summary: {
    first_month: "2024-01", last_month: "2024-06",
    first_value: 500_000, last_value: 550_000,
    total_change_pct: 10.0, mean_monthly_change_pct: 1.93,
  },
};

export const FORECAST_22201: ForecastBody = {
  zip: "22201",
  predictions: [
    { zip: "22201", base_month: "2024-06", horizon_months: 1,
      month: "2024-07", predicted_value: 556_000 },
    { zip: "22201", base_month: "2024-06", horizon_months: 3,
      month: "2024-09", predicted_value: 568_000 },
    { zip: "22201", base_month: "2024-06", horizon_months: 12,
      month: "2025-06", predicted_value: 610_000 },
  ],
};

export const CONTEXT_BAL: StationContextBody = {
  station: { station_id: "BAL", name: "Ballston", lat: 38.855, lon: -77.235 },
  lines: [{ line_id: "ORG", name: "Orange", color_tag: "orange" }],
  zip: "22201",
  series: SERIES_22201.series,
  summary: SERIES_22201.summary,
  nearby: [{ station_id: "CLA", name: "Clarendon", distance_m: 389.0 }],
};

export const CONTEXT_CLA: StationContextBody = {
  station: { station_id: "CLA", name: "Clarendon", lat: 38.857, lon: -77.232 },
  lines: [{ line_id: "ORG", name: "Orange", color_tag: "orange" }],
  zip: "22201",
  series: SERIES_22201.series,
  summary: SERIES_22201.summary,
  nearby: [{ station_id: "BAL", name: "Ballston", distance_m: 389.0 }],
};

export const ASK_OK: AskBody = {
  text: CASE_STUDY_ANSWER,
  sql: 'SELECT MAX("value") AS highest_price FROM "Locations_Prices" '
    + "WHERE \"city\" = 'Falls Church' "
    + "AND \"date\" BETWEEN '2000-01-01' AND '2000-12-31';",
  status: "ok",
};

export const ASK_GUIDANCE: AskBody = {
  text: "I can answer questions about prices, forecasts, and stations.",
  sql: "",
  status: "out_of_scope",
};

export type Router = (path: string, init?: RequestInit) => unknown;

export function defaultRouter(path: string): unknown {
  if (path.startsWith("/zips/22201/series")) return SERIES_22201;
  if (path.startsWith("/zips/22201/forecast")) return FORECAST_22201;
  if (path.startsWith("/zips/22046/series")) return { ...SERIES_22201, zip: "22046" };
  if (path.startsWith("/zips/22046/forecast")) return { ...FORECAST_22201, zip: "22046" };
  if (path.startsWith("/stations/BAL/context")) return CONTEXT_BAL;
  if (path.startsWith("/stations/CLA/context")) return CONTEXT_CLA;
  if (path.startsWith("/zips")) return ZIPS;
  if (path.startsWith("/stations")) return STATIONS;
  throw new Error(`unrouted path: ${path}`);
}

export function mockFetch(router: Router = defaultRouter) {
  const calls: string[] = [];
  const mock = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
    const path = String(url).replace(/^https?:\/\/[^/]+/, "");
    calls.push(path);
    let body: unknown;
    try {
      body = router(path, init);
    } catch {
      return new Response("not found", { status: 404 });
    }
    return new Response(JSON.stringify(body), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  });
  vi.stubGlobal("fetch", mock);
  return { mock, calls };
}

export function flush(): Promise<void> {
  // Let chained promises inside the components settle.
  return new Promise((resolve) => setTimeout(resolve, 0));
}
