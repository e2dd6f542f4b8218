// Wire types mirroring the railestate HTTP API bodies.

export type BandId =
  | "under_400k"
  | "from_400k_to_500k"
  | "from_500k_to_600k"
  | "over_600k";

export interface ZipProperties {
  zip: string;
  value: number | null;
  band: BandId | null;
}

export interface ZipFeature {
  type: "Feature";
  geometry: {
    type: "Polygon" | "MultiPolygon";
    coordinates: number[][][] | number[][][][];
  };
  properties: ZipProperties;
}

export interface ZipCollection {
  type: "FeatureCollection";
  features: ZipFeature[];
}

export interface LineInfo {
  line_id: string;
  name: string;
  color_tag: string;
}

export interface StationEntry {
  station_id: string;
  name: string;
  lat: number;
  lon: number;
  lines: LineInfo[];
  zip: string | null;
}

export interface SeriesPoint {
  month: string; // YYYY-MM
  value: number;
}

export interface TrendSummary {
  first_month: string;
  last_month: string;
  first_value: number;
  last_value: number;
  total_change_pct: number;
  mean_monthly_change_pct: number;
}

export interface SeriesBody {
  zip: string;
  series: SeriesPoint[];
  percent_series: SeriesPoint[];
  summary: TrendSummary | null;
}

export interface PredictionRow {
  zip: string;
  base_month: string;
  horizon_months: number;
  month: string;
  predicted_value: number;
}

export interface ForecastBody {
  zip: string;
  predictions: PredictionRow[];
}

export interface NearbyStation {
  station_id: string;
  name: string;
  distance_m: number;
}

export interface StationContextBody {
  station: { station_id: string; name: string; lat: number; lon: number };
  lines: LineInfo[];
  zip: string | null;
  series: SeriesPoint[];
  summary: TrendSummary | null;
  nearby: NearbyStation[];
}

export type AnswerStatus = "ok" | "out_of_scope" | "no_data" | "error";

export interface AskBody {
  text: string;
  sql: string;
  status: AnswerStatus;
}

export type ChartMode = "absolute" | "percent";

export interface ChatEntry {
  question: string;
  answer: AskBody | null; // null while in flight
  failed: boolean;
}
