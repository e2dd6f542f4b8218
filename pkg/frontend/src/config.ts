// Runtime configuration from URL query parameters.
//
//   ?api=http://host:port   API base (default: same origin)
//   ?month=YYYY-MM          choropleth month (default: latest)
//   ?thresholds=a,b,c       band thresholds in USD
//   ?tiles=<url template>   basemap tile URL ({z}/{x}/{y}); omit for the
//                           blank-canvas offline mode

export interface UiConfig {
  apiBase: string;
  month: string | null;
  thresholds: [number, number, number];
  tileUrl: string | null;
}

export const DEFAULT_THRESHOLDS: [number, number, number] =
  [400_000, 500_000, 600_000];

export function configFrom(search: string): UiConfig {
  const params = new URLSearchParams(search);
  let thresholds = DEFAULT_THRESHOLDS;
  const raw = params.get("thresholds");
  if (raw) {
    const parts = raw.split(",").map(Number);
    if (parts.length === 3 && parts.every((n) => Number.isFinite(n)) &&
        parts[0]! < parts[1]! && parts[1]! < parts[2]!) {
      thresholds = [parts[0]!, parts[1]!, parts[2]!];
    }
  }
  return {
    apiBase: params.get("api") ?? "",
    month: params.get("month"),
    thresholds,
    tileUrl: params.get("tiles"),
  };
}
