// SVG time-series chart with forecast markers and an absolute/percent
// toggle. Both data arrays come from the server; toggling swaps between
// them locally, so no refetch happens and switching back restores the
// original chart exactly.

import type { ChartMode, PredictionRow, SeriesPoint } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChartHandle {
  root: HTMLElement;
  mode(): ChartMode;
  setMode(mode: ChartMode): void;
}

export function renderChart(
  series: SeriesPoint[],
  percentSeries: SeriesPoint[],
  predictions: PredictionRow[],
  initialMode: ChartMode = "absolute",
  width = 360,
  height = 160,
): ChartHandle {
  const root = document.createElement("div");
  root.className = "chart";

  const svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "chart-canvas");
  root.appendChild(svg);

  const toggle = document.createElement("button");
  toggle.className = "chart-toggle";
  toggle.type = "button";
  root.appendChild(toggle);

  let mode: ChartMode = initialMode;

  const draw = () => {
    svg.replaceChildren();
    const points = mode === "absolute" ? series : percentSeries;
    // Forecast markers belong to the absolute scale; the percent view
    // shows history only (the server computes percent for history alone).
    const markers = mode === "absolute" ? predictions : [];
    if (points.length === 0) {
      const empty = document.createElementNS(SVG_NS, "text");
      empty.setAttribute("x", "10");
      empty.setAttribute("y", "20");
      empty.setAttribute("class", "chart-empty");
      empty.textContent = "no history";
      svg.appendChild(empty);
      toggle.textContent = mode === "absolute" ? "show % growth" : "show $ values";
      return;
    }

    const values = points.map((p) => p.value);
    const markerValues = markers.map((m) => m.predicted_value);
    const lo = Math.min(...values, ...(markerValues.length ? markerValues : values));
    const hi = Math.max(...values, ...(markerValues.length ? markerValues : values));
    const span = hi - lo || 1;
    const total = points.length + markers.length;
    const xStep = (width - 20) / Math.max(total - 1, 1);
    const x = (i: number) => 10 + i * xStep;
    const y = (v: number) => height - 14 - ((v - lo) / span) * (height - 28);

    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute("class", "chart-line");
    line.setAttribute("fill", "none");
    line.setAttribute(
      "points",
      points.map((p, i) => `${x(i).toFixed(1)},${y(p.value).toFixed(1)}`).join(" "));
    line.setAttribute("data-first-value", String(points[0]!.value));
    svg.appendChild(line);

    markers.forEach((m, j) => {
      const i = points.length - 1 + (j + 1);
      const cx = x(i);
      const cy = y(m.predicted_value);
      const marker = document.createElementNS(SVG_NS, "path");
      marker.setAttribute("class", "forecast-marker");
      marker.setAttribute(
        "d",
        `M${cx},${cy - 5}L${cx + 5},${cy}L${cx},${cy + 5}L${cx - 5},${cy}Z`);
      marker.setAttribute("data-month", m.month);
      marker.setAttribute("data-horizon", String(m.horizon_months));
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = `${m.month}: $${m.predicted_value.toLocaleString("en-US", {
        minimumFractionDigits: 2, maximumFractionDigits: 2 })}`;
      marker.appendChild(title);
      svg.appendChild(marker);
    });

    const axis = document.createElementNS(SVG_NS, "text");
    axis.setAttribute("x", "10");
    axis.setAttribute("y", String(height - 2));
    axis.setAttribute("class", "chart-axis");
    const last = points[points.length - 1]!;
    axis.textContent = `${points[0]!.month} → ${last.month}`;
    svg.appendChild(axis);

    toggle.textContent = mode === "absolute" ? "show % growth" : "show $ values";
  };

  toggle.addEventListener("click", () => {
    mode = mode === "absolute" ? "percent" : "absolute";
    draw();
  });
  draw();

  return {
    root,
    mode: () => mode,
    setMode(next: ChartMode) {
      if (next !== mode) {
        mode = next;
        draw();
      }
    },
  };
}
