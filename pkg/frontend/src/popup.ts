// Click popups for ZIPs and stations. One container, one active popup:
// opening a new one replaces the old. Every displayed number comes from
// an API body; the popup only formats.

import type { ApiClient } from "./api.js";
import { renderChart } from "./chart.js";
import type { StationEntry, TrendSummary } from "./types.js";

export interface PopupContext {
  api: ApiClient;
  container: HTMLElement;
  stations: StationEntry[]; // the /stations snapshot, for ZIP->station links
  openStation(id: string): void;
}

function money(value: number): string {
  return `$${value.toLocaleString("en-US", {
    minimumFractionDigits: 2, maximumFractionDigits: 2 })}`;
}

function summaryBlock(summary: TrendSummary | null): HTMLElement {
  const div = document.createElement("div");
  div.className = "popup-summary";
  if (!summary) {
    div.textContent = "Not enough history for a trend summary.";
    return div;
  }
  const sign = summary.total_change_pct >= 0 ? "+" : "";
  div.textContent =
    `${summary.first_month} → ${summary.last_month}: ` +
    `${sign}${summary.total_change_pct.toFixed(1)}% total, ` +
    `${summary.mean_monthly_change_pct.toFixed(2)}%/month average`;
  return div;
}

function popupShell(ctx: PopupContext, title: string): HTMLElement {
  ctx.container.replaceChildren();
  const popup = document.createElement("div");
  popup.className = "popup";
  const heading = document.createElement("h2");
  heading.className = "popup-title";
  heading.textContent = title;
  const close = document.createElement("button");
  close.className = "popup-close";
  close.type = "button";
  close.textContent = "×";
  close.addEventListener("click", () => ctx.container.replaceChildren());
  popup.append(close, heading);
  ctx.container.appendChild(popup);
  return popup;
}

function errorText(popup: HTMLElement, message: string): void {
  const div = document.createElement("div");
  div.className = "popup-error";
  div.textContent = message;
  popup.appendChild(div);
}

export async function openZipPopup(ctx: PopupContext, zip: string): Promise<void> {
  const popup = popupShell(ctx, `ZIP ${zip}`);
  try {
    const [series, forecast] = await Promise.all([
      ctx.api.series(zip),
      ctx.api.forecast(zip),
    ]);

    const price = document.createElement("div");
    price.className = "popup-price";
    const latest = series.series[series.series.length - 1];
    price.textContent = latest
      ? `Average price (${latest.month}): ${money(latest.value)}`
      : "No price history.";
    popup.appendChild(price);

    popup.appendChild(summaryBlock(series.summary));
    popup.appendChild(renderChart(
      series.series, series.percent_series, forecast.predictions).root);

    const nearby = ctx.stations.filter((s) => s.zip === zip);
    if (nearby.length > 0) {
      const list = document.createElement("ul");
      list.className = "popup-links";
      for (const station of nearby) {
        const item = document.createElement("li");
        const link = document.createElement("a");
        link.href = "#";
        link.className = "station-link";
        link.setAttribute("data-station-id", station.station_id);
        link.textContent = station.name;
        link.addEventListener("click", (ev) => {
          ev.preventDefault();
          ctx.openStation(station.station_id);
        });
        item.appendChild(link);
        list.appendChild(item);
      }
      popup.appendChild(list);
    }
  } catch {
    errorText(popup, "Could not load ZIP details; try again.");
  }
}

export async function openStationPopup(ctx: PopupContext, id: string): Promise<void> {
  const popup = popupShell(ctx, "Station");
  try {
    const context = await ctx.api.stationContext(id);
    const title = popup.querySelector(".popup-title");
    if (title) title.textContent = context.station.name;

    const zipLine = document.createElement("div");
    zipLine.className = "popup-zip";
    zipLine.textContent = context.zip
      ? `Enclosing ZIP: ${context.zip}`
      : "Outside all known ZIP boundaries";
    popup.appendChild(zipLine);

    const lines = document.createElement("div");
    lines.className = "popup-lines";
    lines.textContent = context.lines.length
      ? `Lines: ${context.lines.map((l) => l.name).join(", ")}`
      : "No line assignments";
    popup.appendChild(lines);

    popup.appendChild(summaryBlock(context.summary));

    let predictions: Awaited<ReturnType<ApiClient["forecast"]>>["predictions"] = [];
    let percent: Awaited<ReturnType<ApiClient["series"]>>["percent_series"] = [];
    if (context.zip) {
      const [seriesBody, forecastBody] = await Promise.all([
        ctx.api.series(context.zip),
        ctx.api.forecast(context.zip),
      ]);
      predictions = forecastBody.predictions;
      percent = seriesBody.percent_series;
    }
    popup.appendChild(renderChart(context.series, percent, predictions).root);

    const list = document.createElement("ul");
    list.className = "popup-links";
    for (const station of context.nearby) {
      const item = document.createElement("li");
      const link = document.createElement("a");
      link.href = "#";
      link.className = "station-link";
      link.setAttribute("data-station-id", station.station_id);
      link.textContent = `${station.name} (${Math.round(station.distance_m)} m)`;
      link.addEventListener("click", (ev) => {
        ev.preventDefault();
        ctx.openStation(station.station_id);
      });
      item.appendChild(link);
      list.appendChild(item);
    }
    popup.appendChild(list);
  } catch {
    errorText(popup, "Could not load station details; try again.");
  }
}
