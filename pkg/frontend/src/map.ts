// Choropleth layer, station markers, and legend, rendered as one SVG.
// The basemap is an optional tile raster underneath; without a tile URL
// (offline mode) the canvas stays blank and everything still works.

import { BAND_ORDER, NEUTRAL_COLOR, bandLabels, fillFor } from "./bands.js";
import {
  collectionBounds, fitProjection, polygonRings, ringsToPath,
} from "./mercator.js";
import type { StationEntry, ZipCollection, ZipFeature } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface MapCallbacks {
  onZipClick(zip: string): void;
  onStationClick(stationId: string): void;
}

export interface MapHandle {
  svg: SVGSVGElement;
  legend: HTMLElement;
  updateFeatures(collection: ZipCollection): void;
}

export function renderMap(
  container: HTMLElement,
  collection: ZipCollection,
  stations: StationEntry[],
  thresholds: [number, number, number],
  callbacks: MapCallbacks,
  tileUrl: string | null = null,
  width = 800,
  height = 600,
): MapHandle {
  container.replaceChildren();

  const svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "map-canvas");

  const allRings = collection.features.flatMap((f) => polygonRings(f.geometry));
  for (const s of stations) {
    allRings.push([[s.lon, s.lat]]);
  }
  const proj = fitProjection(collectionBounds(allRings), width, height);

  if (tileUrl) {
    svg.appendChild(tileLayer(tileUrl, width, height));
  }

  const zipLayer = document.createElementNS(SVG_NS, "g");
  zipLayer.setAttribute("class", "zip-layer");
  svg.appendChild(zipLayer);

  const drawFeatures = (coll: ZipCollection) => {
    zipLayer.replaceChildren();
    for (const feature of coll.features) {
      zipLayer.appendChild(featurePath(feature, proj, callbacks));
    }
  };
  drawFeatures(collection);

  const stationLayer = document.createElementNS(SVG_NS, "g");
  stationLayer.setAttribute("class", "station-layer");
  for (const station of stations) {
    const marker = document.createElementNS(SVG_NS, "circle");
    marker.setAttribute("class", "station-marker");
    marker.setAttribute("cx", proj.x(station.lon).toFixed(2));
    marker.setAttribute("cy", proj.y(station.lat).toFixed(2));
    marker.setAttribute("r", "5");
    marker.setAttribute("data-station-id", station.station_id);
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = station.name;
    marker.appendChild(title);
    marker.addEventListener("click", () =>
      callbacks.onStationClick(station.station_id));
    stationLayer.appendChild(marker);
  }
  svg.appendChild(stationLayer);
  container.appendChild(svg);

  const legend = renderLegend(collection, thresholds);
  container.appendChild(legend);

  return {
    svg,
    legend,
    updateFeatures(coll: ZipCollection) {
      drawFeatures(coll);
      legend.replaceWith(renderLegend(coll, thresholds));
    },
  };
}

function featurePath(
  feature: ZipFeature,
  proj: ReturnType<typeof fitProjection>,
  callbacks: MapCallbacks,
): SVGPathElement {
  const path = document.createElementNS(SVG_NS, "path") as SVGPathElement;
  const { zip, band, value } = feature.properties;
  path.setAttribute("d", ringsToPath(polygonRings(feature.geometry), proj));
  path.setAttribute("fill", fillFor(band));
  path.setAttribute("class", band === null ? "zip-shape zip-no-data" : "zip-shape");
  path.setAttribute("data-zip", zip);
  path.setAttribute("data-band", band ?? "none");
  if (value !== null) {
    path.setAttribute("data-value", String(value));
  }
  path.addEventListener("click", () => callbacks.onZipClick(zip));
  return path;
}

function renderLegend(
  collection: ZipCollection,
  thresholds: [number, number, number],
): HTMLElement {
  const labels = bandLabels(thresholds);
  const present = new Set(
    collection.features.map((f) => f.properties.band).filter((b) => b !== null));
  const legend = document.createElement("div");
  legend.className = "legend";

  for (const band of BAND_ORDER) {
    const row = document.createElement("div");
    row.className = present.has(band) ? "legend-row" : "legend-row legend-empty";
    row.setAttribute("data-band", band);
    const swatch = document.createElement("span");
    swatch.className = "legend-swatch";
    swatch.style.background = fillFor(band);
    const text = document.createElement("span");
    text.textContent = labels[band];
    row.append(swatch, text);
    legend.appendChild(row);
  }
  const neutral = document.createElement("div");
  neutral.className = "legend-row legend-neutral";
  const swatch = document.createElement("span");
  swatch.className = "legend-swatch";
  swatch.style.background = NEUTRAL_COLOR;
  const text = document.createElement("span");
  text.textContent = "no data";
  neutral.append(swatch, text);
  legend.appendChild(neutral);
  return legend;
}

// Basemap tiles for the projected bbox at a fixed zoom; decorative only.
function tileLayer(template: string, width: number, height: number): SVGGElement {
  const layer = document.createElementNS(SVG_NS, "g") as SVGGElement;
  layer.setAttribute("class", "tile-layer");
  const zoom = 11;
  const n = 4;
  const size = Math.max(width, height) / n;
  for (let dx = 0; dx < n; dx++) {
    for (let dy = 0; dy < n; dy++) {
      const image = document.createElementNS(SVG_NS, "image");
      const url = template
        .replace("{z}", String(zoom))
        .replace("{x}", String(dx))
        .replace("{y}", String(dy));
      image.setAttribute("href", url);
      image.setAttribute("x", String(dx * size));
      image.setAttribute("y", String(dy * size));
      image.setAttribute("width", String(size));
      image.setAttribute("height", String(size));
      layer.appendChild(image);
    }
  }
  return layer;
}
