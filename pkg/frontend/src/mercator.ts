// Minimal Web Mercator projection fitted to a lon-lat bounding box.

export interface Projection {
  x(lon: number): number;
  y(lat: number): number;
  width: number;
  height: number;
}

const MAX_LAT = 85.05112878;

function mercY(lat: number): number {
  const clamped = Math.max(-MAX_LAT, Math.min(MAX_LAT, lat));
  const rad = (clamped * Math.PI) / 180;
  return Math.log(Math.tan(Math.PI / 4 + rad / 2));
}

export function fitProjection(
  lonLatBounds: [number, number, number, number], // minLon, minLat, maxLon, maxLat
  width: number,
  height: number,
  padding = 12,
): Projection {
  const [minLon, minLat, maxLon, maxLat] = lonLatBounds;
  const y0 = mercY(minLat);
  const y1 = mercY(maxLat);
  const spanX = Math.max(maxLon - minLon, 1e-9);
  const spanY = Math.max(y1 - y0, 1e-9);
  const scale = Math.min(
    (width - 2 * padding) / spanX,
    (height - 2 * padding) / spanY,
  );
  const offsetX = (width - scale * spanX) / 2;
  const offsetY = (height - scale * spanY) / 2;
  return {
    width,
    height,
    x: (lon) => offsetX + (lon - minLon) * scale,
    y: (lat) => height - offsetY - (mercY(lat) - y0) * scale,
  };
}

export function collectionBounds(
  rings: Iterable<number[][]>,
): [number, number, number, number] {
  let minLon = Infinity, minLat = Infinity, maxLon = -Infinity, maxLat = -Infinity;
  for (const ring of rings) {
    for (const pt of ring) {
      const [lon, lat] = pt as [number, number];
      if (lon < minLon) minLon = lon;
      if (lon > maxLon) maxLon = lon;
      if (lat < minLat) minLat = lat;
      if (lat > maxLat) maxLat = lat;
    }
  }
  if (!isFinite(minLon)) return [-1, -1, 1, 1];
  return [minLon, minLat, maxLon, maxLat];
}

export function polygonRings(geometry: {
  type: string;
  coordinates: number[][][] | number[][][][];
}): number[][][] {
  if (geometry.type === "Polygon") {
    return geometry.coordinates as number[][][];
  }
  return (geometry.coordinates as number[][][][]).flat();
}

export function ringsToPath(rings: number[][][], proj: Projection): string {
  const parts: string[] = [];
  for (const ring of rings) {
    ring.forEach((pt, i) => {
      const [lon, lat] = pt as [number, number];
      parts.push(`${i === 0 ? "M" : "L"}${proj.x(lon).toFixed(2)},${proj.y(lat).toFixed(2)}`);
    });
    parts.push("Z");
  }
  return parts.join("");
}
