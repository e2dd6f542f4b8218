// Band palette and legend labels. Any four-step sequential palette with a
// distinct neutral works; labels derive from the active thresholds so the
// legend stays honest when thresholds are reconfigured.

import type { BandId } from "./types.js";

export const BAND_ORDER: BandId[] = [
  "under_400k",
  "from_400k_to_500k",
  "from_500k_to_600k",
  "over_600k",
];

export const BAND_COLORS: Record<BandId, string> = {
  under_400k: "#fee5d9",
  from_400k_to_500k: "#fcae91",
  from_500k_to_600k: "#fb6a4a",
  over_600k: "#cb181d",
};

export const NEUTRAL_COLOR = "#d4d4d4";

function short(n: number): string {
  if (n >= 1_000_000 && n % 100_000 === 0) return `$${n / 1_000_000}M`;
  if (n % 1_000 === 0) return `$${n / 1_000}k`;
  return `$${n.toLocaleString("en-US")}`;
}

export function bandLabels(thresholds: [number, number, number]): Record<BandId, string> {
  const [a, b, c] = thresholds;
  return {
    under_400k: `< ${short(a)}`,
    from_400k_to_500k: `${short(a)} – ${short(b)}`,
    from_500k_to_600k: `${short(b)} – ${short(c)}`,
    over_600k: `> ${short(c)}`,
  };
}

export function fillFor(band: BandId | null): string {
  return band === null ? NEUTRAL_COLOR : BAND_COLORS[band];
}
