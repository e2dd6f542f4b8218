// Boot: load map data, wire map, popup, and chat together.

import { ApiClient } from "./api.js";
import { renderChat } from "./chat.js";
import { configFrom } from "./config.js";
import { renderMap } from "./map.js";
import { openStationPopup, openZipPopup, type PopupContext } from "./popup.js";

export async function boot(root: HTMLElement, search: string = location.search):
    Promise<void> {
  const config = configFrom(search);
  const api = new ApiClient(config.apiBase);

  root.replaceChildren();
  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.hidden = true;
  const mapPane = document.createElement("div");
  mapPane.className = "map-pane";
  const popupPane = document.createElement("div");
  popupPane.className = "popup-pane";
  const chatPane = document.createElement("div");
  chatPane.className = "chat-pane";
  root.append(banner, mapPane, popupPane, chatPane);

  renderChat(chatPane, api);

  try {
    const [collection, stations] = await Promise.all([
      api.zips(config.month, config.thresholds.join(",")),
      api.stations(),
    ]);
    const popupCtx: PopupContext = {
      api,
      container: popupPane,
      stations,
      openStation: (id) => void openStationPopup(popupCtx, id),
    };
    renderMap(mapPane, collection, stations, config.thresholds, {
      onZipClick: (zip) => void openZipPopup(popupCtx, zip),
      onStationClick: (id) => void openStationPopup(popupCtx, id),
    }, config.tileUrl);
  } catch {
    banner.hidden = false;
    banner.textContent =
      "Could not reach the data service; start it with `railestate serve`.";
  }
}

declare global {
  interface Window { __railestateBooted?: boolean }
}

if (typeof document !== "undefined" && document.getElementById("app") &&
    !window.__railestateBooted) {
  window.__railestateBooted = true;
  void boot(document.getElementById("app")!);
}
