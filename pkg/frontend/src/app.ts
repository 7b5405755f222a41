/**
 * Station UI entry point: one websocket, one store, four panels.
 */

import { StationSocket } from "./socket.js";
import { DashboardStore, PromptState } from "./store.js";
import { DashboardPanel } from "./ui/dashboardPanel.js";
import { getElement } from "./ui/dom.js";
import { EditorPanel } from "./ui/editorPanel.js";
import { FpvPanel } from "./ui/fpvPanel.js";
import { PlayerPanel } from "./ui/playerPanel.js";
import { TelemetryFrame, ViolationEvent } from "./wire.js";

const TABS = ["dashboard", "editor", "fpv", "player"] as const;
type Tab = (typeof TABS)[number];

function wsUrl(): string {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${location.host}/ws`;
}

export function boot(): void {
  const store = new DashboardStore();
  const socket = new StationSocket(wsUrl());

  socket.subscribe("telemetry", (payload) => store.applyTelemetry(payload as TelemetryFrame));
  socket.subscribe("running", (payload) => store.applyRunning(payload === true));
  socket.subscribe("block", (payload) => store.applyBlock(String(payload)));
  socket.subscribe("error", (payload) =>
    store.applyError(payload as { message: string; block: string | null }),
  );
  socket.subscribe("prompt", (payload) => store.applyPrompt(payload as PromptState));
  socket.subscribe("safe_area_violation", (payload) =>
    store.applyViolation(payload as ViolationEvent),
  );

  const dashboard = new DashboardPanel(getElement("panel-dashboard"), store, socket);
  const editor = new EditorPanel(getElement("panel-editor"), socket);
  const fpv = new FpvPanel(getElement("panel-fpv"), store, socket);
  new PlayerPanel(getElement("panel-player"));

  const badge = getElement("conn-badge");
  const renderBadge = () => {
    const state = socket.connectionState;
    let text: string = state;
    if (state === "open" && store.stale) text = "stale";
    badge.textContent = text;
    badge.className = `badge conn-${text}`;
  };
  socket.onState((state) => {
    store.setConnected(state === "open");
    if (state === "open") {
      void dashboard.prime();
      void editor.refreshPrograms();
    }
    renderBadge();
  });
  store.subscribe(renderBadge);
  // Staleness shows up even when no event arrives to trigger a render.
  window.setInterval(renderBadge, 500);

  let active: Tab = "dashboard";
  const show = (tab: Tab) => {
    active = tab;
    for (const name of TABS) {
      getElement(`panel-${name}`).classList.toggle("hidden", name !== tab);
      getElement(`tab-${name}`).classList.toggle("active", name === tab);
    }
    fpv.setVisible(tab === "fpv");
  };
  for (const name of TABS) {
    getElement(`tab-${name}`).addEventListener("click", () => show(name));
  }
  show(active);

  socket.connect();
}

boot();
