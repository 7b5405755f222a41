/**
 * First-person panel: drone picker, keyboard capture and the synthetic
 * viewport (horizon, floor grid, peer billboards) drawn from telemetry.
 */

import { FPV_KEYS, FpvController, fpvScene } from "../fpv.js";
import { DashboardStore } from "../store.js";
import { TelemetryRow } from "../wire.js";
import { StationClient } from "./dashboardPanel.js";
import { clear, el, fmt } from "./dom.js";

const VIEW_W = 640;
const VIEW_H = 400;

export class FpvPanel {
  readonly controller: FpvController;
  private store: DashboardStore;
  private select: HTMLSelectElement;
  private badge: HTMLElement;
  private overlay: HTMLElement;
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D | null;
  private visible = false;

  constructor(root: HTMLElement, store: DashboardStore, client: StationClient) {
    this.store = store;
    this.controller = new FpvController((cmd) => {
      client.publish("manual_cmd", cmd);
    });

    this.select = el("select", { id: "fpv-drone" });
    this.select.addEventListener("change", () => {
      const id = parseInt(this.select.value, 10);
      this.controller.selectDrone(Number.isInteger(id) ? id : null);
      this.render();
    });
    this.badge = el("span", { class: "badge hidden", id: "fpv-badge" }, ["landed"]);
    this.overlay = el("div", { class: "fpv-overlay", id: "fpv-overlay" });

    this.canvas = el("canvas", {
      id: "fpv-canvas",
      width: String(VIEW_W),
      height: String(VIEW_H),
      tabindex: "0",
    });
    this.ctx = this.canvas.getContext("2d");

    root.append(
      el("div", { class: "row" }, [
        el("label", {}, ["drone ", this.select]),
        this.badge,
        el("span", { class: "muted" }, [
          "W/S forward, A/D strafe, R/F climb, Q/E yaw; keys act while the view has focus",
        ]),
      ]),
      el("div", { class: "fpv-frame" }, [this.canvas, this.overlay]),
    );

    this.canvas.addEventListener("keydown", (ev) => {
      if (ev.repeat) {
        if (FPV_KEYS.includes(ev.code)) ev.preventDefault();
        return;
      }
      if (this.controller.keyDown(ev.code)) ev.preventDefault();
    });
    this.canvas.addEventListener("keyup", (ev) => {
      if (this.controller.keyUp(ev.code)) ev.preventDefault();
    });
    this.canvas.addEventListener("blur", () => this.controller.releaseAll());

    store.subscribe(() => this.update());
    this.update();
  }

  /** Panels that are hidden stop drawing and drop held keys. */
  setVisible(visible: boolean): void {
    this.visible = visible;
    if (!visible) this.controller.releaseAll();
    else this.update();
  }

  private selectedRow(): TelemetryRow | null {
    const id = this.controller.selectedDrone;
    return id === null ? null : this.store.drone(id);
  }

  private update(): void {
    const t = this.store.telemetry;
    if (t !== null) {
      const want = t.drones.map((d) => String(d.id));
      const have = Array.from(this.select.options).map((o) => o.value);
      if (want.join(",") !== have.join(",")) {
        clear(this.select);
        for (const id of want) this.select.append(el("option", { value: id }, [`drone ${id}`]));
        if (this.controller.selectedDrone === null && want.length > 0) {
          this.select.value = want[0];
          this.controller.selectDrone(parseInt(want[0], 10));
        }
      }
    }

    const row = this.selectedRow();
    if (row !== null) {
      this.controller.updateYaw(row.yaw);
      const landed = row.mode === "landed" || row.mode === "landing";
      this.controller.setEnabled(!landed);
      this.badge.classList.toggle("hidden", !landed);
      this.badge.textContent = row.mode === "landing" ? "landing" : "landed";
    }
    if (this.visible) this.render();
  }

  private render(): void {
    const ctx = this.ctx;
    if (ctx === null) return;
    const row = this.selectedRow();

    ctx.fillStyle = "#0b1020";
    ctx.fillRect(0, 0, VIEW_W, VIEW_H);
    if (row === null) {
      ctx.fillStyle = "#8a93a6";
      ctx.fillText("no telemetry", 20, 30);
      this.overlay.textContent = "";
      return;
    }

    const peers = (this.store.telemetry?.drones ?? []).filter((d) => d.id !== row.id);
    const scene = fpvScene(
      { x: row.x, y: row.y, z: row.z, yaw: row.yaw },
      peers.map((d) => ({ id: d.id, x: d.x, y: d.y, z: d.z, r: d.r, g: d.g, b: d.b })),
    );

    // Normalised scene x in [-1, 1] maps to the full canvas width.
    const sx = (x: number) => VIEW_W / 2 + (x * VIEW_W) / 2;
    const sy = (y: number) => VIEW_H / 2 + (y * VIEW_W) / 2;

    const horizon = sy(scene.horizonY);
    ctx.fillStyle = "#13203c";
    ctx.fillRect(0, 0, VIEW_W, Math.max(0, horizon));
    ctx.fillStyle = "#101826";
    ctx.fillRect(0, Math.max(0, horizon), VIEW_W, VIEW_H);
    ctx.strokeStyle = "#3c4a66";
    ctx.beginPath();
    ctx.moveTo(0, horizon);
    ctx.lineTo(VIEW_W, horizon);
    ctx.stroke();

    ctx.strokeStyle = "#223250";
    ctx.beginPath();
    for (const seg of scene.grid) {
      ctx.moveTo(sx(seg.x1), sy(seg.y1));
      ctx.lineTo(sx(seg.x2), sy(seg.y2));
    }
    ctx.stroke();

    for (const peer of scene.billboards) {
      const size = peer.size * VIEW_W;
      ctx.fillStyle = peer.color;
      ctx.fillRect(sx(peer.x) - size / 2, sy(peer.y) - size / 2, size, size);
      ctx.fillStyle = "#c8d2e8";
      ctx.fillText(String(peer.id), sx(peer.x) + size / 2 + 2, sy(peer.y));
    }

    const held = Array.from(this.controller.heldKeys)
      .map((k) => k.replace("Key", ""))
      .join(" ");
    this.overlay.textContent =
      `drone ${row.id}  ${row.mode}  ` +
      `x ${fmt(row.x)}  y ${fmt(row.y)}  z ${fmt(row.z)}  ` +
      `yaw ${fmt(row.yaw)}  batt ${Math.round(row.battery * 100)}%` +
      (held === "" ? "" : `  [${held}]`);
  }
}
