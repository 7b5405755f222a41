/**
 * Preview player: top-down playback of a run trace with an altitude
 * strip, scrubbing, stepping and local save.
 *
 * Everything drawn comes from scene(trace, index); the panel never keeps
 * derived state of its own beyond the cursor.
 */

import { PlaybackCursor, TraceFormatError, parseTrace, scene } from "../player.js";
import { clear, el, fmt } from "./dom.js";

const VIEW_W = 560;
const VIEW_H = 420;
const ALT_W = 80;
const TICK_MS = 50;

export class PlayerPanel {
  private cursor: PlaybackCursor | null = null;
  private rawText = "";
  private traceName = "";
  private timer: number | null = null;

  private runInput: HTMLInputElement;
  private fileInput: HTMLInputElement;
  private errorBox: HTMLElement;
  private slider: HTMLInputElement;
  private playBtn: HTMLButtonElement;
  private saveBtn: HTMLButtonElement;
  private posLabel: HTMLElement;
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D | null;

  constructor(root: HTMLElement) {
    this.runInput = el("input", { type: "text", id: "trace-run-id", placeholder: "run-001" });
    const fetchBtn = el("button", { id: "trace-fetch" }, ["Fetch trace"]);
    fetchBtn.addEventListener("click", () => void this.fetchTrace());

    this.fileInput = el("input", { type: "file", id: "trace-file", accept: ".jsonl,.json" });
    this.fileInput.addEventListener("change", () => void this.loadFile());

    this.errorBox = el("div", { class: "error-box hidden", id: "trace-error" });

    this.slider = el("input", { type: "range", id: "trace-slider", min: "0", value: "0" });
    this.slider.addEventListener("input", () => {
      if (this.cursor === null) return;
      this.pause();
      this.cursor.seek(parseInt(this.slider.value, 10));
      this.render();
    });

    const back = el("button", { id: "trace-back" }, ["◀"]);
    back.addEventListener("click", () => this.step(-1));
    const fwd = el("button", { id: "trace-fwd" }, ["▶"]);
    fwd.addEventListener("click", () => this.step(1));
    this.playBtn = el("button", { id: "trace-play" }, ["Play"]);
    this.playBtn.addEventListener("click", () => {
      if (this.timer === null) this.play();
      else this.pause();
    });
    this.saveBtn = el("button", { id: "trace-save" }, ["Save local"]);
    this.saveBtn.addEventListener("click", () => this.saveLocal());
    this.posLabel = el("span", { class: "muted", id: "trace-pos" });

    this.canvas = el("canvas", {
      id: "trace-canvas",
      width: String(VIEW_W + ALT_W),
      height: String(VIEW_H),
    });
    this.ctx = this.canvas.getContext("2d");

    root.append(
      el("div", { class: "row" }, [
        el("label", {}, ["run id ", this.runInput]),
        fetchBtn,
        el("label", {}, [" or file ", this.fileInput]),
      ]),
      this.errorBox,
      el("div", { class: "row" }, [back, this.playBtn, fwd, this.slider, this.posLabel, this.saveBtn]),
      this.canvas,
    );
    this.render();
  }

  /** Load trace text; on format errors show the panel and keep state. */
  loadText(text: string, name: string): boolean {
    try {
      const entries = parseTrace(text);
      this.cursor = new PlaybackCursor(entries);
      this.rawText = text;
      this.traceName = name;
      this.slider.max = String(Math.max(0, entries.length - 1));
      this.slider.value = "0";
      this.showError(null);
      this.pause();
      this.render();
      return true;
    } catch (err) {
      if (err instanceof TraceFormatError) {
        this.showError(err.message);
        return false;
      }
      throw err;
    }
  }

  private async fetchTrace(): Promise<void> {
    const runId = this.runInput.value.trim();
    if (runId === "") return;
    try {
      const resp = await fetch(`/api/trace/${encodeURIComponent(runId)}`);
      if (!resp.ok) {
        this.showError(`fetch failed: ${resp.status}`);
        return;
      }
      this.loadText(await resp.text(), `${runId}.trace.jsonl`);
    } catch (err) {
      this.showError(String(err));
    }
  }

  private async loadFile(): Promise<void> {
    const file = this.fileInput.files?.[0];
    if (file === undefined) return;
    this.loadText(await file.text(), file.name);
  }

  private saveLocal(): void {
    if (this.rawText === "") return;
    const blob = new Blob([this.rawText], { type: "application/x-ndjson" });
    const url = URL.createObjectURL(blob);
    const link = el("a", { href: url, download: this.traceName || "trace.jsonl" });
    document.body.append(link);
    link.click();
    link.remove();
    URL.revokeObjectURL(url);
  }

  private showError(message: string | null): void {
    this.errorBox.classList.toggle("hidden", message === null);
    clear(this.errorBox);
    if (message !== null) this.errorBox.textContent = `trace error: ${message}`;
  }

  private step(delta: number): void {
    if (this.cursor === null) return;
    this.pause();
    this.cursor.step(delta);
    this.render();
  }

  private play(): void {
    if (this.cursor === null || this.cursor.length === 0) return;
    if (this.cursor.atEnd) this.cursor.seek(0);
    this.playBtn.textContent = "Pause";
    this.timer = window.setInterval(() => {
      if (this.cursor === null || this.cursor.atEnd) {
        this.pause();
        return;
      }
      this.cursor.step(1);
      this.render();
    }, TICK_MS);
  }

  private pause(): void {
    if (this.timer !== null) {
      window.clearInterval(this.timer);
      this.timer = null;
    }
    this.playBtn.textContent = "Play";
  }

  private render(): void {
    const ctx = this.ctx;
    if (ctx === null) return;
    ctx.fillStyle = "#0b1020";
    ctx.fillRect(0, 0, VIEW_W + ALT_W, VIEW_H);

    if (this.cursor === null || this.cursor.length === 0) {
      ctx.fillStyle = "#8a93a6";
      ctx.fillText("no trace loaded", 20, 30);
      this.posLabel.textContent = "";
      return;
    }

    const view = scene(this.cursor.trace, this.cursor.index);
    if (view === null) return;
    this.slider.value = String(this.cursor.index);
    this.posLabel.textContent =
      `${this.cursor.index + 1}/${this.cursor.length}  t=${fmt(view.t, 2)}s` +
      (view.block === null ? "" : `  @ ${view.block}`);

    const b = view.bounds;
    const scale = Math.min(VIEW_W / (b.maxX - b.minX), VIEW_H / (b.maxY - b.minY));
    const px = (x: number) => (x - b.minX) * scale;
    // World y up, canvas y down.
    const py = (y: number) => VIEW_H - (y - b.minY) * scale;

    ctx.strokeStyle = "#223250";
    ctx.beginPath();
    for (let gx = Math.ceil(b.minX); gx <= Math.floor(b.maxX); gx++) {
      ctx.moveTo(px(gx), 0);
      ctx.lineTo(px(gx), VIEW_H);
    }
    for (let gy = Math.ceil(b.minY); gy <= Math.floor(b.maxY); gy++) {
      ctx.moveTo(0, py(gy));
      ctx.lineTo(VIEW_W, py(gy));
    }
    ctx.stroke();

    const altSlot = ALT_W / Math.max(1, view.drones.length);
    view.drones.forEach((drone, i) => {
      const cx = px(drone.x);
      const cy = py(drone.y);
      ctx.fillStyle = drone.color;
      ctx.beginPath();
      ctx.arc(cx, cy, 6, 0, Math.PI * 2);
      ctx.fill();
      ctx.strokeStyle = drone.color;
      ctx.beginPath();
      ctx.moveTo(cx, cy);
      ctx.lineTo(cx + Math.cos(drone.yaw) * 12, cy - Math.sin(drone.yaw) * 12);
      ctx.stroke();
      ctx.fillStyle = "#c8d2e8";
      ctx.fillText(`${drone.id}`, cx + 8, cy - 8);

      // Altitude strip on the right edge.
      const barH = (drone.z / view.bounds.maxZ) * (VIEW_H - 40);
      const bx = VIEW_W + 10 + i * altSlot;
      ctx.fillStyle = "#223250";
      ctx.fillRect(bx, 20, altSlot - 14, VIEW_H - 40);
      ctx.fillStyle = drone.color;
      ctx.fillRect(bx, 20 + (VIEW_H - 40) - barH, altSlot - 14, barH);
      ctx.fillStyle = "#8a93a6";
      ctx.fillText(fmt(drone.z, 1), bx, VIEW_H - 6);
    });
  }
}
