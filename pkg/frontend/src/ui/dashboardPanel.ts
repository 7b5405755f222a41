/**
 * Operator dashboard: fleet table, run state, land-all, safe area
 * editor, topic list, violation alerts and prompt answering.
 */

import { DashboardStore } from "../store.js";
import { SafeAreaDict } from "../wire.js";
import { clear, el, fmt } from "./dom.js";

/** The slice of the socket the panels need; keeps them testable. */
export interface StationClient {
  call(service: string, payload?: Record<string, unknown>): Promise<unknown>;
  publish(topic: string, payload: unknown): boolean;
}

export class DashboardPanel {
  private store: DashboardStore;
  private client: StationClient;
  private fleetBody: HTMLTableSectionElement;
  private statusLine: HTMLElement;
  private alertList: HTMLElement;
  private topicBody: HTMLTableSectionElement;
  private promptBox: HTMLElement;
  private errorBox: HTMLElement;
  private areaInputs: Record<string, HTMLInputElement> = {};
  private areaEnabled: HTMLInputElement;
  private areaNote: HTMLElement;

  constructor(root: HTMLElement, store: DashboardStore, client: StationClient) {
    this.store = store;
    this.client = client;

    this.statusLine = el("div", { class: "status-line", id: "run-status" });
    this.errorBox = el("div", { class: "error-box hidden", id: "error-box" });
    this.promptBox = el("div", { class: "prompt-box hidden", id: "prompt-box" });
    this.alertList = el("div", { class: "alert-list", id: "alert-list" });

    const landBtn = el("button", { class: "danger", id: "land-all" }, ["Land all"]);
    landBtn.addEventListener("click", () => {
      void this.client.call("land_all").catch((err) => this.note(String(err)));
    });

    const fleetTable = el("table", { class: "fleet" });
    fleetTable.append(
      el("thead", {}, [
        el("tr", {}, [
          el("th", {}, ["id"]),
          el("th", {}, ["mode"]),
          el("th", {}, ["x"]),
          el("th", {}, ["y"]),
          el("th", {}, ["z"]),
          el("th", {}, ["battery"]),
          el("th", {}, ["led"]),
        ]),
      ]),
    );
    this.fleetBody = el("tbody");
    fleetTable.append(this.fleetBody);

    this.areaEnabled = el("input", { type: "checkbox", id: "area-enabled" });
    this.areaNote = el("span", { class: "muted", id: "area-note" });
    const areaForm = el("div", { class: "area-form" });
    const axes: Array<[string, string]> = [
      ["min_x", "min x"], ["min_y", "min y"], ["min_z", "min z"],
      ["max_x", "max x"], ["max_y", "max y"], ["max_z", "max z"],
    ];
    for (const [key, label] of axes) {
      const input = el("input", { type: "number", step: "0.5", id: `area-${key}` });
      this.areaInputs[key] = input;
      areaForm.append(el("label", {}, [label, input]));
    }
    const applyBtn = el("button", { id: "area-apply" }, ["Apply"]);
    applyBtn.addEventListener("click", () => void this.applyArea());
    areaForm.append(
      el("label", {}, ["enabled", this.areaEnabled]),
      applyBtn,
      this.areaNote,
    );

    const topicTable = el("table", { class: "topics" });
    topicTable.append(
      el("thead", {}, [
        el("tr", {}, [
          el("th", {}, ["topic"]),
          el("th", {}, ["kind"]),
          el("th", {}, ["publishes"]),
          el("th", {}, ["last t"]),
        ]),
      ]),
    );
    this.topicBody = el("tbody");
    topicTable.append(this.topicBody);
    const refreshBtn = el("button", { id: "topics-refresh" }, ["Refresh topics"]);
    refreshBtn.addEventListener("click", () => void this.refreshTopics());

    root.append(
      el("div", { class: "row" }, [this.statusLine, landBtn]),
      this.errorBox,
      this.promptBox,
      this.alertList,
      el("h3", {}, ["Fleet"]),
      fleetTable,
      el("h3", {}, ["Safe area"]),
      areaForm,
      el("h3", {}, ["Topics"]),
      el("div", { class: "row" }, [refreshBtn]),
      topicTable,
    );

    store.subscribe(() => this.render());
    this.render();
  }

  /** Pull current safe area and topics once the socket is up. */
  async prime(): Promise<void> {
    try {
      const area = (await this.client.call("get_safe_area")) as SafeAreaDict;
      this.showArea(area);
    } catch {
      // leave the form blank; apply still works
    }
    await this.refreshTopics();
  }

  private showArea(area: SafeAreaDict): void {
    const [keys, vals] = [
      ["min_x", "min_y", "min_z"],
      area.min,
    ];
    keys.forEach((k, i) => {
      this.areaInputs[k].value = String(vals[i]);
    });
    ["max_x", "max_y", "max_z"].forEach((k, i) => {
      this.areaInputs[k].value = String(area.max[i]);
    });
    this.areaEnabled.checked = area.enabled;
  }

  private async applyArea(): Promise<void> {
    const num = (key: string): number => {
      const v = parseFloat(this.areaInputs[key].value);
      if (!Number.isFinite(v)) throw new Error(`${key} is not a number`);
      return v;
    };
    try {
      const payload = {
        min: [num("min_x"), num("min_y"), num("min_z")],
        max: [num("max_x"), num("max_y"), num("max_z")],
        enabled: this.areaEnabled.checked,
      };
      const echoed = (await this.client.call("set_safe_area", payload)) as SafeAreaDict;
      this.showArea(echoed);
      this.note("safe area updated");
    } catch (err) {
      this.note(String(err));
    }
  }

  private note(text: string): void {
    this.areaNote.textContent = text;
  }

  private async refreshTopics(): Promise<void> {
    try {
      const result = (await this.client.call("list_topics")) as {
        topics: DashboardStore["topics"];
      };
      this.store.applyTopics(result.topics);
    } catch (err) {
      this.note(String(err));
    }
  }

  private render(): void {
    const s = this.store;
    const t = s.telemetry;
    const time = t === null ? "-" : fmt(t.t, 1);
    const runState = s.running
      ? `running${s.activeBlock !== null ? ` @ ${s.activeBlock}` : ""}`
      : "idle";
    this.statusLine.textContent = `t=${time}s  ${runState}`;

    this.errorBox.classList.toggle("hidden", s.lastError === null);
    if (s.lastError !== null) this.errorBox.textContent = `error: ${s.lastError}`;

    this.renderPrompt();
    this.renderAlerts();
    this.renderFleet();
    this.renderTopics();
  }

  private renderPrompt(): void {
    const prompt = this.store.prompt;
    this.promptBox.classList.toggle("hidden", prompt === null);
    if (prompt === null) {
      clear(this.promptBox);
      return;
    }
    if (this.promptBox.dataset.var === prompt.var) return;
    this.promptBox.dataset.var = prompt.var;
    clear(this.promptBox);
    const input = el("input", { type: "number", step: "any", id: "prompt-value" });
    const send = el("button", { id: "prompt-send" }, ["Answer"]);
    send.addEventListener("click", () => {
      const value = parseFloat(input.value);
      if (!Number.isFinite(value)) return;
      void this.client
        .call("answer_prompt", { value })
        .then(() => this.store.clearPrompt())
        .catch((err) => this.note(String(err)));
    });
    this.promptBox.append(
      el("span", {}, [`${prompt.message} (${prompt.var}): `]),
      input,
      send,
    );
  }

  private renderAlerts(): void {
    clear(this.alertList);
    for (const alert of this.store.alerts) {
      const dismiss = el("button", { class: "dismiss" }, ["x"]);
      dismiss.addEventListener("click", () => this.store.dismissAlert(alert.seq));
      this.alertList.append(
        el("div", { class: "alert", "data-seq": String(alert.seq) }, [
          `safe area violation: drone ${alert.drone} at ` +
            `(${fmt(alert.x)}, ${fmt(alert.y)}, ${fmt(alert.z)}) t=${fmt(alert.t, 1)}s`,
          dismiss,
        ]),
      );
    }
  }

  private renderFleet(): void {
    clear(this.fleetBody);
    const t = this.store.telemetry;
    if (t === null) return;
    for (const row of t.drones) {
      const swatch = el("span", { class: "swatch" });
      swatch.style.backgroundColor = `rgb(${row.r},${row.g},${row.b})`;
      this.fleetBody.append(
        el("tr", { "data-drone": String(row.id) }, [
          el("td", {}, [String(row.id)]),
          el("td", { class: `mode-${row.mode}` }, [row.mode]),
          el("td", {}, [fmt(row.x)]),
          el("td", {}, [fmt(row.y)]),
          el("td", {}, [fmt(row.z)]),
          el("td", {}, [`${Math.round(row.battery * 100)}%`]),
          el("td", {}, [swatch]),
        ]),
      );
    }
  }

  private renderTopics(): void {
    clear(this.topicBody);
    for (const topic of this.store.topics) {
      this.topicBody.append(
        el("tr", {}, [
          el("td", {}, [topic.name]),
          el("td", {}, [topic.message_kind]),
          el("td", {}, [String(topic.publish_count)]),
          el("td", {}, [
            topic.last_publish_sim_time === null ? "-" : fmt(topic.last_publish_sim_time, 1),
          ]),
        ]),
      );
    }
  }
}
