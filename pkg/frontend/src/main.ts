import { ApiClient, ApiError } from "./api";
import { Poller } from "./poll";
import { esc, matrixTable, networkSvg, pendingBadges, statsCharts } from "./render";
import type { Snapshot } from "./types";
import { matrixView, networkView, PendingTracker, statsView } from "./viewmodel";

// API base configurable: ?api=http://host:port, else same origin.
const apiBase = new URLSearchParams(location.search).get("api") ?? "";
const api = new ApiClient(apiBase);
const pending = new PendingTracker();

let last: Snapshot | null = null;
let selectedAp: string | null = null;

const $ = <T extends HTMLElement = HTMLElement>(sel: string): T => {
  const el = document.querySelector<T>(sel);
  if (!el) throw new Error(`missing element ${sel}`);
  return el;
};

function showBanner(message: string | null): void {
  const banner = $("#banner");
  banner.textContent = message ?? "";
  banner.classList.toggle("hidden", message === null);
}

function formFeedback(sel: string, message: string, isError: boolean): void {
  const el = $(sel);
  el.textContent = message;
  el.className = isError ? "feedback error" : "feedback";
}

// -- views ----------------------------------------------------------------------

function renderNetwork(snapshot: Snapshot): void {
  $("#network-graph").innerHTML = networkSvg(networkView(snapshot));
  $("#pending").innerHTML = pendingBadges(pending.badges());

  const params = snapshot.params;
  for (const name of [
    "alpha",
    "scan_interval",
    "hysteresis",
    "load_penalty_beta",
    "stale_scans_limit",
    "scan_duration",
  ] as const) {
    const input = document.querySelector<HTMLInputElement>(`input[data-param="${name}"]`);
    if (input && document.activeElement !== input) {
      input.value = String(params[name]);
    }
    const pendingMark = document.querySelector(`[data-param-pending="${name}"]`);
    if (pendingMark) {
      const queued = params.pending[name];
      pendingMark.textContent = queued === undefined ? "" : `queued: ${queued}`;
    }
  }
}

function renderClients(snapshot: Snapshot): void {
  const hostOf = new Map(snapshot.stations.map((s) => [s.mac, s.host]));
  const rows = [...snapshot.clients]
    .sort((a, b) => a.mac.localeCompare(b.mac))
    .map((c) => {
      const host = hostOf.get(c.mac);
      const badge = pending.has(`handoff:${c.mac}`)
        ? `<span class="badge">pending</span>`
        : "";
      const action = c.connected
        ? `<button data-handoff="${esc(c.mac)}">handoff…</button> ${badge}`
        : "";
      return (
        `<tr class="${c.connected ? "" : "offline"}">` +
        `<td>${esc(c.mac)}</td><td>${esc(c.bssid)}</td>` +
        `<td>${host ? esc(host) : "–"}</td>` +
        `<td>${c.connected ? "connected" : "disconnected"}</td>` +
        `<td>${c.first_seen.toFixed(1)}s</td><td>${c.last_seen.toFixed(1)}s</td>` +
        `<td>${action}</td></tr>`
      );
    })
    .join("");
  $("#clients-table tbody").innerHTML =
    rows || `<tr><td colspan="7" class="empty">no clients seen yet</td></tr>`;
}

function renderApOptions(snapshot: Snapshot): void {
  const select = $<HTMLSelectElement>("#stats-ap");
  const current = select.value;
  select.innerHTML = snapshot.agents
    .map((a) => `<option value="${esc(a.ip)}">${esc(a.ip)} (ch ${a.channel})</option>`)
    .join("");
  if (snapshot.agents.some((a) => a.ip === current)) {
    select.value = current;
  }
  selectedAp = select.value || null;

  const dialogTarget = $<HTMLSelectElement>("#handoff-target");
  dialogTarget.innerHTML = select.innerHTML;
}

async function renderStats(snapshot: Snapshot): Promise<void> {
  if (!selectedAp) {
    $("#stats-charts").innerHTML = `<p class="empty">no access points connected</p>`;
    return;
  }
  const agent = snapshot.agents.find((a) => a.ip === selectedAp);
  if (!agent) return;
  try {
    const report = await api.scan(agent.ip, agent.channel);
    $("#stats-charts").innerHTML = statsCharts(statsView(report, snapshot.matrix));
  } catch (err) {
    $("#stats-charts").innerHTML = `<p class="empty">scan failed: ${esc(String(err))}</p>`;
  }
}

function activeTab(): string {
  return document.querySelector(".tab.active")?.getAttribute("data-tab") ?? "network";
}

async function renderAll(snapshot: Snapshot): Promise<void> {
  renderNetwork(snapshot);
  renderClients(snapshot);
  renderApOptions(snapshot);
  $("#matrix-body").innerHTML = matrixTable(matrixView(snapshot.matrix));
  if (activeTab() === "stats") {
    await renderStats(snapshot);
  }
}

// -- polling -----------------------------------------------------------------------

const poller = new Poller(async () => {
  try {
    const snapshot = await api.snapshot();
    last = snapshot;
    pending.reconcile(snapshot);
    showBanner(null);
    poller.setInterval(snapshot.params.scan_interval * 1000);
    await renderAll(snapshot);
  } catch (err) {
    // keep rendering the last known data under a warning banner
    showBanner(`controller unreachable, showing last known state (${String(err)})`);
    if (last) {
      await renderAll(last);
    }
  }
});

// -- user actions --------------------------------------------------------------------

function wireTabs(): void {
  document.querySelectorAll<HTMLElement>(".tab").forEach((tab) => {
    tab.addEventListener("click", () => {
      document.querySelectorAll(".tab").forEach((t) => t.classList.remove("active"));
      document.querySelectorAll(".view").forEach((v) => v.classList.add("hidden"));
      tab.classList.add("active");
      $(`#view-${tab.dataset.tab}`).classList.remove("hidden");
      if (last) void renderAll(last);
    });
  });
}

function wireMatrixPopup(): void {
  $("#matrix-open").addEventListener("click", () => $("#matrix-popup").classList.remove("hidden"));
  $("#matrix-close").addEventListener("click", () => $("#matrix-popup").classList.add("hidden"));
}

function wireHandoffDialog(): void {
  const dialog = $("#handoff-dialog");
  document.addEventListener("click", (event) => {
    const btn = (event.target as HTMLElement).closest<HTMLElement>("[data-handoff]");
    if (!btn) return;
    $("#handoff-sta").textContent = btn.dataset.handoff ?? "";
    formFeedback("#handoff-feedback", "", false);
    dialog.classList.remove("hidden");
  });
  $("#handoff-cancel").addEventListener("click", () => dialog.classList.add("hidden"));
  $("#handoff-confirm").addEventListener("click", async () => {
    const sta = $("#handoff-sta").textContent ?? "";
    const target = $<HTMLSelectElement>("#handoff-target").value;
    try {
      await api.requestHandoff(sta, target);
      pending.submit({ kind: "handoff", sta, target });
      dialog.classList.add("hidden");
      if (last) renderClients(last);
    } catch (err) {
      const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      formFeedback("#handoff-feedback", message, true);
    }
  });
}

function wireChannelForm(): void {
  $("#channel-apply").addEventListener("click", async () => {
    const ip = $<HTMLSelectElement>("#stats-ap").value;
    const channel = Number($<HTMLInputElement>("#channel-input").value);
    try {
      await api.setChannel(ip, channel);
      pending.submit({ kind: "channel", ap: ip, channel });
      formFeedback("#channel-feedback", "queued", false);
    } catch (err) {
      const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      formFeedback("#channel-feedback", message, true);
    }
  });
}

function wireParamForm(): void {
  document.querySelectorAll<HTMLInputElement>("input[data-param]").forEach((input) => {
    input.addEventListener("change", async () => {
      const name = input.dataset.param ?? "";
      const value = Number(input.value);
      try {
        await api.setParam(name, value);
        pending.submit({ kind: "param", name, value });
        formFeedback("#param-feedback", `${name} queued`, false);
      } catch (err) {
        const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
        formFeedback("#param-feedback", message, true);
      }
    });
  });
}

function wireStatsSelector(): void {
  $<HTMLSelectElement>("#stats-ap").addEventListener("change", () => {
    selectedAp = $<HTMLSelectElement>("#stats-ap").value || null;
    if (last) void renderStats(last);
  });
}

wireTabs();
wireMatrixPopup();
wireHandoffDialog();
wireChannelForm();
wireParamForm();
wireStatsSelector();
poller.start();
