// View models to markup. Renderers are string builders so they stay
// trivially testable; main.ts owns event wiring via data- attributes.

import type {
  MatrixViewModel,
  NetworkViewModel,
  PendingBadge,
  StatsViewModel,
} from "./viewmodel";

const W = 960;
const H = 520;

export function esc(text: string): string {
  return text.replace(/[&<>"']/g, (c) => `&#${c.charCodeAt(0)};`);
}

export function networkSvg(vm: NetworkViewModel): string {
  const byId = new Map(vm.nodes.map((n) => [n.id, n]));
  const edges = vm.edges
    .map((e) => {
      const a = byId.get(e.from);
      const b = byId.get(e.to);
      if (!a || !b) return "";
      const title = e.rssi === null ? "" : `<title>${e.rssi.toFixed(1)} dBm</title>`;
      return `<line x1="${a.x * W}" y1="${a.y * H}" x2="${b.x * W}" y2="${b.y * H}" stroke="${e.color}" stroke-width="2.5">${title}</line>`;
    })
    .join("");
  const nodes = vm.nodes
    .map((n) => {
      const r = n.kind === "controller" ? 16 : n.kind === "ap" ? 13 : 9;
      const cls = `node node-${n.kind}`;
      return (
        `<g class="${cls}" data-node="${esc(n.id)}">` +
        `<circle cx="${n.x * W}" cy="${n.y * H}" r="${r}"></circle>` +
        `<text x="${n.x * W}" y="${n.y * H + r + 14}" text-anchor="middle">${esc(n.label)}</text>` +
        (n.sub
          ? `<text class="sub" x="${n.x * W}" y="${n.y * H + r + 28}" text-anchor="middle">${esc(n.sub)}</text>`
          : "") +
        `</g>`
      );
    })
    .join("");
  return `<svg viewBox="0 0 ${W} ${H}" preserveAspectRatio="xMidYMid meet">${edges}${nodes}</svg>`;
}

export function matrixTable(vm: MatrixViewModel): string {
  if (vm.aps.length === 0 && vm.stas.length === 0) {
    return `<p class="empty">matrix is empty</p>`;
  }
  const head =
    `<tr><th>AP \\ STA</th>` + vm.stas.map((s) => `<th>${esc(s)}</th>`).join("") + `</tr>`;
  const body = vm.aps
    .map((ap, i) => {
      const cells = (vm.rows[i] ?? [])
        .map((cell) => {
          if (!cell) return `<td class="blank"></td>`;
          const cls = cell.stale ? "cell stale" : "cell";
          return (
            `<td class="${cls}" style="background:${cell.color}">` +
            `${cell.rssi.toFixed(1)}` +
            (cell.stale ? `<span class="age">+${cell.staleness}</span>` : "") +
            `</td>`
          );
        })
        .join("");
      return `<tr><th>${esc(ap)}</th>${cells}</tr>`;
    })
    .join("");
  return `<table class="matrix">${head}${body}</table>`;
}

function barChart(
  title: string,
  rows: { label: string; value: number | null }[],
  unit: string,
  invert = false,
): string {
  const known = rows.filter((r): r is { label: string; value: number } => r.value !== null);
  const max = Math.max(...known.map((r) => Math.abs(r.value)), 1e-9);
  const bars = rows
    .map((r) => {
      const width = r.value === null ? 0 : (Math.abs(r.value) / max) * 100;
      const text = r.value === null ? "?" : `${r.value.toFixed(unit === "pkts" ? 0 : 3)} ${unit}`;
      return (
        `<div class="bar-row"><span class="bar-label">${esc(r.label)}</span>` +
        `<div class="bar-track"><div class="bar ${invert ? "bar-neg" : ""}" style="width:${width.toFixed(1)}%"></div></div>` +
        `<span class="bar-value">${text}</span></div>`
      );
    })
    .join("");
  return `<div class="chart"><h3>${esc(title)}</h3>${bars || '<p class="empty">no stations</p>'}</div>`;
}

export function statsCharts(vm: StatsViewModel): string {
  const staleNote = vm.stale ? ` <span class="stale-flag">(cached scan)</span>` : "";
  return (
    `<p class="stats-meta">last scan of ${esc(vm.ap)} at t=${vm.timestamp.toFixed(2)}s${staleNote}</p>` +
    barChart("Airtime", vm.rows.map((r) => ({ label: r.mac, value: r.airtime })), "s") +
    barChart(
      "Smoothed RSSI",
      vm.rows.map((r) => ({ label: r.mac, value: r.smoothedRssi })),
      "dBm",
      true,
    ) +
    barChart("Packets", vm.rows.map((r) => ({ label: r.mac, value: r.packetCount })), "pkts")
  );
}

export function pendingBadges(badges: PendingBadge[]): string {
  return badges
    .map((b) => `<span class="badge" data-badge="${esc(b.key)}">pending: ${esc(b.label)}</span>`)
    .join("");
}
