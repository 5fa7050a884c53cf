// Pure derivations from API payloads to what the views draw. No control
// logic lives here: every number in a view model is an API field (or a
// color computed from one), so a fixed snapshot always renders the same.

import { rssiColor, rssiColorOrGray } from "./color";
import type { MatrixOut, ScanReportOut, Snapshot } from "./types";

export interface GraphNode {
  id: string;
  kind: "controller" | "ap" | "sta";
  label: string;
  sub: string;
  x: number; // 0..1, scaled by the renderer
  y: number;
}

export interface GraphEdge {
  from: string; // node id
  to: string;
  rssi: number | null;
  color: string;
}

export interface NetworkViewModel {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

const TIER_CONTROLLER = 0.12;
const TIER_AP = 0.5;
const TIER_STA = 0.88;

function spread(index: number, count: number): number {
  return (index + 1) / (count + 1);
}

/** Pyramid layout: controller on top, APs below, stations at the bottom;
 * solid edges from each station to its host AP, colored by smoothed RSSI. */
export function networkView(snapshot: Snapshot): NetworkViewModel {
  const aps = [...snapshot.agents].sort((a, b) => a.ip.localeCompare(b.ip));
  const stations = [...snapshot.stations].sort((a, b) => a.mac.localeCompare(b.mac));

  const nodes: GraphNode[] = [
    { id: "controller", kind: "controller", label: "controller", sub: "", x: 0.5, y: TIER_CONTROLLER },
  ];
  aps.forEach((ap, i) => {
    nodes.push({
      id: `ap:${ap.ip}`,
      kind: "ap",
      label: ap.ip,
      sub: `ch ${ap.channel} · ${ap.lvap_count} sta`,
      x: spread(i, aps.length),
      y: TIER_AP,
    });
  });
  stations.forEach((sta, i) => {
    nodes.push({
      id: `sta:${sta.mac}`,
      kind: "sta",
      label: sta.mac,
      sub: sta.rssi === null ? "no sample" : `${sta.rssi.toFixed(1)} dBm`,
      x: spread(i, stations.length),
      y: TIER_STA,
    });
  });

  const edges: GraphEdge[] = aps.map((ap) => ({
    from: "controller",
    to: `ap:${ap.ip}`,
    rssi: null,
    color: "hsl(0, 0%, 75%)",
  }));
  for (const sta of stations) {
    edges.push({
      from: `sta:${sta.mac}`,
      to: `ap:${sta.host}`,
      rssi: sta.rssi,
      color: rssiColorOrGray(sta.rssi),
    });
  }
  return { nodes, edges };
}

export interface MatrixCellVM {
  rssi: number;
  color: string;
  staleness: number;
  stale: boolean;
}

export interface MatrixViewModel {
  aps: string[];
  stas: string[];
  /** rows[apIndex][staIndex]; null where no cell exists (never heard or evicted) */
  rows: (MatrixCellVM | null)[][];
  timestamp: number;
}

export function matrixView(matrix: MatrixOut): MatrixViewModel {
  const byKey = new Map(matrix.cells.map((c) => [`${c.ap}|${c.sta}`, c]));
  const rows = matrix.aps.map((ap) =>
    matrix.stas.map((sta) => {
      const cell = byKey.get(`${ap}|${sta}`);
      if (!cell) return null;
      return {
        rssi: cell.rssi,
        color: rssiColor(cell.rssi),
        staleness: cell.staleness,
        stale: cell.staleness > 0,
      };
    }),
  );
  return { aps: matrix.aps, stas: matrix.stas, rows, timestamp: matrix.timestamp };
}

export interface StatsRow {
  mac: string;
  airtime: number;
  packetCount: number;
  smoothedRssi: number | null;
}

export interface StatsViewModel {
  ap: string;
  stale: boolean;
  timestamp: number;
  rows: StatsRow[];
}

/** Last-scan statistics for one AP; smoothed RSSI joined from the matrix.
 * Values are passed through untouched, never recomputed client-side. */
export function statsView(report: ScanReportOut, matrix: MatrixOut): StatsViewModel {
  const smoothed = new Map(
    matrix.cells.filter((c) => c.ap === report.ap).map((c) => [c.sta, c.rssi]),
  );
  const rows = [...report.observations]
    .sort((a, b) => a.sta_mac.localeCompare(b.sta_mac))
    .map((obs) => ({
      mac: obs.sta_mac,
      airtime: obs.airtime,
      packetCount: obs.packet_count,
      smoothedRssi: smoothed.get(obs.sta_mac) ?? null,
    }));
  return { ap: report.ap, stale: report.stale, timestamp: report.timestamp, rows };
}

// -- optimistic pending badges ------------------------------------------------

export type PendingAction =
  | { kind: "handoff"; sta: string; target: string }
  | { kind: "channel"; ap: string; channel: number }
  | { kind: "param"; name: string; value: number };

export interface PendingBadge {
  key: string;
  label: string;
  ticks: number; // polls observed since submission
}

/** Tracks submitted mutations until a poll confirms them. */
export class PendingTracker {
  private pending = new Map<string, { action: PendingAction; ticks: number }>();

  submit(action: PendingAction): void {
    this.pending.set(keyOf(action), { action, ticks: 0 });
  }

  /** Drop every pending entry the snapshot confirms; bump tick counts. */
  reconcile(snapshot: Snapshot): void {
    for (const [key, entry] of [...this.pending]) {
      entry.ticks += 1;
      if (confirmed(entry.action, snapshot)) {
        this.pending.delete(key);
      }
    }
  }

  badges(): PendingBadge[] {
    return [...this.pending.entries()].map(([key, { action, ticks }]) => ({
      key,
      label: labelOf(action),
      ticks,
    }));
  }

  has(key: string): boolean {
    return this.pending.has(key);
  }

  get size(): number {
    return this.pending.size;
  }
}

function keyOf(action: PendingAction): string {
  switch (action.kind) {
    case "handoff":
      return `handoff:${action.sta}`;
    case "channel":
      return `channel:${action.ap}`;
    case "param":
      return `param:${action.name}`;
  }
}

function labelOf(action: PendingAction): string {
  switch (action.kind) {
    case "handoff":
      return `${action.sta} → ${action.target}`;
    case "channel":
      return `${action.ap} to channel ${action.channel}`;
    case "param":
      return `${action.name} = ${action.value}`;
  }
}

function confirmed(action: PendingAction, snapshot: Snapshot): boolean {
  switch (action.kind) {
    case "handoff":
      return snapshot.stations.some((s) => s.mac === action.sta && s.host === action.target);
    case "channel":
      return snapshot.agents.some((a) => a.ip === action.ap && a.channel === action.channel);
    case "param": {
      const applied = snapshot.params[action.name as keyof typeof snapshot.params];
      return applied === action.value;
    }
  }
}
