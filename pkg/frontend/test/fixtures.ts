// A frozen API state, as the controller would publish it: two APs, three
// stations (one with a stale matrix cell, one heard by only one AP).

import type { Snapshot, ScanReportOut } from "../src/types";

export const snapshot: Snapshot = {
  agents: [
    { ip: "10.0.0.1", mac: "02:00:00:00:01:01", channel: 1, lvap_count: 2, last_heartbeat: 41.0 },
    { ip: "10.0.0.2", mac: "02:00:00:00:01:02", channel: 1, lvap_count: 1, last_heartbeat: 41.0 },
  ],
  stations: [
    { mac: "00:16:ea:00:00:01", bssid: "02:16:ea:00:00:01", host: "10.0.0.1", rssi: -40.0 },
    { mac: "00:16:ea:00:00:02", bssid: "02:16:ea:00:00:02", host: "10.0.0.2", rssi: -90.0 },
    { mac: "00:16:ea:00:00:03", bssid: "02:16:ea:00:00:03", host: "10.0.0.1", rssi: -65.0 },
  ],
  clients: [
    { mac: "00:16:ea:00:00:01", bssid: "02:16:ea:00:00:01", first_seen: 0.0, last_seen: 41.0, connected: true },
    { mac: "00:16:ea:00:00:02", bssid: "02:16:ea:00:00:02", first_seen: 0.0, last_seen: 41.0, connected: true },
    { mac: "00:16:ea:00:00:03", bssid: "02:16:ea:00:00:03", first_seen: 2.0, last_seen: 41.0, connected: true },
    { mac: "00:16:ea:00:00:09", bssid: "02:16:ea:00:00:09", first_seen: 1.0, last_seen: 20.0, connected: false },
  ],
  matrix: {
    aps: ["10.0.0.1", "10.0.0.2"],
    stas: ["00:16:ea:00:00:01", "00:16:ea:00:00:02", "00:16:ea:00:00:03"],
    cells: [
      { ap: "10.0.0.1", sta: "00:16:ea:00:00:01", rssi: -40.0, staleness: 0 },
      { ap: "10.0.0.1", sta: "00:16:ea:00:00:03", rssi: -65.0, staleness: 0 },
      { ap: "10.0.0.2", sta: "00:16:ea:00:00:01", rssi: -71.5, staleness: 2 },
      { ap: "10.0.0.2", sta: "00:16:ea:00:00:02", rssi: -90.0, staleness: 0 },
      // (10.0.0.2, :03) never observed; (10.0.0.1, :02) evicted
    ],
    timestamp: 41.0,
  },
  params: {
    alpha: 0.8,
    scan_interval: 1.0,
    hysteresis: 6.0,
    load_penalty_beta: 3.0,
    stale_scans_limit: 3,
    scan_duration: 0.06,
    pending: {},
  },
};

export const scanReport: ScanReportOut = {
  ap: "10.0.0.1",
  channel: 1,
  timestamp: 41.0,
  stale: false,
  observations: [
    {
      sta_mac: "00:16:ea:00:00:03",
      raw_rssi: -64.2,
      packet_count: 12,
      airtime: 0.0288,
      avg_rssi: -64.2,
      window_start: 41.0,
      window_end: 41.06,
    },
    {
      sta_mac: "00:16:ea:00:00:01",
      raw_rssi: -39.8,
      packet_count: 12,
      airtime: 0.0072,
      avg_rssi: -39.8,
      window_start: 41.0,
      window_end: 41.06,
    },
  ],
};
