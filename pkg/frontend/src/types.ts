// Mirrors of the management API payloads (docs/api-schema.json).

export interface AgentOut {
  ip: string;
  mac: string;
  channel: number;
  lvap_count: number;
  last_heartbeat: number;
}

export interface StationOut {
  mac: string;
  bssid: string;
  host: string;
  rssi: number | null;
}

export interface ClientOut {
  mac: string;
  bssid: string;
  first_seen: number;
  last_seen: number;
  connected: boolean;
}

export interface MatrixCellOut {
  ap: string;
  sta: string;
  rssi: number;
  staleness: number;
}

export interface MatrixOut {
  aps: string[];
  stas: string[];
  cells: MatrixCellOut[];
  timestamp: number;
}

export interface ParamsOut {
  alpha: number;
  scan_interval: number;
  hysteresis: number;
  load_penalty_beta: number;
  stale_scans_limit: number;
  scan_duration: number;
  pending: Record<string, number>;
}

export interface ScanObservationOut {
  sta_mac: string;
  raw_rssi: number;
  packet_count: number;
  airtime: number;
  avg_rssi: number;
  window_start: number;
  window_end: number;
}

export interface ScanReportOut {
  ap: string;
  channel: number;
  timestamp: number;
  stale: boolean;
  observations: ScanObservationOut[];
}

export interface AcceptedOut {
  status: "accepted";
  detail: string;
}

export interface ApiErrorBody {
  code: "not_found" | "validation" | "busy" | "agent_unreachable";
  message: string;
}

/** Everything one poll tick fetches. */
export interface Snapshot {
  agents: AgentOut[];
  stations: StationOut[];
  clients: ClientOut[];
  matrix: MatrixOut;
  params: ParamsOut;
}
