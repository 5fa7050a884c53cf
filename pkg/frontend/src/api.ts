import type {
  AcceptedOut,
  AgentOut,
  ApiErrorBody,
  ClientOut,
  MatrixOut,
  ParamsOut,
  ScanReportOut,
  Snapshot,
  StationOut,
} from "./types";

/** Error body from the controller, surfaced verbatim in dialogs. */
export class ApiError extends Error {
  constructor(
    public readonly code: ApiErrorBody["code"] | "network",
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError("network", `controller unreachable: ${String(err)}`, 0);
    }
    if (!response.ok) {
      let detail: ApiErrorBody = { code: "validation", message: response.statusText };
      try {
        detail = (await response.json()) as ApiErrorBody;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail.code, detail.message, response.status);
    }
    return (await response.json()) as T;
  }

  clients(): Promise<ClientOut[]> {
    return this.request("GET", "/api/clients");
  }

  stations(): Promise<StationOut[]> {
    return this.request("GET", "/api/stations");
  }

  agents(): Promise<AgentOut[]> {
    return this.request("GET", "/api/agents");
  }

  matrix(): Promise<MatrixOut> {
    return this.request("GET", "/api/matrix");
  }

  params(): Promise<ParamsOut> {
    return this.request("GET", "/api/params");
  }

  scan(apIp: string, channel: number): Promise<ScanReportOut> {
    return this.request("POST", "/api/scan", { ap_ip: apIp, channel });
  }

  requestHandoff(staMac: string, targetIp: string): Promise<AcceptedOut> {
    return this.request("POST", "/api/handoff", { sta_mac: staMac, target_ip: targetIp });
  }

  setChannel(apIp: string, channel: number): Promise<AcceptedOut> {
    return this.request("POST", `/api/agents/${apIp}/channel`, { channel });
  }

  setParam(name: string, value: number): Promise<AcceptedOut> {
    return this.request("PUT", "/api/params", { name, value });
  }

  /** One poll tick's worth of reads. */
  async snapshot(): Promise<Snapshot> {
    const [agents, stations, clients, matrix, params] = await Promise.all([
      this.agents(),
      this.stations(),
      this.clients(),
      this.matrix(),
      this.params(),
    ]);
    return { agents, stations, clients, matrix, params };
  }
}
