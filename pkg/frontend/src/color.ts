// One color ramp for everything: network edges and matrix cells share it,
// so the same RSSI is always the same color. Linear hue from green at
// -40 dBm to red at -90 dBm, clamped outside that span.

export const GREEN_DBM = -40;
export const RED_DBM = -90;

export function rssiHue(rssi: number): number {
  const t = (rssi - RED_DBM) / (GREEN_DBM - RED_DBM);
  const clamped = Math.min(1, Math.max(0, t));
  return Math.round(120 * clamped * 10) / 10;
}

export function rssiColor(rssi: number): string {
  return `hsl(${rssiHue(rssi)}, 75%, 42%)`;
}

/** Edge/cell color for a possibly unknown RSSI. */
export function rssiColorOrGray(rssi: number | null): string {
  return rssi === null ? "hsl(0, 0%, 60%)" : rssiColor(rssi);
}
