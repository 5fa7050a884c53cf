import { describe, expect, it } from "vitest";

import { rssiColor, rssiColorOrGray, rssiHue } from "../src/color";

describe("rssi color ramp", () => {
  it("is green at -40 dBm", () => {
    expect(rssiHue(-40)).toBe(120);
    expect(rssiColor(-40)).toBe("hsl(120, 75%, 42%)");
  });

  it("is red at -90 dBm", () => {
    expect(rssiHue(-90)).toBe(0);
    expect(rssiColor(-90)).toBe("hsl(0, 75%, 42%)");
  });

  it("is yellow at the midpoint", () => {
    expect(rssiHue(-65)).toBe(60);
  });

  it("clamps outside the ramp", () => {
    expect(rssiColor(-20)).toBe(rssiColor(-40));
    expect(rssiColor(-110)).toBe(rssiColor(-90));
  });

  it("interpolates linearly in between", () => {
    expect(rssiHue(-52.5)).toBeCloseTo(90, 1);
    expect(rssiHue(-77.5)).toBeCloseTo(30, 1);
  });

  it("maps unknown RSSI to gray", () => {
    expect(rssiColorOrGray(null)).toBe("hsl(0, 0%, 60%)");
    expect(rssiColorOrGray(-40)).toBe(rssiColor(-40));
  });
});
