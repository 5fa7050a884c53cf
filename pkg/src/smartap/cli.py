"""Command line entry points.

`smartap run` boots a scenario (radio world, agents, controller loop,
management API) and optionally runs headless to a time limit, writing a
newline-delimited JSON event log. `smartap replay-check` re-validates
the recorded invariants offline. `smartap client ...` is a thin HTTP
client for a running controller.

Exit codes: 0 ok, 1 invariant failure, 2 usage or scenario errors.
"""

from __future__ import annotations

import json
import signal
import sys
import threading

import click

from .events import check_log_file
from .runtime import SystemRuntime
from .scenario import ScenarioError, load_scenario


@click.group()
def main():
    """Desk-scale SDWN controller."""


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(), help="Scenario YAML file.")
@click.option("--duration", type=float, default=None, help="Stop after this many seconds (simulated unless --realtime).")
@click.option("--seed", type=int, default=None, help="Override the scenario RNG seed.")
@click.option("--api-addr", default="127.0.0.1:8000", show_default=True, help="Management API bind address host:port.")
@click.option("--no-api", is_flag=True, help="Run headless without the management API.")
@click.option("--log", "log_path", type=click.Path(), default=None, help="Write the event log to this path.")
@click.option("--realtime", is_flag=True, help="Pace iterations on the wall clock instead of simulating time.")
@click.option("--transport", type=click.Choice(["inproc", "tcp"]), default="inproc", show_default=True, help="Controller/agent transport.")
@click.option("--ui-dir", type=click.Path(), default=None, help="Serve a built dashboard from this directory at /ui.")
def run(scenario_path, duration, seed, api_addr, no_api, log_path, realtime, transport, ui_dir):
    """Run a scenario until --duration or Ctrl-C."""
    try:
        scenario = load_scenario(scenario_path)
    except ScenarioError as exc:
        click.echo(f"scenario error: {exc}", err=True)
        sys.exit(2)

    runtime = SystemRuntime(
        scenario, realtime=realtime, transport=transport, log_path=log_path, seed=seed
    )
    server = None
    server_thread = None
    try:
        runtime.start()
        if not no_api:
            server, server_thread = _start_api(runtime, api_addr, ui_dir)
        _install_sigint(runtime)
        runtime.run(duration=duration)
    except KeyboardInterrupt:
        pass
    except Exception as exc:  # invariant/runtime failure, not usage
        click.echo(f"run failed: {exc}", err=True)
        _shutdown(runtime, server, server_thread)
        sys.exit(1)
    _shutdown(runtime, server, server_thread)
    sys.exit(0)


def _start_api(runtime: SystemRuntime, api_addr: str, ui_dir):
    import uvicorn

    from .api import create_app

    host, _, port = api_addr.partition(":")
    app = create_app(runtime.gateway, runtime.controller, events=runtime.log.emit)
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    config = uvicorn.Config(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True, name="mgmt-api")
    thread.start()
    return server, thread


def _shutdown(runtime, server, server_thread):
    # API first, then the loop, agents and env (runtime.stop orders the rest)
    if server is not None:
        server.should_exit = True
        server_thread.join(timeout=5.0)
    runtime.stop()


def _install_sigint(runtime: SystemRuntime):
    def handler(signum, frame):
        runtime._stop.set()

    try:
        signal.signal(signal.SIGINT, handler)
    except ValueError:
        pass  # not the main thread (tests)


@main.command("replay-check")
@click.argument("log_path", type=click.Path(exists=True))
def replay_check_cmd(log_path):
    """Re-validate invariants over a recorded event log."""
    try:
        report = check_log_file(log_path)
    except ValueError as exc:
        click.echo(f"log error: {exc}", err=True)
        sys.exit(2)
    for warning in report.warnings:
        click.echo(f"warning: {warning}")
    click.echo(
        f"checked {report.events} events: {report.iterations} iterations, "
        f"{report.handoffs} handoffs"
    )
    if report.ok:
        click.echo("all invariants hold")
        sys.exit(0)
    for violation in report.violations:
        click.echo(f"violation: {violation}", err=True)
    failed = sorted({v.invariant for v in report.violations})
    click.echo(f"FAILED invariants: {', '.join(failed)}", err=True)
    sys.exit(1)


# -- thin HTTP client ----------------------------------------------------------


@main.group()
@click.option("--api-addr", default="127.0.0.1:8000", show_default=True, help="Controller API address.")
@click.pass_context
def client(ctx, api_addr):
    """Talk to a running controller's management API."""
    ctx.obj = f"http://{api_addr}"


def _show(response):
    try:
        body = response.json()
    except ValueError:
        body = response.text
    click.echo(json.dumps(body, indent=2, sort_keys=True))
    if response.status_code >= 400:
        sys.exit(1)


def _request(ctx, method: str, path: str, **kwargs):
    import httpx

    try:
        return httpx.request(method, ctx.obj + path, timeout=5.0, **kwargs)
    except httpx.HTTPError as exc:
        click.echo(f"request failed: {exc}", err=True)
        sys.exit(1)


@client.command("clients")
@click.pass_context
def client_clients(ctx):
    """Every client ever seen."""
    _show(_request(ctx, "GET", "/api/clients"))


@client.command("stations")
@click.pass_context
def client_stations(ctx):
    """Currently associated stations."""
    _show(_request(ctx, "GET", "/api/stations"))


@client.command("agents")
@click.pass_context
def client_agents(ctx):
    """Connected agents."""
    _show(_request(ctx, "GET", "/api/agents"))


@client.command("matrix")
@click.pass_context
def client_matrix(ctx):
    """Smoothed attenuation matrix."""
    _show(_request(ctx, "GET", "/api/matrix"))


@client.command("params")
@click.pass_context
def client_params(ctx):
    """Applied parameters plus queued changes."""
    _show(_request(ctx, "GET", "/api/params"))


@client.command("set-param")
@click.argument("name")
@click.argument("value")
@click.pass_context
def client_set_param(ctx, name, value):
    """Queue a parameter change (applies at the next loop boundary)."""
    try:
        parsed = json.loads(value)
    except ValueError:
        parsed = value
    _show(_request(ctx, "PUT", "/api/params", json={"name": name, "value": parsed}))


@client.command("handoff")
@click.argument("sta_mac")
@click.argument("target_ip")
@click.pass_context
def client_handoff(ctx, sta_mac, target_ip):
    """Queue a manual handoff of STA_MAC to TARGET_IP."""
    _show(_request(ctx, "POST", "/api/handoff", json={"sta_mac": sta_mac, "target_ip": target_ip}))


@client.command("set-channel")
@click.argument("ap_ip")
@click.argument("channel", type=int)
@click.pass_context
def client_set_channel(ctx, ap_ip, channel):
    """Queue a serving-channel change for AP_IP."""
    _show(_request(ctx, "POST", f"/api/agents/{ap_ip}/channel", json={"channel": channel}))


@client.command("scan")
@click.argument("ap_ip")
@click.argument("channel", type=int)
@click.pass_context
def client_scan(ctx, ap_ip, channel):
    """Ask AP_IP for an out-of-band scan of CHANNEL."""
    _show(_request(ctx, "POST", "/api/scan", json={"ap_ip": ap_ip, "channel": channel}))


if __name__ == "__main__":
    main()
