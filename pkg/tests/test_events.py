import json

from smartap.events import EventLog, check_log_file, replay_check, strip_volatile


def test_healthy_run_log_passes(runtime_factory, tmp_path):
    log_path = tmp_path / "run.ndjson"
    rt = runtime_factory()
    for _ in range(5):
        rt.step()
    rt.gateway.enqueue_manual_handoff("00:16:ea:00:00:01", "10.0.0.2")
    rt.step()
    rt.stop()
    log_path.write_text("\n".join(json.dumps(e) for e in rt.log.records) + "\n")

    report = check_log_file(log_path)
    assert report.ok, [str(v) for v in report.violations]
    assert report.iterations == 6
    assert report.handoffs >= 1


def test_fabricated_double_host_fails_single_host():
    sta = "00:16:ea:00:00:01"
    events = [
        {"event": "lvap_added", "ap": "10.0.0.1", "sta": sta, "bssid": "02:16:ea:00:00:01"},
        {"event": "lvap_added", "ap": "10.0.0.2", "sta": sta, "bssid": "02:16:ea:00:00:01"},
        {"event": "lvap_added", "ap": "10.0.0.3", "sta": sta, "bssid": "02:16:ea:00:00:01"},
    ]
    report = replay_check(events)
    assert not report.ok
    assert {v.invariant for v in report.violations} == {"single-host"}


def test_committed_handoff_requires_exactly_one_host():
    sta = "00:16:ea:00:00:01"
    events = [
        {"event": "lvap_added", "ap": "10.0.0.1", "sta": sta, "bssid": "02:16:ea:00:00:01"},
        {"event": "lvap_added", "ap": "10.0.0.2", "sta": sta, "bssid": "02:16:ea:00:00:01"},
        {"event": "handoff", "sta": sta, "source": "10.0.0.1", "target": "10.0.0.2",
         "reason": "manual", "outcome": "committed", "bssid": "02:16:ea:00:00:01"},
    ]
    report = replay_check(events)
    assert any(v.invariant == "single-host" for v in report.violations)


def test_disconnect_clears_zombie_host():
    sta = "00:16:ea:00:00:01"
    events = [
        {"event": "lvap_added", "ap": "10.0.0.1", "sta": sta, "bssid": "02:16:ea:00:00:01"},
        {"event": "lvap_added", "ap": "10.0.0.2", "sta": sta, "bssid": "02:16:ea:00:00:01"},
        {"event": "agent_disconnected", "ip": "10.0.0.1"},
        {"event": "handoff", "sta": sta, "source": "10.0.0.1", "target": "10.0.0.2",
         "reason": "manual", "outcome": "committed_with_warning", "bssid": "02:16:ea:00:00:01"},
    ]
    assert replay_check(events).ok


def test_bssid_change_is_flagged():
    sta = "00:16:ea:00:00:01"
    events = [
        {"event": "lvap_added", "ap": "10.0.0.1", "sta": sta, "bssid": "02:16:ea:00:00:01"},
        {"event": "lvap_removed", "ap": "10.0.0.1", "sta": sta, "bssid": "02:16:ea:00:00:01"},
        {"event": "lvap_added", "ap": "10.0.0.2", "sta": sta, "bssid": "06:16:ea:00:00:01"},
    ]
    report = replay_check(events)
    assert any(v.invariant == "bssid-stability" for v in report.violations)


def test_slow_iteration_fails_loop_budget():
    events = [
        {"event": "iteration", "iteration": 1, "scan_interval": 1.0, "duration_s": 1.2},
    ]
    report = replay_check(events)
    assert any(v.invariant == "loop-budget" for v in report.violations)


def test_interval_over_ceiling_fails_loop_budget():
    events = [
        {"event": "iteration", "iteration": 1, "scan_interval": 2.5, "duration_s": 0.1},
    ]
    report = replay_check(events)
    assert any(v.invariant == "loop-budget" for v in report.violations)


def test_iteration_counter_must_increase_by_one():
    events = [
        {"event": "iteration", "iteration": 1, "scan_interval": 1.0, "duration_s": 0.1},
        {"event": "iteration", "iteration": 3, "scan_interval": 1.0, "duration_s": 0.1},
    ]
    report = replay_check(events)
    assert any(v.invariant == "iteration-order" for v in report.violations)


def test_empty_log_passes_with_warning():
    report = replay_check([])
    assert report.ok
    assert report.warnings


def test_event_log_writes_ndjson(tmp_path):
    path = tmp_path / "out.ndjson"
    log = EventLog(path)
    log.emit({"event": "x", "n": 1})
    log.emit({"event": "y", "n": 2})
    log.close()
    lines = [json.loads(l) for l in path.read_text().splitlines()]
    assert lines == [{"event": "x", "n": 1}, {"event": "y", "n": 2}]


def test_strip_volatile_removes_timing_fields():
    event = {"event": "iteration", "duration_s": 0.5, "iteration": 1}
    assert strip_volatile(event) == {"event": "iteration", "iteration": 1}
