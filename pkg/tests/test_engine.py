import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smartap.agent import Observation, ScanReport, StaStats
from smartap.engine import (
    AttenuationMatrix,
    HandoffCommand,
    MatrixCell,
    SelectionEngine,
    compute_assignment,
    smooth_rssi,
    update_matrix,
)
from smartap.gateway import DataGateway
from smartap.links import Controller
from smartap.params import Parameters
from smartap.radio import SimClock

from conftest import make_scenario

A, B = "10.0.0.1", "10.0.0.2"
S1, S2 = "00:16:ea:00:00:01", "00:16:ea:00:00:02"


def report(ap, channel=1, t=0.0, **rssi_by_sta):
    observations = tuple(
        Observation(
            sta_mac=sta.replace("_", ":"),
            raw_rssi=value,
            stats=StaStats(sta.replace("_", ":"), 10, 0.01, value, t, t + 0.06),
        )
        for sta, value in rssi_by_sta.items()
    )
    return ScanReport(ap_ip=ap, channel=channel, timestamp=t, observations=observations)


def matrix_of(cells: dict, timestamp=0.0) -> AttenuationMatrix:
    return AttenuationMatrix(
        cells={key: MatrixCell(v) if isinstance(v, float) else v for key, v in cells.items()},
        timestamp=timestamp,
    )


class TestSmoothing:
    def test_alpha_one_keeps_new_sample(self):
        assert smooth_rssi(1.0, -60.0, -70.0) == -60.0

    def test_alpha_zero_keeps_history(self):
        assert smooth_rssi(0.0, -60.0, -70.0) == -70.0

    def test_alpha_half_is_midpoint(self):
        assert smooth_rssi(0.5, -60.0, -70.0) == -65.0

    def test_alpha_out_of_range(self):
        with pytest.raises(ValueError):
            smooth_rssi(1.5, -60.0, -70.0)

    @settings(max_examples=300, deadline=None)
    @given(
        alpha=st.floats(0.0, 1.0),
        new=st.floats(-95.0, -20.0),
        hist=st.floats(-95.0, -20.0),
    )
    def test_matches_exact_affine_combination(self, alpha, new, hist):
        expected = Fraction(alpha) * Fraction(new) + (1 - Fraction(alpha)) * Fraction(hist)
        assert abs(smooth_rssi(alpha, new, hist) - float(expected)) < 1e-9


class TestMatrixUpdate:
    def test_first_sample_rule_is_alpha_independent(self):
        # a brand new cell takes the raw value no matter the alpha
        for alpha in (0.1, 0.5, 0.9):
            params = Parameters(alpha=alpha)
            m = update_matrix(AttenuationMatrix(), [report(A, t=0.0, **{S1: -62.0})], params)
            cell = m.cells[(A, S1)]
            assert cell.smoothed_rssi == -62.0
            assert cell.staleness == 0

    def test_existing_cell_smoothed(self):
        m0 = matrix_of({(A, S1): -70.0})
        m1 = update_matrix(m0, [report(A, **{S1: -60.0})], Parameters(alpha=0.5))
        assert m1.cells[(A, S1)].smoothed_rssi == -65.0

    def test_unobserved_cell_ages_then_evicts(self):
        params = Parameters(stale_scans_limit=3)
        m = update_matrix(AttenuationMatrix(), [report(A, **{S1: -62.0})], params)
        m = update_matrix(m, [], params)
        assert m.cells[(A, S1)].staleness == 1
        m = update_matrix(m, [], params)
        assert m.cells[(A, S1)].staleness == 2
        m = update_matrix(m, [], params)
        assert (A, S1) not in m.cells

    def test_observation_resets_staleness(self):
        params = Parameters()
        m = update_matrix(AttenuationMatrix(), [report(A, **{S1: -62.0})], params)
        m = update_matrix(m, [], params)
        m = update_matrix(m, [report(A, **{S1: -64.0})], params)
        assert m.cells[(A, S1)].staleness == 0

    def test_retained_cells_always_below_limit(self):
        params = Parameters(stale_scans_limit=2)
        m = update_matrix(AttenuationMatrix(), [report(A, **{S1: -62.0})], params)
        for _ in range(5):
            m = update_matrix(m, [], params)
            assert all(c.staleness < params.stale_scans_limit for c in m.cells.values())


def brute_force_balanced(n_stations: int, aps: list[str]) -> set[tuple[str, ...]]:
    """All assignments whose per-AP counts have the minimum possible spread."""
    best, winners = None, set()
    for combo in itertools.product(aps, repeat=n_stations):
        counts = [combo.count(ap) for ap in aps]
        spread = max(counts) - min(counts)
        if best is None or spread < best:
            best, winners = spread, {combo}
        elif spread == best:
            winners.add(combo)
    return winners


class TestAssignment:
    def test_single_ap_everything_stays(self):
        m = matrix_of({(A, S1): -50.0, (A, S2): -60.0})
        assignment, commands = compute_assignment(
            m, {S1: A, S2: A}, Parameters(), [A]
        )
        assert assignment == {S1: A, S2: A}
        assert commands == []

    def test_two_aps_one_station_clear_winner(self):
        # hand-evaluated: score(A) = -50, score(B) = -80, gap 30 > hysteresis 6
        m = matrix_of({(A, S1): -50.0, (B, S1): -80.0})
        params = Parameters(load_penalty_beta=3.0, hysteresis=6.0)
        assignment, commands = compute_assignment(m, {S1: B}, params, [A, B])
        assert assignment == {S1: A}
        assert commands == [HandoffCommand(sta_mac=S1, source=B, target=A, reason="algorithm")]

    def test_hysteresis_blocks_small_gains(self):
        m = matrix_of({(A, S1): -60.0, (B, S1): -55.0})  # 5 dB gain < 6 dB hysteresis
        assignment, commands = compute_assignment(m, {S1: A}, Parameters(), [A, B])
        assert assignment == {S1: A}
        assert commands == []

    def test_symmetric_pair_balances_against_brute_force(self):
        # all four RSSI equal, beta above hysteresis, both start on A
        m = matrix_of({(A, S1): -60.0, (B, S1): -60.0, (A, S2): -60.0, (B, S2): -60.0})
        params = Parameters(load_penalty_beta=3.0, hysteresis=2.0)
        assignment, commands = compute_assignment(m, {S1: A, S2: A}, params, [A, B])
        assert len(commands) == 1
        final = tuple(assignment[s] for s in sorted(assignment))
        assert final in brute_force_balanced(2, [A, B])

    def test_new_station_assigned_without_hysteresis(self):
        m = matrix_of({(A, S1): -60.0, (B, S1): -59.0})
        assignment, commands = compute_assignment(m, {}, Parameters(), [A, B])
        assert assignment == {S1: B}  # pure argmax, no hysteresis gate
        assert commands == []

    def test_unheard_station_stays_put(self):
        assignment, commands = compute_assignment(
            AttenuationMatrix(), {S1: A}, Parameters(), [A, B]
        )
        assert assignment == {S1: A}
        assert commands == []

    def test_tie_breaks_to_lexicographically_lowest_ip(self):
        low, high = "10.0.0.10", "10.0.0.2"  # string order: "10.0.0.10" < "10.0.0.2"
        m = matrix_of({(low, S1): -60.0, (high, S1): -60.0})
        assignment, _ = compute_assignment(m, {}, Parameters(), [high, low])
        assert assignment == {S1: low}

    def test_pure_function_of_inputs(self):
        m = matrix_of({(A, S1): -50.0, (B, S1): -52.0, (A, S2): -70.0, (B, S2): -40.0})
        current = {S1: B, S2: A}
        params = Parameters()
        first = compute_assignment(m, dict(current), params, [A, B])
        second = compute_assignment(m, dict(current), params, [A, B])
        assert first == second

    def test_disconnected_ap_not_a_candidate(self):
        m = matrix_of({(A, S1): -90.0, (B, S1): -30.0})
        assignment, commands = compute_assignment(m, {S1: A}, Parameters(), [A])
        assert assignment == {S1: A}
        assert commands == []


# -- loop behaviour over a live runtime ----------------------------------------


def walking_scenario(**params):
    return make_scenario(
        stations=[{
            "mac": S1,
            "track": [{"x": 15.0, "y": 25.0, "t": 0.0}, {"x": 85.0, "y": 25.0, "t": 50.0}],
        }],
        params=params or None,
    )


class TestIterations:
    def test_zero_agents_publishes_empty_state(self):
        clock = SimClock()
        gateway = DataGateway(clock=clock)
        engine = SelectionEngine(Controller(clock), gateway, clock)
        engine.initialize()
        summary = engine.run_iteration()
        assert summary.reports == 0
        assert summary.handoffs == []
        assert gateway.get("matrix", "current")["cells"] == []

    def test_stationary_station_reaches_fixed_point(self, runtime_factory):
        rt = runtime_factory()
        for _ in range(2):
            rt.step()
        before = dict(rt.engine.assignment)
        handoffs_before = sum(
            1 for e in rt.log.records if e.get("event") == "handoff"
        )
        for _ in range(5):
            rt.step()
        assert rt.engine.assignment == before
        handoffs_after = sum(1 for e in rt.log.records if e.get("event") == "handoff")
        assert handoffs_after == handoffs_before == 0

    def test_param_change_applies_at_loop_boundary(self, runtime_factory):
        rt = runtime_factory(walking_scenario())
        rt.step()  # iteration 1: first samples
        raw1 = rt.engine.matrix.rssi(A, S1)

        rt.gateway.enqueue_param_change("alpha", 0.0)
        # iteration 2 must still smooth with the old alpha (0.8)
        old_alpha = rt.engine.params.alpha
        rt.step()
        smoothed = rt.engine.matrix.rssi(A, S1)
        raw2 = rt.env.rssi_at(A, S1, 1, 1.0)
        assert smoothed == pytest.approx(old_alpha * raw2 + (1 - old_alpha) * raw1)
        assert rt.engine.params.alpha == 0.0

        # iteration 3 uses the new alpha: cell frozen at its previous value
        rt.step()
        assert rt.engine.matrix.rssi(A, S1) == pytest.approx(smoothed)

    def test_manual_handoff_executes_at_loop_start(self, runtime_factory):
        rt = runtime_factory()
        rt.step()
        assert rt.engine.assignment[S1] == A
        rt.gateway.enqueue_manual_handoff(S1, B)
        rt.step()
        events = [e for e in rt.log.records if e.get("event") == "handoff"]
        # the manual move commits first; the algorithm is free to move the
        # station again afterwards (here it pulls it straight back to the
        # much closer AP), so the manual event must come before any
        # algorithmic one in this iteration
        assert events[0]["reason"] == "manual"
        assert events[0]["outcome"] == "committed"
        assert events[0]["target"] == B
        assert all(e["reason"] == "algorithm" for e in events[1:])

    def test_manual_handoff_to_current_host_rejected(self, runtime_factory):
        rt = runtime_factory()
        rt.step()
        rt.gateway.enqueue_manual_handoff(S1, A)  # already on A
        rt.step()
        events = [e for e in rt.log.records if e.get("event") == "handoff"]
        assert events[-1]["outcome"] == "rejected"

    def test_handoff_to_down_target_fails_cleanly(self, runtime_factory):
        rt = runtime_factory()
        rt.step()
        assert rt.engine.assignment[S1] == A
        rt.controller.mark_disconnected(B)
        outcome = rt.engine.execute_handoff(
            HandoffCommand(sta_mac=S1, source=A, target=B, reason="manual")
        )
        assert outcome == "failed"
        assert rt.engine.assignment[S1] == A

    def test_command_requires_distinct_endpoints(self):
        with pytest.raises(ValueError):
            HandoffCommand(sta_mac=S1, source=A, target=A, reason="manual")

    def test_bssid_constant_across_handoffs(self, runtime_factory):
        rt = runtime_factory()
        rt.step()
        rt.gateway.enqueue_manual_handoff(S1, B)
        rt.step()
        rt.gateway.enqueue_manual_handoff(S1, A)
        rt.step()
        bssids = {e["bssid"] for e in rt.log.records if "bssid" in e and e.get("sta") == S1}
        assert len(bssids) == 1

    def test_no_pingpong_for_stationary_station(self, runtime_factory):
        rt = runtime_factory()  # sigma = 0
        for _ in range(30):
            rt.step()
        moves = [e for e in rt.log.records if e.get("event") == "handoff"]
        assert len(moves) <= 1

    def test_station_vanishes_then_client_disconnected(self, runtime_factory):
        scenario = make_scenario(
            stations=[{
                "mac": S1,
                "track": [{"x": 15.0, "y": 25.0, "t": 0.0}],
                "active": {"from": 0.0, "until": 2.5},
            }]
        )
        rt = runtime_factory(scenario)
        for _ in range(8):  # active window ends, cells age out, client drops
            rt.step()
        assert S1 not in rt.engine.assignment
        client = rt.gateway.get("clients_ever", S1)
        assert client["connected"] is False
        assert rt.gateway.list("stations_current") == []

    def test_agent_loss_releases_its_stations(self, runtime_factory):
        rt = runtime_factory()
        rt.step()
        assert rt.engine.assignment[S1] == A
        rt.controller.mark_disconnected(A)
        rt.step()
        # station re-associates to the surviving AP via probe audibility
        assert rt.engine.assignment.get(S1) == B

    def test_channel_change_applied_at_loop_start(self, runtime_factory):
        rt = runtime_factory()
        rt.step()
        rt.gateway.enqueue_channel_change(A, 6)
        rt.step()
        agents = {row["ip"]: row for row in rt.gateway.list("agents")}
        assert agents[A]["channel"] == 6
        assert any(e.get("event") == "channel_applied" for e in rt.log.records)
