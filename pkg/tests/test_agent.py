import pytest

from smartap import protocol
from smartap.agent import (
    ApAgent,
    InvalidChannel,
    Lvap,
    LvapConflict,
    ScanBusy,
    ScanReport,
    airtime_per_packet,
    synthesize_stats,
)
from smartap.macaddr import derive_bssid
from smartap.radio import RadioEnvironment

from conftest import make_scenario

AP1 = "10.0.0.1"
STA1 = "00:16:ea:00:00:01"
STA2 = "00:16:ea:00:00:02"


@pytest.fixture
def env():
    return RadioEnvironment(
        make_scenario(
            stations=[
                {"mac": STA1, "track": [{"x": 15.0, "y": 25.0, "t": 0.0}]},
                {"mac": STA2, "track": [{"x": 85.0, "y": 25.0, "t": 0.0}]},
            ]
        )
    )


@pytest.fixture
def agent(env):
    return ApAgent(env, AP1, "02:00:00:00:01:01", 1)


def lvap_for(sta, host=AP1):
    return Lvap(sta_mac=sta, bssid=derive_bssid(sta), ssid="smartap", host_ap=host)


class TestLvapTable:
    def test_add_to_empty_table(self, agent):
        agent.handle_add_lvap(lvap_for(STA1))
        assert set(agent.lvaps) == {STA1}

    def test_add_is_idempotent(self, agent):
        agent.handle_add_lvap(lvap_for(STA1))
        agent.handle_add_lvap(lvap_for(STA1))
        assert set(agent.lvaps) == {STA1}

    def test_same_bssid_different_station_conflicts(self, agent):
        agent.handle_add_lvap(lvap_for(STA1))
        clash = Lvap(sta_mac=STA2, bssid=derive_bssid(STA1), ssid="smartap", host_ap=AP1)
        with pytest.raises(LvapConflict):
            agent.handle_add_lvap(clash)

    def test_remove_present(self, agent):
        agent.handle_add_lvap(lvap_for(STA1))
        agent.handle_remove_lvap(STA1)
        assert not agent.lvaps

    def test_remove_absent_is_noop(self, agent):
        agent.handle_remove_lvap(STA1)  # no raise
        assert not agent.lvaps

    def test_add_remove_add(self, agent):
        agent.handle_add_lvap(lvap_for(STA1))
        agent.handle_remove_lvap(STA1)
        agent.handle_add_lvap(lvap_for(STA1))
        assert set(agent.lvaps) == {STA1}

    def test_add_claims_station_channel(self, agent, env):
        agent.handle_add_lvap(lvap_for(STA1))
        assert env.directory.channel_of(STA1) == 1
        agent.handle_remove_lvap(STA1)
        assert env.directory.channel_of(STA1) is None


class TestSetChannel:
    def test_change_channel(self, agent):
        agent.handle_set_channel(6)
        assert agent.channel == 6

    def test_same_channel_is_fine(self, agent):
        agent.handle_set_channel(1)
        assert agent.channel == 1

    def test_out_of_range(self, agent):
        with pytest.raises(InvalidChannel):
            agent.handle_set_channel(14)

    def test_retunes_hosted_stations(self, agent, env):
        agent.handle_add_lvap(lvap_for(STA1))
        agent.handle_set_channel(6)
        assert env.directory.channel_of(STA1) == 6

    def test_does_not_steal_moved_stations(self, agent, env):
        agent.handle_add_lvap(lvap_for(STA1))
        env.directory.claim(STA1, "10.0.0.2", 11)  # another AP took it over
        agent.handle_set_channel(6)
        assert env.directory.channel_of(STA1) == 11


class TestScan:
    def test_hears_unassociated_stations(self, agent):
        report = agent.perform_scan(1, 0.06)
        assert {o.sta_mac for o in report.observations} == {STA1, STA2}
        assert report.channel == 1

    def test_scan_while_busy_returns_cache(self, agent):
        first = agent.perform_scan(1, 0.06)
        with pytest.raises(ScanBusy) as exc:
            agent.perform_scan(1, 0.06)
        assert exc.value.last_report is first

    def test_busy_window_expires(self, agent, env):
        agent.perform_scan(1, 0.06)
        env.clock.advance(1.0)
        second = agent.perform_scan(1, 0.06)
        assert second.timestamp == 1.0

    def test_empty_channel_gives_empty_report(self, agent, env):
        env.directory.claim(STA1, AP1, 6)
        env.directory.claim(STA2, AP1, 6)
        report = agent.perform_scan(11, 0.06)
        assert report.observations == ()

    def test_report_payload_round_trip(self, agent):
        report = agent.perform_scan(1, 0.06)
        assert ScanReport.from_payload(report.to_payload()) == report


class TestStatsSynthesis:
    def test_airtime_never_exceeds_window(self):
        for rssi in (-50.0, -70.0, -90.0):
            stats = synthesize_stats(STA1, rssi, 500.0, 0.0, 0.06)
            assert stats.airtime <= 0.06 + 1e-12
            assert stats.packet_count >= 0

    def test_sticky_client_pattern(self):
        # poor RSSI: slow tier saturates the window with few packets
        good = synthesize_stats(STA1, -50.0, 200.0, 0.0, 0.06)
        bad = synthesize_stats(STA1, -85.0, 200.0, 0.0, 0.06)
        assert bad.airtime > good.airtime
        assert bad.packet_count < good.packet_count
        assert bad.avg_rssi < good.avg_rssi

    def test_tier_boundaries(self):
        assert airtime_per_packet(-64.9) == airtime_per_packet(-50.0)
        assert airtime_per_packet(-65.0) < airtime_per_packet(-66.0)
        assert airtime_per_packet(-78.1) > airtime_per_packet(-78.0)


class TestMessageDispatch:
    def req(self, kind, seq=1, **payload):
        return protocol.ControlMessage(kind=kind, seq=seq, payload=payload)

    def test_ping_pong(self, agent):
        resp = agent.handle_message(self.req(protocol.PING, seq=5))
        assert resp.kind == protocol.PONG and resp.seq == 5

    def test_add_conflict_becomes_error(self, agent):
        agent.handle_add_lvap(lvap_for(STA1))
        resp = agent.handle_message(
            self.req(protocol.ADD_LVAP, sta_mac=STA2, bssid=derive_bssid(STA1), ssid="x")
        )
        assert resp.kind == protocol.ERROR
        assert resp.payload["code"] == "conflict"

    def test_bad_channel_becomes_error(self, agent):
        resp = agent.handle_message(self.req(protocol.SET_CHANNEL, channel=14))
        assert resp.kind == protocol.ERROR
        assert resp.payload["code"] == "validation"

    def test_scan_busy_carries_cache(self, agent):
        agent.handle_message(self.req(protocol.SCAN_REQUEST, channel=1, duration=0.06))
        resp = agent.handle_message(self.req(protocol.SCAN_REQUEST, seq=2, channel=1, duration=0.06))
        assert resp.kind == protocol.BUSY
        assert resp.payload["last_report"]["ap_ip"] == AP1
