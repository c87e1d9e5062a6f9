import pytest
from fastapi.testclient import TestClient

from pulsebench.emulator import Emulator
from pulsebench.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app(Emulator()))


class TestStateEndpoint:
    def test_fresh_device_all_zeros(self, client):
        state = client.get("/state").json()
        assert len(state["channels"]) == 12
        assert all(c["amplitude"] == 0 and not c["enabled"]
                   for c in state["channels"])
        assert state["armed"] is False

    def test_limits_endpoint(self, client):
        limits = client.get("/limits").json()
        assert limits["rail_peak_volts"] == 7.0
        assert limits["max_vpp_into_load"] == 10.0
        assert limits["volts_per_step"] == 0.05


class TestCommandEndpoint:
    def test_set_then_read(self, client):
        r = client.post("/command", json={
            "opcode": "SetAmplitude", "channel": "AC1", "payload": 37,
        })
        assert r.status_code == 200
        assert r.json()["status"] == "ack"
        state = client.get("/state").json()
        assert state["channels"][0]["amplitude"] == 37

    def test_opcode_by_number(self, client):
        r = client.post("/command", json={
            "opcode": 1, "channel": 2, "payload": 55,
        })
        assert r.json()["status"] == "ack"

    def test_nak_surfaces_reason(self, client):
        r = client.post("/command", json={
            "opcode": "SetAmplitude", "channel": 0, "payload": 400,
        })
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "nak"
        assert body["reason"] == "RANGE_VIOLATION"

    def test_unknown_opcode_rejected(self, client):
        r = client.post("/command", json={"opcode": "Explode", "channel": 0})
        assert r.status_code == 422

    def test_malformed_body_rejected(self, client):
        r = client.post("/command", json={"payload": "not a number"})
        assert r.status_code == 422

    def test_device_wide_defaults_to_broadcast(self, client):
        r = client.post("/command", json={"opcode": "Arm"})
        assert r.json()["status"] == "ack"
        assert client.get("/state").json()["armed"] is True


class TestCaptureEndpoint:
    def test_capture_returns_waveform_and_report(self, client):
        client.post("/command", json={
            "opcode": "SetAmplitude", "channel": "AC1", "payload": 120,
        })
        client.post("/command", json={
            "opcode": "SetEnable", "channel": "AC1", "payload": 1,
        })
        r = client.post("/capture", json={"channel": "AC1"})
        assert r.status_code == 200
        body = r.json()
        assert body["label"] == "AC1"
        assert body["waveform"]["count"] == 4000
        assert len(body["waveform"]["samples"]) == 4000
        assert body["report"]["vpp"] == pytest.approx(6.0, abs=1e-6)

    def test_capture_without_samples(self, client):
        r = client.post("/capture", json={"channel": 0, "include_samples": False})
        assert r.json()["waveform"]["samples"] is None

    def test_capture_needs_specific_channel(self, client):
        r = client.post("/capture", json={"channel": 255})
        assert r.status_code == 422

    def test_bad_window_rejected_structurally(self, client):
        r = client.post("/capture", json={"channel": 0, "window": 1e-12})
        assert r.status_code == 422


class TestPlanEndpoint:
    def test_plan_returns_slots_and_commands(self, client):
        r = client.post("/plan", json={"symbols": "signal,Z,0\ndecoy,X,1\n"})
        assert r.status_code == 200
        body = r.json()
        assert len(body["slots"]) == 2
        assert body["slots"][0]["symbol"] == "signal,Z,0"
        labels = [f["label"] for f in body["slots"][0]["firings"]]
        assert "AT1" in labels and "AT2" not in labels
        # LOAD_PATTERN + 2 slots x 36 writes + ARM
        assert len(body["commands"]) == 1 + 2 * 36 + 1
        assert body["commands"][0]["opcode"] == "LOAD_PATTERN"
        assert body["commands"][-1]["opcode"] == "ARM"

    def test_replaying_plan_commands_loads_pattern(self, client):
        plan = client.post("/plan", json={"symbols": "signal,Z,0\n"}).json()
        for cmd in plan["commands"]:
            r = client.post("/command", json=cmd)
            assert r.json()["status"] == "ack"
        assert client.get("/state").json()["pattern_slots"] == 1

    def test_bad_symbols_rejected_with_line(self, client):
        r = client.post("/plan", json={"symbols": "signal,Q,0\n"})
        assert r.status_code == 422
        assert "line 1" in r.json()["detail"]


class TestConsoleMount:
    def test_console_served_from_same_origin(self, tmp_path):
        (tmp_path / "index.html").write_text("<html>console</html>")
        client = TestClient(create_app(Emulator(), console_dir=str(tmp_path)))
        r = client.get("/")
        assert r.status_code == 200
        assert "console" in r.text
        # API routes still win over the static mount.
        assert client.get("/state").json()["armed"] is False


class TestEventStream:
    def test_two_subscribers_see_the_same_events(self, client):
        with client.websocket_connect("/events") as ws_a, \
             client.websocket_connect("/events") as ws_b:
            hello_a = ws_a.receive_json()
            hello_b = ws_b.receive_json()
            assert hello_a["type"] == hello_b["type"] == "hello"

            client.post("/command", json={
                "opcode": "SetAmplitude", "channel": "AC1", "payload": 37,
            })
            event_a = ws_a.receive_json()
            event_b = ws_b.receive_json()
            assert event_a == event_b
            assert event_a["type"] == "state"
            assert event_a["cause"]["opcode"] == "SET_AMPLITUDE"
            assert event_a["state"]["channels"][0]["amplitude"] == 37

    def test_events_are_ordered_per_subscriber(self, client):
        with client.websocket_connect("/events") as ws:
            ws.receive_json()  # hello
            for payload in (10, 20, 30):
                client.post("/command", json={
                    "opcode": "SetAmplitude", "channel": 0, "payload": payload,
                })
            seqs = [ws.receive_json()["seq"] for _ in range(3)]
            assert seqs == sorted(seqs)

    def test_capture_event_broadcast(self, client):
        with client.websocket_connect("/events") as ws:
            ws.receive_json()
            client.post("/capture", json={"channel": "AC2",
                                          "include_samples": False})
            event = ws.receive_json()
            assert event["type"] == "capture"
            assert event["label"] == "AC2"
            assert "report" in event
