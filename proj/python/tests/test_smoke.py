import numpy as np
import pytest

import molstore


def test_codec_round_trip():
    assert molstore.encode_direct([0, 0, 0, 1, 1, 0, 1, 1]) == "ACGT"
    assert molstore.decode_direct("ACGT") == [0, 0, 0, 1, 1, 0, 1, 1]
    seq = molstore.encode_runlength([0, 1])
    assert seq == "A" * 20 + "C" * 30
    assert molstore.decode_runlength("A" * 19 + "C" * 30, tolerance=0.1) == [0, 1]


def test_errors_carry_category():
    with pytest.raises(molstore.MolstoreError, match="^length: "):
        molstore.encode_direct([0, 1, 1])
    with pytest.raises(molstore.MolstoreError, match="^range: "):
        molstore.open_current(300.0)


def test_calibration_queries():
    assert molstore.open_current(210.0) == 250.0
    assert molstore.capture_rate(150.0) == 10.6
    assert molstore.mean_duration(105.0, 150) == pytest.approx(300.0)


def test_simulate_and_read(tmp_path):
    sim = molstore.simulate("A50C100", duration_s=2.0, seed=9)
    again = molstore.simulate("A50C100", duration_s=2.0, seed=9)
    assert sim["samples"].dtype == np.float32
    assert sim["samples"].shape == (2_000_000,)
    assert np.array_equal(sim["samples"], again["samples"])

    path = tmp_path / "trace.bin"
    molstore.save_trace(str(path), sim["samples"], format="binary")
    samples, rate = molstore.load_trace(str(path))
    assert rate == 1e6
    assert np.array_equal(samples, sim["samples"])

    out = molstore.read(samples, scheme="A50:C100")
    complete = [e for e in sim["events"] if e["complete"]]
    found = [e for e in out["events"] if e["class"] != "incomplete"]
    assert abs(len(found) - len(complete)) <= 2
    decoded = [e["bits"] for e in out["events"] if e["bits"] is not None]
    assert decoded and sum(b == [0, 1] for b in decoded) >= len(decoded) - 1
    stats = out["stats"]
    assert stats["total_rate"] == pytest.approx(stats["complete_rate"] + stats["partial_rate"])


def test_multi_pore_census():
    sim = molstore.simulate(
        duration_s=0.5,
        seed=4,
        config={"n_pores": 3, "voltage_mV": 150, "open_current_pA": 132, "clogs": "1:0.25:0.5"},
    )
    assert sim["open_current_pA"] == 132.0
    assert molstore.pore_state_census(float(sim["samples"][:1000].mean()), 132, 30, 3) == 3
    assert molstore.pore_state_census(float(sim["samples"][-1000:].mean()), 132, 30, 3) == 2


def test_plan():
    report = molstore.plan()
    assert float(report["areal_bytes_per_cm2"]) == 1e12
    assert float(report["volumetric_bytes_per_cm3"]) == 1e15
    assert molstore.station_rate(150, 150) == 1e6
    assert molstore.transit_time(1.0, 10.0) == pytest.approx(1e-3)
    assert float(molstore.plan({"stations": 3000, "bits_per_molecule": 150})["aggregate_bits_per_s"]) == 3e9
