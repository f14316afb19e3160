import numpy as np
import pytest

from flowtel.baselines import (
    PM_RECORD_BYTES,
    POSTCARD_BYTES,
    DeltaSampler,
    Postcard,
    QfiCounters,
    TelemetryMode,
    export_cost,
    pm_record_drop,
    pm_update,
    sketch_record_bytes,
)
from flowtel.core import Color, FlowKey, PacketEvent


def ev(teid, qfi, sojourn_ns, arrival_ns=0, size=500, color=Color.GREEN):
    return PacketEvent(key=FlowKey(teid, qfi), qid=0, bytes=size,
                       arrival_ns=arrival_ns, sojourn_ns=sojourn_ns, color=color)


# -- PM counters -----------------------------------------------------------------


def test_pm_aggregation_masks_per_tunnel_tails():
    counters = {}
    pm_update(counters, ev(1, 5, sojourn_ns=1_000_000), window=0)
    pm_update(counters, ev(2, 5, sojourn_ns=20_000_000), window=0)
    assert list(counters) == [5]  # one row per class, tunnels collapsed
    row = counters[5]
    assert row.pkt_count == 2
    assert row.mean_delay_ns == pytest.approx(10_500_000)  # 10.5 ms average


def test_pm_empty_window_row_is_zero():
    row = QfiCounters(qfi=3, window=7)
    assert row.pkt_count == 0 and row.mean_delay_ns == 0.0


def test_pm_counters_match_exact_sums(rng):
    counters = {}
    byqfi_pkts, byqfi_bytes, byqfi_soj = {}, {}, {}
    for i in range(2000):
        qfi = int(rng.integers(1, 5))
        size = int(rng.integers(64, 1500))
        soj = int(rng.integers(0, 10**7))
        pm_update(counters, ev(int(rng.integers(1, 50)), qfi, soj, size=size), window=0)
        byqfi_pkts[qfi] = byqfi_pkts.get(qfi, 0) + 1
        byqfi_bytes[qfi] = byqfi_bytes.get(qfi, 0) + size
        byqfi_soj[qfi] = byqfi_soj.get(qfi, 0) + soj
    for qfi, row in counters.items():
        assert row.pkt_count == byqfi_pkts[qfi]
        assert row.byte_count == byqfi_bytes[qfi]
        assert row.mean_delay_ns == pytest.approx(byqfi_soj[qfi] / byqfi_pkts[qfi])


def test_pm_drop_accounting():
    counters = {}
    pm_record_drop(counters, qfi=4, window=2)
    pm_record_drop(counters, qfi=4, window=2)
    assert counters[4].drop_count == 2


# -- delta-triggered postcards -------------------------------------------------------


def test_first_packet_always_exports_then_silence_on_constant_latency():
    s = DeltaSampler(delta_ns=1_000_000)
    assert s.offer(ev(1, 1, sojourn_ns=5_000_000, arrival_ns=10)) is not None
    for k in range(20):
        assert s.offer(ev(1, 1, sojourn_ns=5_000_000, arrival_ns=20 + k)) is None


def test_step_of_twice_delta_exports_exactly_once():
    delta = 1_000_000
    s = DeltaSampler(delta_ns=delta)
    # hand-traced 5-packet stream: export, hold, hold, export at step, hold
    got = [
        s.offer(ev(1, 1, sojourn_ns=3_000_000, arrival_ns=1)) is not None,
        s.offer(ev(1, 1, sojourn_ns=3_400_000, arrival_ns=2)) is not None,
        s.offer(ev(1, 1, sojourn_ns=2_800_000, arrival_ns=3)) is not None,
        s.offer(ev(1, 1, sojourn_ns=5_000_000, arrival_ns=4)) is not None,  # +2 delta
        s.offer(ev(1, 1, sojourn_ns=5_500_000, arrival_ns=5)) is not None,
    ]
    assert got == [True, False, False, True, False]


def test_change_at_or_below_delta_never_exports():
    s = DeltaSampler(delta_ns=1000)
    s.offer(ev(1, 1, sojourn_ns=10_000, arrival_ns=1))
    assert s.offer(ev(1, 1, sojourn_ns=11_000, arrival_ns=2)) is None  # == delta
    assert s.offer(ev(1, 1, sojourn_ns=9_000, arrival_ns=3)) is None


def test_per_flow_state_is_independent():
    s = DeltaSampler(delta_ns=1000)
    assert s.offer(ev(1, 1, sojourn_ns=10_000, arrival_ns=1)) is not None
    assert s.offer(ev(2, 1, sojourn_ns=10_000, arrival_ns=2)) is not None  # other flow
    assert s.offer(ev(1, 1, sojourn_ns=10_000, arrival_ns=3)) is None


def test_offer_batch_matches_sequential(rng):
    from flowtel.simulator import DeliveredBatch

    n = 500
    teid = rng.integers(1, 6, size=n).astype(np.int64)
    soj = rng.integers(0, 5_000_000, size=n).astype(np.int64)
    arr = np.cumsum(rng.integers(1, 1000, size=n)).astype(np.int64)
    batch = DeliveredBatch(
        teid=teid, qfi=np.ones(n, dtype=np.int64), qid=np.zeros(n, dtype=np.int64),
        bytes=np.full(n, 500, dtype=np.int64), arrival_ns=arr, sojourn_ns=soj,
        color=np.zeros(n, dtype=np.int8), monitored=np.ones(n, dtype=bool),
        injected=np.zeros(n, dtype=bool),
    )
    sel = np.ones(n, dtype=bool)
    batch_sampler = DeltaSampler(delta_ns=700_000)
    idx = set(batch_sampler.offer_batch(batch, sel).tolist())
    seq_sampler = DeltaSampler(delta_ns=700_000)
    expect = {i for i in range(n) if seq_sampler.offer(batch.event(i)) is not None}
    assert idx == expect


# -- export cost ---------------------------------------------------------------------


def test_sketch_cost_is_configuration_only():
    quiet = export_cost(TelemetryMode.SKETCH, width=512, depth=3, bins_b=8, num_qids=8)
    burst = export_cost(TelemetryMode.SKETCH, width=512, depth=3, bins_b=8, num_qids=8)
    assert quiet == burst == sketch_record_bytes(8) * 512 * 3 * 8
    assert sketch_record_bytes(8) == 96  # 22 32-bit fields + one 64-bit


def test_pm_cost_scales_with_active_classes():
    assert export_cost(TelemetryMode.PM, active_qfis=9) == 9 * PM_RECORD_BYTES


def test_dsmp_cost_scales_with_emissions():
    assert export_cost(TelemetryMode.DSMP, postcards=1234) == 1234 * POSTCARD_BYTES


def test_dsmp_burst_cost_dominates_quiet_cost():
    """Bursty windows force many threshold crossings; quiet windows almost
    none, so the postcard bill follows traffic, not configuration."""
    s = DeltaSampler(delta_ns=100_000)
    quiet = burst = 0
    t = 0
    for k in range(1000):  # quiet second: flat latency
        t += 1_000_000
        if s.offer(ev(1, 1, sojourn_ns=200_000, arrival_ns=t)) is not None:
            quiet += 1
    ramp = 200_000
    for k in range(1000):  # bursty second: latency ramps up and down
        t += 1_000_000
        ramp += 150_000 if k < 500 else -150_000
        if s.offer(ev(1, 1, sojourn_ns=ramp, arrival_ns=t)) is not None:
            burst += 1
    assert burst * POSTCARD_BYTES >= 5 * max(quiet, 1) * POSTCARD_BYTES


def test_postcard_line_roundtrip_format():
    pc = Postcard(key=FlowKey(7, 3), qid=1, arrival_ns=123, sojourn_ns=456,
                  color=Color.YELLOW, bytes=789)
    parts = pc.to_line(window=9).split()
    assert parts[0] == "dsmp"
    assert [int(p) for p in parts[1:]] == [9, 7, 3, 1, 123, 456, 1, 789]
