"""Scenario presets at desk scale.

Five anomaly scenarios mirror the evaluation matrix (single-kind scenarios
plus a mixed one), with two focused presets for cost accounting and smoke
tests. Traffic shapes follow the application mix the queues are built for:
constant-rate VoIP/IoT, on-off streaming and gaming, memoryless best effort.
Rates, durations, and anomaly magnitudes are scaled so a preset simulates in
seconds while keeping every anomaly's qualitative signature intact.
"""

from __future__ import annotations

from .core import FlowKey
from .pipeline import TelemetryConfig
from .simulator import (
    AnomalyEvent,
    AnomalyKind,
    FlowSpec,
    MeterSpec,
    QueuePolicy,
    ScenarioSpec,
    TrafficPattern,
)

# QFI plan: 1 gaming (priority), 2-3 streaming, 4 IoT/VoIP, 5 best effort,
# 7 premium (policy-abuse destination)
FABRIC_QFI_TO_QID = {1: 0, 2: 1, 3: 1, 4: 2, 5: 3, 7: 0}

FABRIC_QUEUES = {
    0: QueuePolicy(tier=0, weight=1, service_rate_bps=100e6, buffer_pkts=16000),
    1: QueuePolicy(tier=1, weight=2, service_rate_bps=100e6, buffer_pkts=16000),
    2: QueuePolicy(tier=1, weight=1, service_rate_bps=100e6, buffer_pkts=8000),
    3: QueuePolicy(tier=2, weight=1, service_rate_bps=100e6, buffer_pkts=16000),
}


def _fabric_flows(
    gaming: int = 10,
    streaming: int = 6,
    iot: int = 4,
    best_effort: int = 5,
    bulk: int = 2,
    gaming_pps: float = 400.0,
    streaming_pps: float = 500.0,
    iot_pps: float = 300.0,
    be_pps: float = 400.0,
    bulk_pps: float = 800.0,
) -> list[FlowSpec]:
    """Application mix with deliberately spiky baselines: on-off peaks from
    gaming, streaming, and bulk transfers regularly push the port near
    saturation, so per-window averages are noisy even when nothing is wrong."""
    flows: list[FlowSpec] = []
    for i in range(gaming):
        flows.append(
            FlowSpec(FlowKey(100 + i, 1), TrafficPattern.ONOFF, gaming_pps, 250, 450,
                     on_fraction=0.25, cycle_ms=700.0)
        )
    for i in range(streaming):
        qfi = 2 if i % 2 == 0 else 3
        flows.append(
            FlowSpec(FlowKey(200 + i, qfi), TrafficPattern.ONOFF, streaming_pps, 700, 1300,
                     on_fraction=0.4, cycle_ms=900.0)
        )
    for i in range(iot):
        flows.append(FlowSpec(FlowKey(300 + i, 4), TrafficPattern.CBR, iot_pps, 128, 256))
    for i in range(best_effort):
        flows.append(FlowSpec(FlowKey(400 + i, 5), TrafficPattern.POISSON, be_pps, 400, 800))
    for i in range(bulk):
        flows.append(
            FlowSpec(FlowKey(450 + i, 5), TrafficPattern.ONOFF, bulk_pps, 1000, 1400,
                     on_fraction=0.25, cycle_ms=2500.0)
        )
    return flows


def smoke(seed: int = 1) -> tuple[ScenarioSpec, TelemetryConfig]:
    """Minimal single-flow scenario for CLI smoke tests."""
    key = FlowKey(1, 1)
    spec = ScenarioSpec(
        duration_s=6.0,
        seed=seed,
        flows=(FlowSpec(key, TrafficPattern.POISSON, 2000.0, 300, 600),),
        qfi_to_qid={1: 0},
        queue_policy={0: QueuePolicy(tier=0, weight=1, service_rate_bps=20e6, buffer_pkts=4000)},
        anomalies=(
            AnomalyEvent(AnomalyKind.MICROBURST, start_s=2.1, duration_s=0.3,
                         target_flows=(key,), burst_factor=8.0),
            AnomalyEvent(AnomalyKind.MICROBURST, start_s=4.2, duration_s=0.3,
                         target_flows=(key,), burst_factor=8.0),
        ),
    )
    cfg = TelemetryConfig(width=64, depth=2, fit_windows=2, n_blocks=2)
    return spec, cfg


def microburst(seed: int = 11, duration_s: float = 120.0) -> tuple[ScenarioSpec, TelemetryConfig]:
    """Scenario 1: short high-rate bursts on one tunnel.

    The burst driver is a 10 kpps CBR flow; a 6x burst adds 50 kpps, so the
    50 ms preset injects 2500 extra packets into a queue sized to overload
    during the burst (latency spikes into the tail, spacing collapses into
    the IAT head).
    """
    target = FlowKey(500, 2)
    # keep the port comfortably below saturation in baseline so the burst's
    # own latency spike stands alone (mean load ~80 Mbps of 100)
    flows = _fabric_flows(streaming=3, best_effort=4, bulk=1) + [
        FlowSpec(target, TrafficPattern.CBR, 10_000.0, 300, 300),
    ]
    # the burst class carries enough steady tunnels that 2500 extra packets
    # move its one-second average by well under 10%
    for i in range(9):
        flows.append(FlowSpec(FlowKey(600 + i, 2), TrafficPattern.CBR, 1700.0, 120, 120))
    starts = [10.3, 25.6, 40.2, 55.7, 70.4, 85.1, 100.9, 112.5]
    anomalies = tuple(
        AnomalyEvent(AnomalyKind.MICROBURST, start_s=s, duration_s=0.05,
                     target_flows=(target,), burst_factor=6.0)
        for s in starts
        if s + 1 < duration_s
    )
    spec = ScenarioSpec(
        duration_s=duration_s,
        seed=seed,
        flows=tuple(flows),
        qfi_to_qid=FABRIC_QFI_TO_QID,
        queue_policy=FABRIC_QUEUES,
        anomalies=anomalies,
    )
    return spec, TelemetryConfig(width=256, depth=3)


def congestion(seed: int = 22, duration_s: float = 180.0) -> tuple[ScenarioSpec, TelemetryConfig]:
    """Scenario 2: sustained overload of the streaming class."""
    flows = _fabric_flows(streaming=8)
    anomalies = tuple(
        AnomalyEvent(AnomalyKind.CONGESTION, start_s=s, duration_s=d,
                     target_qfis=(2, 3), overload_factor=2.2)
        for s, d in ((20.0, 10.0), (60.0, 12.0), (105.0, 9.0), (150.0, 11.0))
        if s + d < duration_s
    )
    spec = ScenarioSpec(
        duration_s=duration_s,
        seed=seed,
        flows=tuple(flows),
        qfi_to_qid=FABRIC_QFI_TO_QID,
        queue_policy=FABRIC_QUEUES,
        anomalies=anomalies,
    )
    return spec, TelemetryConfig(width=256, depth=3)


def contention(seed: int = 33, duration_s: float = 180.0) -> tuple[ScenarioSpec, TelemetryConfig]:
    """Scenario 3: unmonitored cross traffic seizing the priority queue on a
    square wave, distorting service for everything below."""
    flows = _fabric_flows()
    # cross traffic enters through the priority class, so the whole port
    # oscillates; labels cover every class that shares it
    anomalies = tuple(
        AnomalyEvent(AnomalyKind.CONTENTION, start_s=s, duration_s=d,
                     target_qfis=(1, 2, 3, 4, 5), cross_qfis=(1,),
                     cross_rate_pps=5_600.0, cross_bytes=1100,
                     cross_period_ms=10.0)
        for s, d in ((20.0, 12.0), (62.0, 14.0), (104.0, 10.0), (148.0, 13.0))
        if s + d < duration_s
    )
    spec = ScenarioSpec(
        duration_s=duration_s,
        seed=seed,
        flows=tuple(flows),
        qfi_to_qid=FABRIC_QFI_TO_QID,
        queue_policy=FABRIC_QUEUES,
        anomalies=anomalies,
    )
    return spec, TelemetryConfig(width=256, depth=3)


def policy_abuse(seed: int = 44, duration_s: float = 180.0) -> tuple[ScenarioSpec, TelemetryConfig]:
    """Scenario 4: a policed best-effort tunnel remaps itself into the
    premium class, escaping its meter and pressuring the priority queue."""
    abuser = FlowKey(700, 5)
    # the premium class carries enough tunnels that one abuser's move barely
    # shifts the class aggregate while its own delivered rate doubles
    flows = _fabric_flows(gaming_pps=1200.0) + [
        FlowSpec(abuser, TrafficPattern.CBR, 4000.0, 600, 600),
    ]
    meters = {
        # CIR/PIR sized at half the abuser's offered rate: ~50% red under
        # its own class, full delivery once remapped
        abuser: MeterSpec(cir_bps=4.8e6, cbs_bytes=30_000, pir_bps=9.6e6, pbs_bytes=60_000),
    }
    anomalies = tuple(
        AnomalyEvent(AnomalyKind.POLICY_ABUSE, start_s=s, duration_s=d,
                     target_flows=(abuser,), remapped_qfi=7)
        for s, d in ((20.0, 15.0), (65.0, 18.0), (110.0, 20.0), (152.0, 16.0))
        if s + d < duration_s
    )
    spec = ScenarioSpec(
        duration_s=duration_s,
        seed=seed,
        flows=tuple(flows),
        qfi_to_qid=FABRIC_QFI_TO_QID,
        queue_policy=FABRIC_QUEUES,
        meters=meters,
        anomalies=anomalies,
    )
    return spec, TelemetryConfig(width=256, depth=3)


def mixed(seed: int = 55, duration_s: float = 240.0) -> tuple[ScenarioSpec, TelemetryConfig]:
    """Scenario 5: all four anomaly kinds staggered, some overlapping."""
    burst_target = FlowKey(500, 2)
    abuser = FlowKey(700, 5)
    flows = _fabric_flows() + [
        FlowSpec(burst_target, TrafficPattern.CBR, 10_000.0, 500, 500),
        FlowSpec(abuser, TrafficPattern.CBR, 4000.0, 600, 600),
    ]
    meters = {
        abuser: MeterSpec(cir_bps=4.8e6, cbs_bytes=30_000, pir_bps=9.6e6, pbs_bytes=60_000),
    }
    def burst(s):
        return AnomalyEvent(AnomalyKind.MICROBURST, start_s=s, duration_s=0.05,
                            target_flows=(burst_target,), burst_factor=6.0)

    def cong(s, d):
        return AnomalyEvent(AnomalyKind.CONGESTION, start_s=s, duration_s=d,
                            target_qfis=(2, 3), overload_factor=2.2)

    def cont(s, d):
        return AnomalyEvent(AnomalyKind.CONTENTION, start_s=s, duration_s=d,
                            target_qfis=(1, 2, 3, 4, 5), cross_qfis=(1,),
                            cross_rate_pps=5_600.0, cross_bytes=1100,
                            cross_period_ms=10.0)

    def abuse(s, d):
        return AnomalyEvent(AnomalyKind.POLICY_ABUSE, start_s=s, duration_s=d,
                            target_flows=(abuser,), remapped_qfi=7)

    # each kind hits every quarter of the run so no cross-fit fold goes
    # single-class; congestion/contention overlap in the 170s stretch
    anomalies = (
        burst(15.3), burst(28.7), burst(90.6), burst(112.4),
        burst(150.2), burst(166.8), burst(201.5), burst(228.4),
        cong(35.0, 10.0), cong(75.0, 8.0), cong(170.0, 12.0), cong(212.0, 10.0),
        cont(55.0, 8.0), cont(100.0, 10.0), cont(175.0, 10.0), cont(225.0, 8.0),
        abuse(8.0, 10.0), abuse(62.0, 12.0), abuse(125.0, 15.0), abuse(185.0, 12.0),
    )
    spec = ScenarioSpec(
        duration_s=duration_s,
        seed=seed,
        flows=tuple(flows),
        qfi_to_qid=FABRIC_QFI_TO_QID,
        queue_policy=FABRIC_QUEUES,
        meters=meters,
        anomalies=anomalies,
    )
    return spec, TelemetryConfig(width=256, depth=3)


def burst_cost(seed: int = 66) -> tuple[ScenarioSpec, TelemetryConfig]:
    """Cost-accounting preset: quiet early windows, then alternating
    burst/drain windows that multiply the observed packet rate tenfold.

    Many slow constant-rate flows ride two queues; burst drivers overload
    each queue during burst windows so every slow flow's latency ramps and
    the change-triggered sampler exports near line rate, while the sketch
    export stays frozen at its configured size.
    """
    flows: list[FlowSpec] = []
    for i in range(34):
        flows.append(FlowSpec(FlowKey(1000 + i, 1), TrafficPattern.CBR, 50.0, 200, 200))
    for i in range(12):
        flows.append(FlowSpec(FlowKey(2000 + i, 2), TrafficPattern.CBR, 50.0, 200, 200))
    driver_a = FlowKey(3000, 1)
    driver_b = FlowKey(3001, 2)
    flows.append(FlowSpec(driver_a, TrafficPattern.CBR, 50.0, 200, 200))
    flows.append(FlowSpec(driver_b, TrafficPattern.CBR, 50.0, 200, 200))
    # the port moves 25 kpps at 200 B; bursts offer ~1.6x that, so latency
    # ramps through each burst window and drains in the window after
    anomalies = []
    for w in (3, 5, 7, 9):
        anomalies.append(
            AnomalyEvent(AnomalyKind.MICROBURST, start_s=float(w), duration_s=1.0,
                         target_flows=(driver_a,), burst_factor=365.0)
        )
        anomalies.append(
            AnomalyEvent(AnomalyKind.MICROBURST, start_s=float(w), duration_s=1.0,
                         target_flows=(driver_b,), burst_factor=365.0)
        )
    spec = ScenarioSpec(
        duration_s=11.0,
        seed=seed,
        flows=tuple(flows),
        qfi_to_qid={1: 0, 2: 1},
        queue_policy={
            0: QueuePolicy(tier=0, weight=1, service_rate_bps=40e6, buffer_pkts=30000),
            1: QueuePolicy(tier=0, weight=1, service_rate_bps=40e6, buffer_pkts=30000),
        },
        anomalies=tuple(anomalies),
    )
    cfg = TelemetryConfig(width=128, depth=3, fit_windows=2, dsmp_delta_ns=10_000, n_blocks=2)
    return spec, cfg


PRESETS = {
    "smoke": smoke,
    "microburst": microburst,
    "congestion": congestion,
    "contention": contention,
    "policy_abuse": policy_abuse,
    "mixed": mixed,
    "burst_cost": burst_cost,
}


def build(name: str, seed: int | None = None) -> tuple[ScenarioSpec, TelemetryConfig]:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; have {sorted(PRESETS)}")
    if seed is None:
        return PRESETS[name]()
    return PRESETS[name](seed=seed)
