"""Deterministic user-plane simulator.

Pipeline: per-flow traffic generation -> anomaly injection on the arrival
stream -> metering, queueing, and scheduling -> delivered packets with
sojourn times and meter colors, plus per-flow drop accounting.

Determinism rules: one master seed; every flow and every anomaly draws from
its own child generator keyed by (seed, index); merged arrivals are ordered
by (time, flow code, per-flow sequence); the service loop is single-threaded
and breaks ties by that same order. Re-running a scenario reproduces every
output array exactly.

Packets are carried in struct-of-arrays batches rather than event objects so
multi-million-packet scenarios stay cheap; the per-packet PacketEvent type is
materialized only where single-event APIs want it.

Scheduling model: one egress port serving Q queues, non-preemptive. Queues
are grouped into strict-priority tiers (lower tier number first); inside a
tier, deficit-round-robin by weight gives byte shares proportional to the
configured weights. A packet's transmission time uses its queue's configured
service rate. Metering is a two-rate three-color token bucket per flow key
(RFC 2698 color-blind order: peak bucket first); red packets drop before the
queue, full buffers tail-drop.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from .core import MAX_QFI, NS_PER_S, Color, FlowKey, PacketEvent, window_index


class ScenarioError(ValueError):
    """Scenario fails validation; message names the offending field."""


class TrafficPattern(Enum):
    CBR = "cbr"  # fixed spacing: VoIP, IoT telemetry
    ONOFF = "onoff"  # bursty on/off: streaming, gaming
    POISSON = "poisson"  # memoryless: best effort


class AnomalyKind(Enum):
    MICROBURST = "microburst"
    CONGESTION = "congestion"
    CONTENTION = "contention"
    POLICY_ABUSE = "policy_abuse"


@dataclass(frozen=True)
class FlowSpec:
    key: FlowKey
    pattern: TrafficPattern
    rate_pps: float
    bytes_min: int = 400
    bytes_max: int = 400
    on_fraction: float = 0.4  # ONOFF only
    cycle_ms: float = 400.0  # ONOFF only
    monitored: bool = True

    def mean_bytes(self) -> float:
        return (self.bytes_min + self.bytes_max) / 2.0


@dataclass(frozen=True)
class QueuePolicy:
    tier: int  # lower = served first
    weight: int  # round-robin share within the tier, in bytes
    service_rate_bps: float
    buffer_pkts: int


@dataclass(frozen=True)
class MeterSpec:
    cir_bps: float
    cbs_bytes: float
    pir_bps: float
    pbs_bytes: float


@dataclass(frozen=True)
class AnomalyEvent:
    kind: AnomalyKind
    start_s: float
    duration_s: float
    target_flows: tuple[FlowKey, ...] = ()
    target_qfis: tuple[int, ...] = ()
    burst_factor: float = 6.0  # MICROBURST: multiplies the target flow's rate
    overload_factor: float = 2.0  # CONGESTION: multiplies target-QFI load
    cross_rate_pps: float = 20_000.0  # CONTENTION: unmonitored square wave
    cross_bytes: int = 1200
    cross_period_ms: float = 200.0
    cross_qfis: tuple[int, ...] = ()  # CONTENTION entry classes; targets are the label scope
    remapped_qfi: int = 0  # POLICY_ABUSE: destination class

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s


@dataclass(frozen=True)
class GroundTruthLabel:
    window: int
    kind: AnomalyKind
    scope: tuple  # ("flow", teid, qfi) or ("qfi", qfi)


@dataclass
class ArrivalBatch:
    """Pre-queue arrivals, ordered by (time, flow code, per-flow sequence)."""

    teid: np.ndarray
    qfi: np.ndarray
    bytes: np.ndarray
    arrival_ns: np.ndarray
    monitored: np.ndarray
    injected: np.ndarray

    def __len__(self) -> int:
        return len(self.arrival_ns)

    def codes(self) -> np.ndarray:
        return (self.teid.astype(np.uint64) << np.uint64(6)) | self.qfi.astype(np.uint64)


@dataclass
class DeliveredBatch:
    """Post-queue packets in arrival order, with sojourn, color, and queue."""

    teid: np.ndarray
    qfi: np.ndarray
    qid: np.ndarray
    bytes: np.ndarray
    arrival_ns: np.ndarray
    sojourn_ns: np.ndarray
    color: np.ndarray
    monitored: np.ndarray
    injected: np.ndarray

    def __len__(self) -> int:
        return len(self.arrival_ns)

    def codes(self) -> np.ndarray:
        return (self.teid.astype(np.uint64) << np.uint64(6)) | self.qfi.astype(np.uint64)

    def depart_ns(self) -> np.ndarray:
        return self.arrival_ns + self.sojourn_ns

    def telemetry_order(self) -> np.ndarray:
        """Indices in egress order: telemetry observes packets as they leave
        the queues, which is where bunching and oscillation become visible."""
        return np.argsort(self.depart_ns(), kind="stable")

    def event(self, i: int) -> PacketEvent:
        return PacketEvent(
            key=FlowKey(int(self.teid[i]), int(self.qfi[i])),
            qid=int(self.qid[i]),
            bytes=int(self.bytes[i]),
            arrival_ns=int(self.arrival_ns[i]),
            sojourn_ns=int(self.sojourn_ns[i]),
            color=Color(int(self.color[i])),
        )

    def events(self) -> Iterable[PacketEvent]:
        for i in range(len(self)):
            yield self.event(i)


@dataclass
class DropRecord:
    teid: np.ndarray
    qfi: np.ndarray
    qid: np.ndarray
    time_ns: np.ndarray
    reason: np.ndarray  # 0 = meter red, 1 = buffer overflow
    monitored: np.ndarray

    def __len__(self) -> int:
        return len(self.time_ns)


@dataclass(frozen=True)
class ScenarioSpec:
    duration_s: float
    seed: int
    flows: tuple[FlowSpec, ...]
    qfi_to_qid: dict[int, int]
    queue_policy: dict[int, QueuePolicy]
    meters: dict[FlowKey, MeterSpec] = field(default_factory=dict)
    default_meter: MeterSpec | None = None
    anomalies: tuple[AnomalyEvent, ...] = ()
    window_len_ns: int = NS_PER_S

    def validate(self) -> None:
        if self.duration_s <= 0:
            raise ScenarioError("duration_s: must be positive")
        if not self.flows:
            raise ScenarioError("flows: at least one flow required")
        for qfi, qid in self.qfi_to_qid.items():
            if not 0 <= qfi <= MAX_QFI:
                raise ScenarioError(f"qfi_to_qid: qfi {qfi} out of range")
            if qid not in self.queue_policy:
                raise ScenarioError(f"qfi_to_qid: qfi {qfi} maps to unknown qid {qid}")
        for fl in self.flows:
            if fl.key.qfi not in self.qfi_to_qid:
                raise ScenarioError(f"flows: flow {fl.key} has unmapped qfi {fl.key.qfi}")
            if fl.rate_pps <= 0:
                raise ScenarioError(f"flows: flow {fl.key} rate_pps must be positive")
            if not 1 <= fl.bytes_min <= fl.bytes_max:
                raise ScenarioError(f"flows: flow {fl.key} byte range invalid")
        for qid, pol in self.queue_policy.items():
            if pol.service_rate_bps <= 0:
                raise ScenarioError(f"queue_policy: qid {qid} service_rate_bps must be positive")
            if pol.buffer_pkts < 1:
                raise ScenarioError(f"queue_policy: qid {qid} buffer_pkts must be >= 1")
            if pol.weight < 0:
                raise ScenarioError(f"queue_policy: qid {qid} weight must be >= 0")
        tiers: dict[int, list[int]] = {}
        for qid, pol in self.queue_policy.items():
            tiers.setdefault(pol.tier, []).append(qid)
        for tier, qids in tiers.items():
            if all(self.queue_policy[q].weight == 0 for q in qids):
                raise ScenarioError(f"queue_policy: tier {tier} has all-zero weights")
        for i, an in enumerate(self.anomalies):
            if an.duration_s < 0:
                raise ScenarioError(f"anomalies[{i}]: negative duration")
            if an.start_s < 0 or an.end_s > self.duration_s + 1e-9:
                raise ScenarioError(f"anomalies[{i}]: window outside scenario duration")
            if an.kind is AnomalyKind.POLICY_ABUSE and an.remapped_qfi not in self.qfi_to_qid:
                raise ScenarioError(f"anomalies[{i}]: remapped_qfi {an.remapped_qfi} unmapped")
            if an.kind is AnomalyKind.CONTENTION and not an.target_qfis:
                raise ScenarioError(f"anomalies[{i}]: contention needs target_qfis")
        # runaway guard: offered load versus what the port can move
        offered = sum(fl.rate_pps * fl.mean_bytes() * 8 for fl in self.flows)
        capacity = max(pol.service_rate_bps for pol in self.queue_policy.values())
        if offered > 10 * capacity:
            raise ScenarioError(
                f"flows: offered load {offered:.3g} bps exceeds 10x service rate {capacity:.3g} bps"
            )


# -- traffic generation ---------------------------------------------------------


def _flow_rng(seed: int, idx: int) -> np.random.Generator:
    return np.random.default_rng([seed, 0xF10A, idx])


def _anomaly_rng(seed: int, idx: int) -> np.random.Generator:
    return np.random.default_rng([seed, 0xA001, idx])


def _cbr_times(rate_pps: float, start_ns: int, end_ns: int, phase_ns: int) -> np.ndarray:
    interval = max(1, round(NS_PER_S / rate_pps))
    first = start_ns + phase_ns
    if first >= end_ns:
        return np.empty(0, dtype=np.int64)
    n = (end_ns - 1 - first) // interval + 1
    return first + interval * np.arange(n, dtype=np.int64)


def _poisson_times(rng, rate_pps: float, start_ns: int, end_ns: int) -> np.ndarray:
    span = end_ns - start_ns
    n_est = int(rate_pps * span / NS_PER_S * 1.3) + 20
    gaps = np.maximum(1, rng.exponential(NS_PER_S / rate_pps, size=n_est)).astype(np.int64)
    times = start_ns + np.cumsum(gaps)
    times = times[times < end_ns]
    while len(times) and times[-1] < end_ns - 4 * NS_PER_S / rate_pps:
        extra = np.maximum(1, rng.exponential(NS_PER_S / rate_pps, size=n_est)).astype(np.int64)
        more = times[-1] + np.cumsum(extra)
        times = np.concatenate([times, more[more < end_ns]])
    return times


def _onoff_times(rng, fl: FlowSpec, start_ns: int, end_ns: int) -> np.ndarray:
    peak = fl.rate_pps / fl.on_fraction
    cycle_ns = fl.cycle_ms * 1e6
    on_mean = fl.on_fraction * cycle_ns
    off_mean = (1 - fl.on_fraction) * cycle_ns
    chunks = []
    t = start_ns + int(rng.uniform(0, cycle_ns))
    while t < end_ns:
        on_len = max(1.0, rng.exponential(on_mean))
        chunk_end = min(end_ns, int(t + on_len))
        chunks.append(_cbr_times(peak, int(t), chunk_end, 0))
        t += on_len + max(1.0, rng.exponential(off_mean))
    if not chunks:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(chunks)


def _flow_arrivals(fl: FlowSpec, rng, start_ns: int, end_ns: int) -> np.ndarray:
    if fl.pattern is TrafficPattern.CBR:
        interval = max(1, round(NS_PER_S / fl.rate_pps))
        return _cbr_times(fl.rate_pps, start_ns, end_ns, int(rng.integers(0, interval)))
    if fl.pattern is TrafficPattern.POISSON:
        return _poisson_times(rng, fl.rate_pps, start_ns, end_ns)
    return _onoff_times(rng, fl, start_ns, end_ns)


def _sizes(rng, fl: FlowSpec, n: int) -> np.ndarray:
    if fl.bytes_min == fl.bytes_max:
        return np.full(n, fl.bytes_min, dtype=np.int64)
    return rng.integers(fl.bytes_min, fl.bytes_max + 1, size=n).astype(np.int64)


def _make_batch(parts: list[tuple]) -> ArrivalBatch:
    if not parts:
        empty = np.empty(0, dtype=np.int64)
        return ArrivalBatch(empty, empty, empty, empty,
                            np.empty(0, dtype=bool), np.empty(0, dtype=bool))
    teid = np.concatenate([p[0] for p in parts])
    qfi = np.concatenate([p[1] for p in parts])
    byt = np.concatenate([p[2] for p in parts])
    arr = np.concatenate([p[3] for p in parts])
    mon = np.concatenate([p[4] for p in parts])
    inj = np.concatenate([p[5] for p in parts])
    seq = np.concatenate([np.arange(len(p[0]), dtype=np.int64) for p in parts])
    code = (teid.astype(np.uint64) << np.uint64(6)) | qfi.astype(np.uint64)
    order = np.lexsort((seq, code, arr))
    return ArrivalBatch(teid[order], qfi[order], byt[order], arr[order], mon[order], inj[order])


def _flow_part(fl: FlowSpec, times: np.ndarray, rng, injected: bool) -> tuple:
    n = len(times)
    return (
        np.full(n, fl.key.teid, dtype=np.int64),
        np.full(n, fl.key.qfi, dtype=np.int64),
        _sizes(rng, fl, n),
        times.astype(np.int64),
        np.full(n, fl.monitored, dtype=bool),
        np.full(n, injected, dtype=bool),
    )


def generate_traffic(spec: ScenarioSpec) -> ArrivalBatch:
    """Baseline (anomaly-free) arrivals for every configured flow."""
    spec.validate()
    end_ns = int(spec.duration_s * NS_PER_S)
    parts = []
    for idx, fl in enumerate(spec.flows):
        rng = _flow_rng(spec.seed, idx)
        times = _flow_arrivals(fl, rng, 0, end_ns)
        parts.append(_flow_part(fl, times, rng, injected=False))
    return _make_batch(parts)


# -- anomaly injection ------------------------------------------------------------


def inject_anomaly(
    batch: ArrivalBatch, ev: AnomalyEvent, spec: ScenarioSpec, anomaly_idx: int = 0
) -> ArrivalBatch:
    """Overlay one anomaly on an arrival stream; anomalies compose additively."""
    if ev.duration_s <= 0:
        return batch
    rng = _anomaly_rng(spec.seed, anomaly_idx)
    start_ns = int(ev.start_s * NS_PER_S)
    end_ns = int(ev.end_s * NS_PER_S)
    flows_by_key = {fl.key: fl for fl in spec.flows}
    parts = [
        (batch.teid, batch.qfi, batch.bytes, batch.arrival_ns, batch.monitored, batch.injected)
    ]

    if ev.kind is AnomalyKind.MICROBURST:
        for key in ev.target_flows:
            fl = flows_by_key[key]
            extra_rate = (ev.burst_factor - 1.0) * fl.rate_pps
            interval = max(1, round(NS_PER_S / extra_rate))
            times = _cbr_times(extra_rate, start_ns, end_ns, int(rng.integers(0, interval)))
            parts.append(_flow_part(fl, times, rng, injected=True))

    elif ev.kind is AnomalyKind.CONGESTION:
        for fl in spec.flows:
            if fl.key.qfi in ev.target_qfis and fl.monitored:
                extra_rate = (ev.overload_factor - 1.0) * fl.rate_pps
                if extra_rate <= 0:
                    continue
                times = _poisson_times(rng, extra_rate, start_ns, end_ns)
                parts.append(_flow_part(fl, times, rng, injected=True))

    elif ev.kind is AnomalyKind.CONTENTION:
        # unmonitored cross traffic on a square wave: full rate for half of
        # each period, silent for the other half, shared into target queues
        period_ns = int(ev.cross_period_ms * 1e6)
        entry_qfis = ev.cross_qfis if ev.cross_qfis else ev.target_qfis
        for n, qfi in enumerate(entry_qfis):
            cross = FlowSpec(
                key=FlowKey(0xFF000000 + anomaly_idx * 64 + n, qfi),
                pattern=TrafficPattern.CBR,
                rate_pps=ev.cross_rate_pps,
                bytes_min=ev.cross_bytes,
                bytes_max=ev.cross_bytes,
                monitored=False,
            )
            chunks = []
            t = start_ns
            while t < end_ns:
                on_end = min(t + period_ns // 2, end_ns)
                chunks.append(_cbr_times(ev.cross_rate_pps, t, on_end, 0))
                t += period_ns
            times = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
            parts.append(_flow_part(cross, times, rng, injected=True))

    elif ev.kind is AnomalyKind.POLICY_ABUSE:
        # remap the target flows' class in place: same tunnel, higher priority
        qfi = batch.qfi.copy()
        inj = batch.injected.copy()
        in_window = (batch.arrival_ns >= start_ns) & (batch.arrival_ns < end_ns)
        for key in ev.target_flows:
            mask = in_window & (batch.teid == key.teid) & (batch.qfi == key.qfi)
            qfi[mask] = ev.remapped_qfi
            inj[mask] = True
        parts = [(batch.teid, qfi, batch.bytes, batch.arrival_ns, batch.monitored, inj)]

    return _make_batch(parts)


def inject_all(batch: ArrivalBatch, spec: ScenarioSpec) -> ArrivalBatch:
    for idx, ev in enumerate(spec.anomalies):
        batch = inject_anomaly(batch, ev, spec, anomaly_idx=idx)
    return batch


def label_windows(spec: ScenarioSpec) -> list[GroundTruthLabel]:
    """One label per (window, kind, scope) overlapping an anomaly interval."""
    labels = []
    for ev in spec.anomalies:
        if ev.duration_s <= 0:
            continue
        first = window_index(int(ev.start_s * NS_PER_S), spec.window_len_ns)
        last = window_index(int(ev.end_s * NS_PER_S) - 1, spec.window_len_ns)
        scopes: list[tuple] = [("flow", k.teid, k.qfi) for k in ev.target_flows]
        scopes += [("qfi", q) for q in ev.target_qfis]
        if not scopes:
            scopes = [("all",)]
        for w in range(first, last + 1):
            for scope in scopes:
                labels.append(GroundTruthLabel(window=w, kind=ev.kind, scope=scope))
    return labels


# -- metering + queueing + scheduling ----------------------------------------------


class _Trtcm:
    __slots__ = ("cir", "pir", "cbs", "pbs", "tc", "tp", "last_ns")

    def __init__(self, m: MeterSpec):
        self.cir = m.cir_bps / (8 * NS_PER_S)  # bytes per ns
        self.pir = m.pir_bps / (8 * NS_PER_S)
        self.cbs = float(m.cbs_bytes)
        self.pbs = float(m.pbs_bytes)
        self.tc = float(m.cbs_bytes)
        self.tp = float(m.pbs_bytes)
        self.last_ns = 0

    def mark(self, t_ns: int, size: int) -> int:
        elapsed = t_ns - self.last_ns
        if elapsed > 0:
            self.tc = min(self.cbs, self.tc + elapsed * self.cir)
            self.tp = min(self.pbs, self.tp + elapsed * self.pir)
            self.last_ns = t_ns
        if self.tp < size:
            return 2  # red
        if self.tc < size:
            self.tp -= size
            return 1  # yellow
        self.tc -= size
        self.tp -= size
        return 0  # green


DROP_METER = 0
DROP_OVERFLOW = 1

_DRR_QUANTUM_BYTES = 2000  # per weight unit; >= max packet so every turn serves


def run_queues(batch: ArrivalBatch, spec: ScenarioSpec) -> tuple[DeliveredBatch, DropRecord]:
    """Meter, enqueue, and serve an arrival stream; returns delivered packets
    (in arrival order) and the drop record."""
    spec.validate()
    n = len(batch)
    qid_of_qfi = np.full(MAX_QFI + 1, -1, dtype=np.int64)
    for qfi, qid in spec.qfi_to_qid.items():
        qid_of_qfi[qfi] = qid
    pkt_qid = qid_of_qfi[batch.qfi]
    if (pkt_qid < 0).any():
        bad = int(batch.qfi[pkt_qid < 0][0])
        raise ScenarioError(f"qfi_to_qid: stream contains unmapped qfi {bad}")

    qids = sorted(spec.queue_policy)
    tiers: dict[int, list[int]] = {}
    for q in qids:
        pol = spec.queue_policy[q]
        if pol.weight > 0:
            tiers.setdefault(pol.tier, []).append(q)
    tier_order = sorted(tiers)
    rings = {t: tiers[t] for t in tier_order}
    ring_pos = {t: 0 for t in tier_order}
    granted = {t: False for t in tier_order}
    deficit = {q: 0.0 for q in qids}
    quantum = {q: spec.queue_policy[q].weight * _DRR_QUANTUM_BYTES for q in qids}
    buffers = {q: spec.queue_policy[q].buffer_pkts for q in qids}
    ns_per_byte = {q: 8 * NS_PER_S / spec.queue_policy[q].service_rate_bps for q in qids}
    queues: dict[int, deque] = {q: deque() for q in qids}

    meters: dict[tuple[int, int], _Trtcm] = {}
    for key, m in spec.meters.items():
        meters[(key.teid, key.qfi)] = _Trtcm(m)
    default_meter = spec.default_meter

    arrival = batch.arrival_ns
    sizes = batch.bytes
    teid_arr = batch.teid
    qfi_arr = batch.qfi

    sojourn = np.full(n, -1, dtype=np.int64)
    color = np.zeros(n, dtype=np.int8)
    backlog = 0

    drop_idx: list[int] = []
    drop_reason: list[int] = []

    def begin_service(start_ns: int) -> int:
        nonlocal backlog
        for t in tier_order:
            ring = rings[t]
            if not any(queues[q] for q in ring):
                continue
            while True:
                q = ring[ring_pos[t]]
                queue = queues[q]
                if queue:
                    head = queue[0]
                    need = sizes[head]
                    if not granted[t]:
                        deficit[q] += quantum[q]
                        granted[t] = True
                    if deficit[q] >= need:
                        deficit[q] -= need
                        queue.popleft()
                        backlog -= 1
                        tx = int(math.ceil(need * ns_per_byte[q]))
                        depart = start_ns + max(tx, 1)
                        sojourn[head] = depart - arrival[head]
                        return depart
                else:
                    deficit[q] = 0.0
                granted[t] = False
                ring_pos[t] = (ring_pos[t] + 1) % len(ring)
        raise RuntimeError("begin_service called with empty backlog")

    free_at = 0
    for i in range(n):
        t = int(arrival[i])
        while backlog and free_at < t:
            free_at = begin_service(free_at)
        size = int(sizes[i])
        meter_key = (int(teid_arr[i]), int(qfi_arr[i]))
        meter = meters.get(meter_key)
        if meter is None and default_meter is not None:
            meter = meters[meter_key] = _Trtcm(default_meter)
        if meter is not None:
            c = meter.mark(t, size)
        else:
            c = 0
        if c == 2:
            drop_idx.append(i)
            drop_reason.append(DROP_METER)
            continue
        color[i] = c
        q = int(pkt_qid[i])
        if len(queues[q]) >= buffers[q]:
            drop_idx.append(i)
            drop_reason.append(DROP_OVERFLOW)
            continue
        queues[q].append(i)
        backlog += 1
        if free_at <= t:
            free_at = begin_service(t)
    while backlog:
        free_at = begin_service(free_at)

    delivered_mask = sojourn >= 0
    drops = np.array(drop_idx, dtype=np.int64)
    delivered = DeliveredBatch(
        teid=teid_arr[delivered_mask],
        qfi=qfi_arr[delivered_mask],
        qid=pkt_qid[delivered_mask],
        bytes=sizes[delivered_mask],
        arrival_ns=arrival[delivered_mask],
        sojourn_ns=sojourn[delivered_mask],
        color=color[delivered_mask],
        monitored=batch.monitored[delivered_mask],
        injected=batch.injected[delivered_mask],
    )
    drop_rec = DropRecord(
        teid=teid_arr[drops] if len(drops) else np.empty(0, dtype=np.int64),
        qfi=qfi_arr[drops] if len(drops) else np.empty(0, dtype=np.int64),
        qid=pkt_qid[drops] if len(drops) else np.empty(0, dtype=np.int64),
        time_ns=arrival[drops] if len(drops) else np.empty(0, dtype=np.int64),
        reason=np.array(drop_reason, dtype=np.int8),
        monitored=batch.monitored[drops] if len(drops) else np.empty(0, dtype=bool),
    )
    return delivered, drop_rec


def simulate(spec: ScenarioSpec) -> tuple[DeliveredBatch, DropRecord, list[GroundTruthLabel]]:
    """generate -> inject -> queues -> labels, all from one seed."""
    arrivals = inject_all(generate_traffic(spec), spec)
    delivered, drops = run_queues(arrivals, spec)
    return delivered, drops, label_windows(spec)
