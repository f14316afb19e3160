"""Comparison telemetry pipelines: per-class counters and triggered postcards.

Two references bracket the design space:

* PM counters: per-QFI packet/byte/drop totals and mean delay, polled once
  per window. Exact (no sampling error) but blind below QFI granularity;
  export cost is O(active QFIs).
* Change-triggered postcards (delta sampling): a per-packet report emitted
  only when the monitored metric moved more than delta since the flow's last
  export (first packet of a flow always exports). Cost follows traffic
  dynamics, which is exactly the property the fixed-size sketch avoids.

Both share the line-delimited record convention with a leading mode tag.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import Color, FlowKey, PacketEvent
from .simulator import DeliveredBatch, DropRecord


class TelemetryMode(Enum):
    PM = "pm"
    SKETCH = "sketch"
    DSMP = "dsmp"


PM_RECORD_BYTES = 32
POSTCARD_BYTES = 32


def sketch_record_bytes(bins_b: int) -> int:
    """Cost-model size of one bucket record: row/col ids, 2B bin counters,
    3 color counters, and the packet counter as 32-bit fields plus a 64-bit
    byte counter."""
    return 4 * (2 + 2 * bins_b + 3 + 1) + 8


@dataclass
class QfiCounters:
    """One QFI's aggregate counters for one window (tunnel identity erased)."""

    qfi: int
    window: int
    pkt_count: int = 0
    byte_count: int = 0
    drop_count: int = 0
    sojourn_sum_ns: int = 0

    @property
    def mean_delay_ns(self) -> float:
        if self.pkt_count == 0:
            return 0.0
        return self.sojourn_sum_ns / self.pkt_count

    def to_line(self) -> str:
        return (
            f"pm {self.window} {self.qfi} {self.pkt_count} {self.byte_count} "
            f"{self.drop_count} {self.mean_delay_ns:.3f}"
        )


@dataclass(frozen=True)
class Postcard:
    """Stateless per-packet report emitted on trigger; carries no sketch state."""

    key: FlowKey
    qid: int
    arrival_ns: int
    sojourn_ns: int
    color: Color
    bytes: int

    def to_line(self, window: int) -> str:
        return (
            f"dsmp {window} {self.key.teid} {self.key.qfi} {self.qid} "
            f"{self.arrival_ns} {self.sojourn_ns} {int(self.color)} {self.bytes}"
        )


def pm_update(counters: dict[int, QfiCounters], ev: PacketEvent, window: int) -> None:
    """Fold one delivered packet into its QFI row (per-event reference API)."""
    row = counters.get(ev.key.qfi)
    if row is None:
        row = counters[ev.key.qfi] = QfiCounters(qfi=ev.key.qfi, window=window)
    row.pkt_count += 1
    row.byte_count += ev.bytes
    row.sojourn_sum_ns += ev.sojourn_ns


def pm_record_drop(counters: dict[int, QfiCounters], qfi: int, window: int) -> None:
    row = counters.get(qfi)
    if row is None:
        row = counters[qfi] = QfiCounters(qfi=qfi, window=window)
    row.drop_count += 1


def pm_window(
    delivered: DeliveredBatch,
    drops: DropRecord,
    window: int,
    sel: np.ndarray,
    drop_sel: np.ndarray,
) -> list[QfiCounters]:
    """Aggregate one window of monitored traffic by QFI (vectorized path)."""
    rows: dict[int, QfiCounters] = {}
    mask = sel & delivered.monitored
    qfis = delivered.qfi[mask]
    for qfi in np.unique(qfis):
        m = qfis == qfi
        rows[int(qfi)] = QfiCounters(
            qfi=int(qfi),
            window=window,
            pkt_count=int(m.sum()),
            byte_count=int(delivered.bytes[mask][m].sum()),
            sojourn_sum_ns=int(delivered.sojourn_ns[mask][m].sum()),
        )
    dmask = drop_sel & drops.monitored
    for qfi in np.unique(drops.qfi[dmask]):
        row = rows.get(int(qfi))
        if row is None:
            row = rows[int(qfi)] = QfiCounters(qfi=int(qfi), window=window)
        row.drop_count = int((drops.qfi[dmask] == qfi).sum())
    return [rows[q] for q in sorted(rows)]


@dataclass
class DeltaSampler:
    """Per-flow change detector over sojourn latency.

    Emits a postcard when |sojourn - last_exported_sojourn| > delta_ns; the
    first packet of a flow always exports. State is an exact per-flow map
    (a deployable version would sketch it; as a visibility/cost reference the
    exact map is the fairest comparison).
    """

    delta_ns: int
    last_exported: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.delta_ns <= 0:
            raise ValueError(f"delta_ns must be positive, got {self.delta_ns}")

    def offer(self, ev: PacketEvent) -> Postcard | None:
        code = ev.key.code()
        last = self.last_exported.get(code)
        if last is not None and abs(ev.sojourn_ns - last) <= self.delta_ns:
            return None
        self.last_exported[code] = ev.sojourn_ns
        return Postcard(
            key=ev.key,
            qid=ev.qid,
            arrival_ns=ev.arrival_ns,
            sojourn_ns=ev.sojourn_ns,
            color=ev.color,
            bytes=ev.bytes,
        )

    def offer_batch(self, delivered: DeliveredBatch, sel: np.ndarray) -> np.ndarray:
        """Indices of packets (within the full batch) that export postcards."""
        idx = np.nonzero(sel & delivered.monitored)[0]
        codes = delivered.codes()
        soj = delivered.sojourn_ns
        delta = self.delta_ns
        last = self.last_exported
        out = []
        for i in idx:
            code = int(codes[i])
            s = int(soj[i])
            prev = last.get(code)
            if prev is None or abs(s - prev) > delta:
                last[code] = s
                out.append(i)
        return np.array(out, dtype=np.int64)


def export_cost(
    mode: TelemetryMode,
    *,
    active_qfis: int = 0,
    width: int = 0,
    depth: int = 0,
    bins_b: int = 8,
    num_qids: int = 0,
    postcards: int = 0,
) -> int:
    """Bytes exported for one window under each telemetry mode.

    PM scales with active QFIs, postcards with traffic; the sketch cost is a
    pure function of configuration, identical for an idle window and a burst.
    """
    if mode is TelemetryMode.PM:
        return PM_RECORD_BYTES * active_qfis
    if mode is TelemetryMode.SKETCH:
        return sketch_record_bytes(bins_b) * depth * width * num_qids
    return POSTCARD_BYTES * postcards
