"""Per-window feature extraction, detectors, and evaluation metrics.

Feature vectors are extracted at the native granularity of each telemetry
mode: per-flow for sketch estimates and postcards, per-QFI for PM counters.
Fields a mode cannot observe are ABSENT (None), never zero-filled; a zero
says "measured nothing", absence says "cannot measure".

Detection is per (window, scope). Two built-in scorers:

* the diagnostic-lift rule: fire when the estimated diagnostic ratio of a
  flow exceeds its baseline ceiling (baseline diagnostic mass plus the
  collision floor, over baseline volume);
* a ridge-regularized linear scorer over a per-anomaly-kind feature mask,
  trained and applied under temporally blocked cross-fitting so train and
  test windows never interleave.

External ML stays pluggable: features and outcomes serialize to columnar
text, and anything that can score a feature file can act as a detector.

Window-level evaluation reduces scope scores by max, then computes AUPRC by
step interpolation over the score ranking (ties grouped), F1 at a tuned
threshold, and time-to-first-detection per anomaly instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .binning import DiagnosticRegion
from .baselines import Postcard, QfiCounters
from .core import FlowKey
from .simulator import AnomalyKind, GroundTruthLabel
from .sizing import FlowBaseline
from .sketch import HistogramSketch, bin_of


class FitError(ValueError):
    """Detector training is impossible on the given fold."""


@dataclass(frozen=True)
class FeatureVector:
    """One scope's telemetry view of one window. None marks ABSENT fields."""

    scope: tuple
    window: int
    mode: str
    pkts: float
    bytes: float
    diag_pkts: float | None = None
    tail_frac: float | None = None
    head_frac: float | None = None
    lat_fracs: tuple[float, ...] | None = None
    iat_fracs: tuple[float, ...] | None = None
    color_fracs: tuple[float, float, float] | None = None
    teids_per_qfi: float | None = None
    drops: float | None = None
    mean_delay_ns: float | None = None
    unregistered: bool = False

    def named_values(self) -> dict[str, float]:
        """Scalar feature map; ABSENT fields are simply missing."""
        out: dict[str, float] = {"pkts": self.pkts, "bytes": self.bytes}
        simple = (
            ("diag_pkts", self.diag_pkts),
            ("tail_frac", self.tail_frac),
            ("head_frac", self.head_frac),
            ("teids_per_qfi", self.teids_per_qfi),
            ("drops", self.drops),
            ("mean_delay_ns", self.mean_delay_ns),
        )
        for name, v in simple:
            if v is not None:
                out[name] = float(v)
        if self.lat_fracs is not None:
            for i, v in enumerate(self.lat_fracs):
                out[f"lat{i}"] = float(v)
        if self.iat_fracs is not None:
            for i, v in enumerate(self.iat_fracs):
                out[f"iat{i}"] = float(v)
        if self.color_fracs is not None:
            out["green_frac"] = float(self.color_fracs[0])
            out["yellow_frac"] = float(self.color_fracs[1])
            out["red_frac"] = float(self.color_fracs[2])
        return out


@dataclass(frozen=True)
class DetectionOutcome:
    window: int
    scope: tuple
    score: float  # in [0, 1]
    fired: bool
    detector: str


def _fracs(counts: np.ndarray) -> tuple:
    total = counts.sum()
    if total <= 0:
        return tuple(0.0 for _ in counts)
    return tuple(float(c) / float(total) for c in counts)


def extract_sketch_features(
    sketches: dict[int, HistogramSketch],
    keys: Sequence[FlowKey],
    region: DiagnosticRegion,
    window: int,
    qfi_to_qid: dict[int, int],
    registered: set[FlowKey] | None = None,
) -> list[FeatureVector]:
    """Row-minimum estimates for each key, queried on its queue's sketch.

    Keys outside the registered set still produce estimates (the sketch
    answers any key) but are flagged unregistered.
    """
    fvs: list[FeatureVector] = []
    by_qid: dict[int, list[FlowKey]] = {}
    for k in keys:
        by_qid.setdefault(qfi_to_qid[k.qfi], []).append(k)
    teids_per_qfi: dict[int, int] = {}
    raw: list[tuple[FlowKey, dict]] = []
    for qid, qkeys in sorted(by_qid.items()):
        sk = sketches[qid]
        codes = np.array([k.code() for k in qkeys], dtype=np.uint64)
        est = sk.query_flows(codes, region)
        for i, k in enumerate(qkeys):
            pkt = int(est["pkt"][i])
            if pkt > 0:
                teids_per_qfi[k.qfi] = teids_per_qfi.get(k.qfi, 0) + 1
            raw.append(
                (
                    k,
                    {
                        "pkt": pkt,
                        "bytes": int(est["bytes"][i]),
                        "lat": est["lat"][i],
                        "iat": est["iat"][i],
                        "color": est["color"][i],
                        "diag": int(est["diag"][i]),
                    },
                )
            )
    tail = sorted(region.lat_tail_bins)
    head = sorted(region.iat_head_bins)
    for k, e in raw:
        lat_total = e["lat"].sum()
        iat_total = e["iat"].sum()
        fvs.append(
            FeatureVector(
                scope=("flow", k.teid, k.qfi),
                window=window,
                mode="sketch",
                pkts=float(e["pkt"]),
                bytes=float(e["bytes"]),
                diag_pkts=float(e["diag"]),
                tail_frac=float(e["lat"][tail].sum() / lat_total) if lat_total else 0.0,
                head_frac=float(e["iat"][head].sum() / iat_total) if iat_total else 0.0,
                lat_fracs=_fracs(e["lat"]),
                iat_fracs=_fracs(e["iat"]),
                color_fracs=_fracs(e["color"]),
                teids_per_qfi=float(teids_per_qfi.get(k.qfi, 0)),
                unregistered=registered is not None and k not in registered,
            )
        )
    fvs.sort(key=lambda f: f.scope)
    return fvs


def extract_postcard_features(
    postcards: Sequence[Postcard],
    keys: Sequence[FlowKey],
    region: DiagnosticRegion,
    window: int,
    lat_edges_by_qid: dict[int, np.ndarray],
    iat_edges_by_qid: dict[int, np.ndarray],
    qfi_to_qid: dict[int, int],
    bins_b: int,
) -> list[FeatureVector]:
    """Exact per-flow stats over the sampled packets only.

    IAT samples are gaps between consecutive postcards of the same flow, the
    only spacing the collector can see.
    """
    registered = set(keys)
    by_key: dict[FlowKey, list[Postcard]] = {k: [] for k in keys}
    for pc in postcards:
        # postcards expose exact identities, so keys outside the registered
        # set (a remapped tunnel, say) still get feature rows
        by_key.setdefault(pc.key, []).append(pc)
    teids_per_qfi: dict[int, int] = {}
    for k, pcs in by_key.items():
        if pcs:
            teids_per_qfi[k.qfi] = teids_per_qfi.get(k.qfi, 0) + 1
    tail = sorted(region.lat_tail_bins)
    head = sorted(region.iat_head_bins)
    fvs = []
    for k in sorted(by_key):
        pcs = by_key[k]
        qid = qfi_to_qid[k.qfi]
        lat_edges = lat_edges_by_qid[qid]
        iat_edges = iat_edges_by_qid[qid]
        lat_counts = np.zeros(bins_b, dtype=np.int64)
        iat_counts = np.zeros(bins_b, dtype=np.int64)
        colors = np.zeros(3, dtype=np.int64)
        byte_sum = 0
        prev_arrival = None
        for pc in pcs:
            lat_counts[bin_of(pc.sojourn_ns, lat_edges)] += 1
            colors[int(pc.color)] += 1
            byte_sum += pc.bytes
            if prev_arrival is not None:
                iat_counts[bin_of(pc.arrival_ns - prev_arrival, iat_edges)] += 1
            prev_arrival = pc.arrival_ns
        lat_total = lat_counts.sum()
        iat_total = iat_counts.sum()
        diag = int(lat_counts[tail].sum() + iat_counts[head].sum())
        fvs.append(
            FeatureVector(
                scope=("flow", k.teid, k.qfi),
                window=window,
                mode="dsmp",
                pkts=float(len(pcs)),
                bytes=float(byte_sum),
                diag_pkts=float(diag),
                tail_frac=float(lat_counts[tail].sum() / lat_total) if lat_total else 0.0,
                head_frac=float(iat_counts[head].sum() / iat_total) if iat_total else 0.0,
                lat_fracs=_fracs(lat_counts),
                iat_fracs=_fracs(iat_counts),
                color_fracs=_fracs(colors),
                teids_per_qfi=float(teids_per_qfi.get(k.qfi, 0)),
                unregistered=k not in registered,
            )
        )
    return fvs


def extract_pm_features(rows: Sequence[QfiCounters], window: int) -> list[FeatureVector]:
    """QFI-scope vectors only; per-flow and distributional fields are ABSENT."""
    fvs = []
    for row in sorted(rows, key=lambda r: r.qfi):
        fvs.append(
            FeatureVector(
                scope=("qfi", row.qfi),
                window=window,
                mode="pm",
                pkts=float(row.pkt_count),
                bytes=float(row.byte_count),
                drops=float(row.drop_count),
                mean_delay_ns=float(row.mean_delay_ns),
            )
        )
    return fvs


# -- diagnostic-lift rule ------------------------------------------------------


def diag_lift_detector(
    fv: FeatureVector, base: FlowBaseline, eps: float, beta: float = 0.0
) -> DetectionOutcome:
    """Fire when the estimated diagnostic ratio exceeds the baseline ceiling.

    The ceiling is (x_k_T + eps*N_T) / x_k: the largest ratio collision noise
    alone can produce for this flow. Spillover beta does not change the rule,
    only how much lift an anomaly needs before the rule fires (see sizing).
    """
    if fv.diag_pkts is None:
        raise ValueError("diagnostic-lift rule needs a mode with diag_pkts")
    ceiling = (base.x_k_T + eps * base.n_T) / base.x_k
    if fv.pkts <= 0:
        return DetectionOutcome(fv.window, fv.scope, 0.0, False, "diag_lift")
    ratio = fv.diag_pkts / fv.pkts
    fired = ratio > ceiling
    if ceiling >= 1.0:
        score = 0.0
    else:
        score = min(1.0, max(0.0, (ratio - ceiling) / (1.0 - ceiling)))
    return DetectionOutcome(fv.window, fv.scope, score, fired, "diag_lift")


# -- linear detector with temporal blocking ---------------------------------------

DEFAULT_FEATURE_MASKS: dict[AnomalyKind, tuple[str, ...]] = {
    # volume spike plus bunched arrivals and a latency spike
    AnomalyKind.MICROBURST: ("pkts", "bytes", "head_frac", "tail_frac", "diag_pkts"),
    # sustained latency tail
    AnomalyKind.CONGESTION: ("tail_frac", "pkts", "bytes", "diag_pkts"),
    # inter-arrival distortion across flows
    AnomalyKind.CONTENTION: ("head_frac", "tail_frac", "iat0", "iat1", "iat2", "diag_pkts"),
    # per-tunnel throughput and policing shifts
    AnomalyKind.POLICY_ABUSE: ("pkts", "bytes", "green_frac", "yellow_frac", "teids_per_qfi"),
}
PM_FALLBACK_MASK = ("pkts", "bytes", "drops", "mean_delay_ns")


def feature_matrix(
    fvs: Sequence[FeatureVector], mask: Sequence[str]
) -> tuple[np.ndarray, list[str]]:
    """Matrix over the masked features available in every vector.

    Falls back to the mode's full feature set when the mask has no overlap
    (PM lacks all distributional fields, for example).
    """
    if not fvs:
        return np.zeros((0, 0)), []
    avail = set(fvs[0].named_values())
    for fv in fvs[1:]:
        avail &= set(fv.named_values())
    names = [m for m in mask if m in avail]
    if not names:
        names = [m for m in PM_FALLBACK_MASK if m in avail] or sorted(avail)
    rows = [[fv.named_values()[n] for n in names] for fv in fvs]
    return np.asarray(rows, dtype=np.float64), names


class ScopeNormalizer:
    """Per-scope robust standardization fitted on training rows.

    Feature levels differ by orders of magnitude across flows; normalizing
    each scope by its own training median/IQR turns levels into lifts.
    """

    def __init__(self) -> None:
        self.by_scope: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
        self.global_stats: tuple[np.ndarray, np.ndarray] | None = None

    def fit(self, X: np.ndarray, scopes: Sequence[tuple]) -> None:
        med = np.median(X, axis=0)
        iqr = np.quantile(X, 0.75, axis=0) - np.quantile(X, 0.25, axis=0)
        self.global_stats = (med, np.where(iqr > 0, iqr, 1.0))
        groups: dict[tuple, list[int]] = {}
        for i, s in enumerate(scopes):
            groups.setdefault(s, []).append(i)
        for s, idx in groups.items():
            sub = X[idx]
            med = np.median(sub, axis=0)
            iqr = np.quantile(sub, 0.75, axis=0) - np.quantile(sub, 0.25, axis=0)
            self.by_scope[s] = (med, np.where(iqr > 0, iqr, 1.0))

    def transform(self, X: np.ndarray, scopes: Sequence[tuple]) -> np.ndarray:
        out = np.empty_like(X, dtype=np.float64)
        for i, s in enumerate(scopes):
            med, iqr = self.by_scope.get(s, self.global_stats)
            out[i] = (X[i] - med) / iqr
        return out


class LinearDetector:
    """Deterministic ridge scorer; scores squashed to [0, 1] by a logistic."""

    def __init__(self, l2: float = 1.0):
        self.l2 = l2
        self.weights: np.ndarray | None = None
        self.mean: np.ndarray | None = None
        self.scale: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LinearDetector":
        if len(np.unique(y)) < 2:
            missing = "positive" if not y.any() else "negative"
            raise FitError(f"training data has no {missing} class")
        self.mean = X.mean(axis=0)
        std = X.std(axis=0)
        self.scale = np.where(std > 0, std, 1.0)
        xs = (X - self.mean) / self.scale
        xs = np.hstack([xs, np.ones((len(xs), 1))])
        target = np.where(y > 0, 1.0, -1.0)
        # anomaly windows are rare; balance the classes so a handful of
        # positives is not washed out by thousands of clean rows (ratio
        # capped so a tiny positive set cannot dominate the fit)
        n_pos = int((y > 0).sum())
        n_neg = len(y) - n_pos
        w_pos = min(n_neg / n_pos, 300.0)
        sample_w = np.where(y > 0, w_pos, 1.0)
        xw = xs * sample_w[:, None]
        reg = self.l2 * np.eye(xs.shape[1])
        reg[-1, -1] = 0.0  # never penalize the intercept
        self.weights = np.linalg.solve(xs.T @ xw + reg, xw.T @ target)
        return self

    def score(self, X: np.ndarray) -> np.ndarray:
        xs = (X - self.mean) / self.scale
        xs = np.hstack([xs, np.ones((len(xs), 1))])
        raw = xs @ self.weights
        return 1.0 / (1.0 + np.exp(-np.clip(raw, -60, 60)))


def _scope_matches(fv_scope: tuple, label: GroundTruthLabel) -> bool:
    ls = label.scope
    if ls == ("all",):
        return True
    if ls[0] == "flow":
        if fv_scope[0] == "flow":
            # tunnel-level attribution: a flow that remaps its class is
            # still the same culprit tunnel
            return fv_scope[1] == ls[1]
        return fv_scope == ("qfi", ls[2])  # QFI-scope view of a flow target
    if ls[0] == "qfi":
        if fv_scope[0] == "qfi":
            return fv_scope[1] == ls[1]
        return fv_scope[2] == ls[1]  # flow inside the targeted class
    return False


def label_fv(fv: FeatureVector, labels_by_window: dict[int, list[GroundTruthLabel]]) -> int | None:
    """1 = scope targeted in an active window, 0 = clean window,
    None = active window but different scope (excluded from training)."""
    active = labels_by_window.get(fv.window, [])
    if not active:
        return 0
    return 1 if any(_scope_matches(fv.scope, lb) for lb in active) else None


def temporal_blocks(windows: Sequence[int], n_blocks: int) -> list[list[int]]:
    """Contiguous window blocks; train and test never interleave."""
    uniq = sorted(set(windows))
    n_blocks = max(1, min(n_blocks, len(uniq)))
    size = math.ceil(len(uniq) / n_blocks)
    return [uniq[i : i + size] for i in range(0, len(uniq), size)]


@dataclass
class CrossFitResult:
    outcomes: list[DetectionOutcome]
    thresholds: list[float]  # one per block, tuned on that block's train folds
    feature_names: list[str]


def train_detectors(
    fvs: Sequence[FeatureVector],
    labels: Sequence[GroundTruthLabel],
    kind: AnomalyKind,
    n_blocks: int = 4,
    l2: float = 1.0,
    mask: Sequence[str] | None = None,
) -> CrossFitResult:
    """Cross-fitted linear detection for one anomaly kind over one mode.

    Every window lands in exactly one test block and is scored by a model
    trained only on the other (temporally disjoint) blocks; thresholds are
    tuned on training windows by max F1.
    """
    if not fvs:
        return CrossFitResult([], [], [])
    mask = tuple(mask) if mask is not None else DEFAULT_FEATURE_MASKS[kind]
    X, names = feature_matrix(fvs, mask)
    scopes = [fv.scope for fv in fvs]
    windows = np.array([fv.window for fv in fvs])
    labels_by_window: dict[int, list[GroundTruthLabel]] = {}
    for lb in labels:
        if lb.kind is kind:
            labels_by_window.setdefault(lb.window, []).append(lb)
    # windows where some other anomaly kind is active are neither clean
    # negatives nor positives for this detector; keep them out of training
    other_active = {lb.window for lb in labels if lb.kind is not kind}
    y = np.array([-2 if (v := label_fv(fv, labels_by_window)) is None else v for fv in fvs])
    in_other = np.array([fv.window in other_active for fv in fvs])
    y = np.where((y == 0) & in_other, -2, y)

    blocks = temporal_blocks(windows.tolist(), n_blocks)
    outcomes: list[DetectionOutcome] = []
    thresholds: list[float] = []
    for block in blocks:
        test_mask = np.isin(windows, block)
        train_mask = ~test_mask & (y >= 0)
        assert not np.isin(windows[train_mask], block).any()
        if not train_mask.any() or len(np.unique(y[train_mask])) < 2:
            missing = "positive" if not (y[train_mask] == 1).any() else "negative"
            raise FitError(
                f"{kind.value}: training folds for block starting at window "
                f"{block[0]} have no {missing} examples"
            )
        norm = ScopeNormalizer()
        norm.fit(X[train_mask], [scopes[i] for i in np.nonzero(train_mask)[0]])
        xt = norm.transform(X[train_mask], [scopes[i] for i in np.nonzero(train_mask)[0]])
        det = LinearDetector(l2=l2).fit(xt, y[train_mask])
        train_scores = det.score(xt)
        thr = best_f1_threshold(
            _window_max(windows[train_mask], train_scores),
            _window_any(windows[train_mask], y[train_mask] == 1),
        )[0]
        thresholds.append(thr)
        xs = norm.transform(X[test_mask], [scopes[i] for i in np.nonzero(test_mask)[0]])
        test_scores = det.score(xs)
        for i, idx in enumerate(np.nonzero(test_mask)[0]):
            s = float(test_scores[i])
            outcomes.append(
                DetectionOutcome(
                    window=int(windows[idx]),
                    scope=scopes[idx],
                    score=s,
                    fired=s >= thr,
                    detector=f"linear:{kind.value}",
                )
            )
    outcomes.sort(key=lambda o: (o.window, o.scope))
    return CrossFitResult(outcomes, thresholds, names)


def _window_max(windows: np.ndarray, scores: np.ndarray) -> dict[int, float]:
    out: dict[int, float] = {}
    for w, s in zip(windows.tolist(), scores.tolist()):
        if w not in out or s > out[w]:
            out[w] = s
    return out


def _window_any(windows: np.ndarray, flags: np.ndarray) -> set[int]:
    out: set[int] = set()
    for w, f in zip(windows.tolist(), flags.tolist()):
        if f:
            out.add(int(w))
    return out


# -- metrics -------------------------------------------------------------------


def auprc(y_true: Sequence[int], scores: Sequence[float]) -> float | None:
    """Area under precision-recall by step interpolation, ties grouped.

    None when there are no positives (the curve is undefined). A constant
    scorer collapses to one group and scores exactly the prevalence.
    """
    y = np.asarray(y_true, dtype=np.int64)
    s = np.asarray(scores, dtype=np.float64)
    pos = int(y.sum())
    if pos == 0:
        return None
    order = np.argsort(-s, kind="stable")
    y = y[order]
    s = s[order]
    area = 0.0
    tp = fp = 0
    prev_recall = 0.0
    i = 0
    n = len(y)
    while i < n:
        j = i
        while j < n and s[j] == s[i]:
            j += 1
        tp += int(y[i:j].sum())
        fp += (j - i) - int(y[i:j].sum())
        recall = tp / pos
        precision = tp / (tp + fp)
        area += (recall - prev_recall) * precision
        prev_recall = recall
        i = j
    return area


def f1_from_counts(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def best_f1_threshold(
    scores_by_window: dict[int, float], positive_windows: set[int]
) -> tuple[float, float]:
    """Threshold (over window-max scores) maximizing F1.

    Candidate thresholds sit midway between adjacent distinct scores, so the
    chosen cut carries margin on both sides instead of grazing a training
    score; ties prefer the higher threshold.
    """
    items = sorted(scores_by_window.items())
    if not items:
        return 1.0, 0.0
    uniq = sorted({s for _, s in items}, reverse=True)
    candidates = [(a + b) / 2 for a, b in zip(uniq, uniq[1:])] + [uniq[-1]]
    best = (1.0, -1.0)
    for thr in candidates:
        tp = sum(1 for w, s in items if s >= thr and w in positive_windows)
        fp = sum(1 for w, s in items if s >= thr and w not in positive_windows)
        fn = sum(1 for w, s in items if s < thr and w in positive_windows)
        f1 = f1_from_counts(tp, fp, fn)
        if f1 > best[1]:
            best = (thr, f1)
    return best


@dataclass
class DetectionMetrics:
    kind: str
    mode: str
    auprc: float | None
    f1: float
    positives: int
    windows: int
    ttfd_median_s: float | None
    ttfd_censored: int
    ttfd_instances: int


def ttfd_seconds(
    fired_windows: set[int],
    instances: Sequence[tuple[int, int]],
    window_len_ns: int,
) -> tuple[float | None, int, list[float]]:
    """Median delay from anomaly onset to its first fired window.

    Delay = max(0, window_start - onset): detection inside the onset window
    counts as zero (window resolution). Instances with no fired window before
    they end are censored: excluded from the median, counted separately.
    """
    values: list[float] = []
    censored = 0
    for onset_ns, end_ns in instances:
        w0 = onset_ns // window_len_ns
        w1 = max(w0, (end_ns - 1) // window_len_ns)
        hit = None
        for w in range(int(w0), int(w1) + 1):
            if w in fired_windows:
                hit = w
                break
        if hit is None:
            censored += 1
        else:
            values.append(max(0, hit * window_len_ns - onset_ns) / 1e9)
    if not values:
        return None, censored, values
    return float(np.median(values)), censored, values


def evaluate(
    outcomes: Sequence[DetectionOutcome],
    labels: Sequence[GroundTruthLabel],
    kind: AnomalyKind,
    mode: str,
    all_windows: Sequence[int],
    window_len_ns: int,
    instances: Sequence[tuple[int, int]] = (),
) -> DetectionMetrics:
    """Window-level metrics: scope scores reduce by max per window."""
    scores: dict[int, float] = {w: 0.0 for w in all_windows}
    fired: set[int] = set()
    for o in outcomes:
        if o.window in scores:
            scores[o.window] = max(scores[o.window], o.score)
        if o.fired:
            fired.add(o.window)
    positive = {lb.window for lb in labels if lb.kind is kind}
    y = [1 if w in positive else 0 for w in sorted(scores)]
    s = [scores[w] for w in sorted(scores)]
    area = auprc(y, s)
    tp = len(fired & positive)
    fp = len(fired - positive)
    fn = len(positive - fired)
    median_s, censored, _ = ttfd_seconds(fired, instances, window_len_ns)
    return DetectionMetrics(
        kind=kind.value,
        mode=mode,
        auprc=area,
        f1=f1_from_counts(tp, fp, fn),
        positives=len(positive),
        windows=len(scores),
        ttfd_median_s=median_s,
        ttfd_censored=censored,
        ttfd_instances=len(instances),
    )


def pareto_front(points: Sequence[tuple[float, float]]) -> list[bool]:
    """Flag points not dominated on (cost down, accuracy up)."""
    flags = []
    for i, (ci, ai) in enumerate(points):
        dominated = any(
            (cj <= ci and aj >= ai and (cj < ci or aj > ai)) for j, (cj, aj) in enumerate(points)
        )
        flags.append(not dominated)
    return flags
