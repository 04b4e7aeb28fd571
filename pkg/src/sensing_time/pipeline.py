"""Per-trial processing and the cohort statistics battery."""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import stats
from .config import RunConfig
from .events import (
    Exclusion,
    Override,
    TrialEvents,
    _target_boxes,
    apply_overrides,
    classify,
    read_overrides,
)
from .ingestion import (
    GROUPS,
    IngestionError,
    EmptyStream,
    SyncedTrial,
    TrialManifest,
    align,
    parse_detections,
    parse_gaze,
    parse_manifest,
    parse_telemetry,
)
from .metrics import (
    EXCLUDED,
    MISS,
    OUTLIER,
    VALID,
    MetricError,
    TrialMetrics,
    UncertaintyReport,
    excluded_status,
    initial_gaze_distance,
    nearest_telemetry,
    roi_center,
    time_to_collision,
    type_b_uncertainty,
    union_box,
)


class DegenerateCohort(ValueError):
    pass


@dataclass(frozen=True)
class AuditEntry:
    trial_id: str
    kind: str
    field: str
    value: str
    reason: str


@dataclass(frozen=True)
class TrialOutcome:
    metrics: TrialMetrics
    events: TrialEvents
    diagnostics: tuple[str, ...] = ()
    audit: tuple[AuditEntry, ...] = ()


def _excluded_outcome(manifest: TrialManifest, code: Exclusion, diagnostics) -> TrialOutcome:
    events = TrialEvents(manifest.trial_id, exclusion=code)
    metrics = TrialMetrics(
        manifest.trial_id, manifest.subject_id, manifest.group, None, None, None, None,
        excluded_status(code), manifest.crash_flag,
    )
    audit = (AuditEntry(manifest.trial_id, "exclusion", "exclusion", str(code), "automatic"),)
    return TrialOutcome(metrics, events, tuple(diagnostics), audit)


def analyze_trial(
    trial: SyncedTrial, config: RunConfig = RunConfig(), overrides: Sequence[Override] = ()
) -> TrialOutcome:
    """Events, overrides and metrics for one aligned trial."""
    m = trial.manifest
    diagnostics: list[str] = []
    auto = classify(trial, config.debounce_frames, config.conf_min, config.gaze_radius_px)
    events = apply_overrides(auto, [o for o in overrides if o.trial_id == m.trial_id])

    speed = ttc = igd = None
    if events.t1_ms is not None:
        try:
            sample = nearest_telemetry(trial.telemetry, events.t1_ms)
            speed = sample.speed_kmh
            ttc = time_to_collision(sample.dist_m, sample.speed_kmh)
        except MetricError as exc:
            diagnostics.append(f"{m.trial_id}: {exc}")
        try:
            frame = trial.frame_index(events.t1_ms)
            boxes = _target_boxes(trial, frame, config.conf_min)
            if not boxes:
                raise MetricError(f"no target box at t1 = {events.t1_ms} ms")
            gaze = (trial.gaze_x[frame], trial.gaze_y[frame]) if trial.gaze_valid[frame] else None
            igd = initial_gaze_distance(gaze, roi_center(union_box(boxes)))
        except (KeyError, MetricError) as exc:
            diagnostics.append(f"{m.trial_id}: IGD unavailable ({exc})")

    st = events.st_ms
    if events.exclusion is not None:
        status = excluded_status(events.exclusion)
    elif st >= config.max_st_ms:
        status = MISS
    else:
        status = VALID
    if st is not None and st < config.low_st_ms:
        diagnostics.append(f"{m.trial_id}: sensing time {st} ms is below {config.low_st_ms:g} ms")

    audit = [
        AuditEntry(m.trial_id, "override", o.field, o.value, o.reason) for o in events.applied
    ]
    if events.exclusion is not None:
        source = "override" if events.exclusion != auto.exclusion else "automatic"
        audit.append(AuditEntry(m.trial_id, "exclusion", "exclusion", str(events.exclusion), source))
    metrics = TrialMetrics(m.trial_id, m.subject_id, m.group, st, speed, igd, ttc, status, m.crash_flag)
    return TrialOutcome(metrics, events, tuple(diagnostics), tuple(audit))


def process_manifest(
    manifest: TrialManifest | str | Path, config: RunConfig = RunConfig(),
    overrides: Sequence[Override] = (),
) -> TrialOutcome:
    """Parse, align and analyse one trial described by a manifest.

    Absent or empty streams become a MissingData exclusion; malformed
    content raises.
    """
    if not isinstance(manifest, TrialManifest):
        manifest = parse_manifest(manifest)
    diagnostics: list[str] = []
    paths = {
        "gaze": manifest.gaze_path,
        "detections": manifest.detections_path,
        "telemetry": manifest.telemetry_path,
    }
    absent = [k for k, p in paths.items() if p is None or not Path(p).is_file()]
    if absent:
        diagnostics.append(f"{manifest.trial_id}: MissingData: no {', '.join(absent)} file")
        return _excluded_outcome(manifest, Exclusion.MISSING_DATA, diagnostics)
    ovs = list(overrides)
    if manifest.overrides_path is not None:
        ovs = read_overrides(manifest.overrides_path) + ovs
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        gaze = parse_gaze(paths["gaze"])
        dets = parse_detections(paths["detections"], manifest.width, manifest.height, manifest.fps)
        tele = parse_telemetry(paths["telemetry"])
    diagnostics.extend(str(w.message) for w in caught)
    try:
        trial = align(manifest, gaze, dets, tele, max_gap_ms=config.max_gap_ms)
    except EmptyStream as exc:
        diagnostics.append(f"{manifest.trial_id}: MissingData: {exc}")
        return _excluded_outcome(manifest, Exclusion.MISSING_DATA, diagnostics)
    out = analyze_trial(trial, config, ovs)
    return replace(out, diagnostics=tuple(diagnostics) + out.diagnostics)


def _process_one(args):
    path, config, overrides = args
    return process_manifest(path, config, overrides)


def process_manifests(
    paths: Iterable[str | Path], config: RunConfig = RunConfig(), overrides: Sequence[Override] = ()
) -> list[TrialOutcome]:
    """Process many trials, in parallel when ``config.jobs > 1``; sorted by trial id."""
    jobs = [(Path(p), config, tuple(overrides)) for p in paths]
    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(_process_one, jobs, chunksize=8))
    else:
        outcomes = [_process_one(j) for j in jobs]
    return sorted(outcomes, key=lambda o: o.metrics.trial_id)


# cohort table -----------------------------------------------------------------

COHORT_HEADER = ["trial_id", "subject_id", "group", "st_ms", "speed_kmh", "igd_px", "ttc_s", "status", "crash"]
AUDIT_HEADER = ["trial_id", "kind", "field", "value", "reason"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_cohort_table(rows: Iterable[TrialMetrics]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COHORT_HEADER)
    for r in sorted(rows, key=lambda r: r.trial_id):
        w.writerow([
            r.trial_id, r.subject_id, r.group, _fmt(r.st_ms), _fmt(r.speed_kmh), _fmt(r.igd_px),
            _fmt(r.ttc_s), r.status, int(r.crash_flag),
        ])
    return buf.getvalue()


def _opt(text: str, kind):
    text = text.strip()
    if text in ("", "NA", "nan"):
        return None
    return kind(float(text)) if kind is int else kind(text)


def read_cohort_table(source: str | Path | io.TextIOBase) -> list[TrialMetrics]:
    fh = open(source, newline="", encoding="utf-8") if not hasattr(source, "read") else source
    try:
        reader = csv.DictReader(fh)
        if reader.fieldnames != COHORT_HEADER:
            raise ValueError(f"cohort table header must be {','.join(COHORT_HEADER)}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            try:
                if rec["group"] not in GROUPS:
                    raise ValueError(f"unknown group {rec['group']!r}")
                rows.append(TrialMetrics(
                    trial_id=rec["trial_id"], subject_id=rec["subject_id"], group=rec["group"],
                    st_ms=_opt(rec["st_ms"], int), speed_kmh=_opt(rec["speed_kmh"], float),
                    igd_px=_opt(rec["igd_px"], int), ttc_s=_opt(rec["ttc_s"], float),
                    status=rec["status"], crash_flag=rec["crash"].strip() in ("1", "true", "True"),
                ))
            except ValueError as exc:
                raise ValueError(f"cohort table line {lineno}: {exc}") from None
        return rows
    finally:
        if fh is not source:
            fh.close()


def merge_rows(existing: Iterable[TrialMetrics], new: Iterable[TrialMetrics]) -> list[TrialMetrics]:
    """Union by trial id; rows from ``new`` replace existing ones."""
    by_id = {r.trial_id: r for r in existing}
    by_id.update((r.trial_id, r) for r in new)
    return sorted(by_id.values(), key=lambda r: r.trial_id)


def format_audit(entries: Iterable[AuditEntry]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AUDIT_HEADER)
    for e in sorted(entries, key=lambda e: e.trial_id):
        w.writerow([e.trial_id, e.kind, e.field, e.value, e.reason])
    return buf.getvalue()


def read_audit(path: str | Path) -> list[AuditEntry]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [AuditEntry(**rec) for rec in csv.DictReader(fh)]


def audit_path_for(table: str | Path) -> Path:
    table = Path(table)
    return table.with_name(table.stem + ".audit.csv")


# statistics battery -------------------------------------------------------------

@dataclass
class StatReport:
    config: RunConfig
    rows: list[TrialMetrics]
    groups: tuple[str, ...]
    summaries: list[stats.GroupSummary]
    box: dict[str, stats.BoxStats]
    welch: stats.WelchResult | None
    tukey: list[stats.TukeyRow]
    glm: stats.GlmResult | None
    glm_n: int
    shapiro: stats.ShapiroResult | None
    pearson: dict[str, stats.PearsonResult | None]
    uncertainty: UncertaintyReport
    sensitivity_welch: stats.WelchResult | None
    sensitivity_tukey: list[stats.TukeyRow]
    audit: list[AuditEntry] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def valid_rows(self) -> list[TrialMetrics]:
        return [r for r in self.rows if r.status == VALID]

    def tukey_row(self, group_a: str, group_b: str) -> stats.TukeyRow:
        for row in self.tukey:
            if (row.group_a, row.group_b) == (group_a, group_b):
                return row
        raise KeyError((group_a, group_b))

    def to_text(self) -> str:
        return format_report(self)


def _group_values(rows: Iterable[TrialMetrics], attr: str = "st_ms") -> dict[str, list[float]]:
    out: dict[str, list[float]] = {}
    for r in rows:
        v = getattr(r, attr)
        if v is not None:
            out.setdefault(r.group, []).append(float(v))
    return {g: out[g] for g in sorted(out)}


def apply_filters(rows: Sequence[TrialMetrics], config: RunConfig = RunConfig()) -> list[TrialMetrics]:
    """Assign Miss and Outlier statuses to every non-excluded row with a sensing time.

    Misses are ST >= ``max_st_ms``; outliers exceed Q3 + k IQR of their own
    group. ``config.filter_order`` decides which rule sees the other's output.
    """
    out = {r.trial_id: r for r in rows}
    pool = [r for r in rows if not r.is_excluded and r.st_ms is not None]
    for r in pool:
        out[r.trial_id] = replace(r, status=VALID)
    pool = [out[r.trial_id] for r in pool]

    def misses(candidates):
        kept = []
        for r in candidates:
            if r.st_ms >= config.max_st_ms:
                out[r.trial_id] = replace(r, status=MISS)
            else:
                kept.append(r)
        return kept

    def outliers(candidates):
        kept = []
        for g in sorted({r.group for r in candidates}):
            members = [r for r in candidates if r.group == g]
            if len(members) < 4:
                kept.extend(members)
                continue
            _, removed = stats.iqr_outlier_filter([r.st_ms for r in members], config.iqr_k)
            cut = min(removed) if removed else math.inf
            for r in members:
                if r.st_ms >= cut:
                    out[r.trial_id] = replace(r, status=OUTLIER)
                else:
                    kept.append(r)
        return kept

    if config.filter_order == "miss_first":
        outliers(misses(pool))
    else:
        misses(outliers(pool))
    return sorted(out.values(), key=lambda r: r.trial_id)


def _try(fn, notes: list[str], label: str):
    try:
        return fn()
    except (ValueError, ArithmeticError) as exc:
        notes.append(f"{label}: {exc}")
        return None


def run_cohort(
    rows: Sequence[TrialMetrics], config: RunConfig = RunConfig(), audit: Sequence[AuditEntry] = ()
) -> StatReport:
    """Filter the cohort and run the full statistics battery."""
    rows = apply_filters(rows, config)
    notes: list[str] = []
    valid = [r for r in rows if r.status == VALID]
    by_group = _group_values(valid)
    usable = {g: v for g, v in by_group.items() if len(v) >= 2}
    for g in set(by_group) - set(usable):
        notes.append(f"group {g} has fewer than two valid rows and is left out")
    if len(usable) < 2:
        raise DegenerateCohort("need at least two groups with two or more valid rows")
    groups = tuple(sorted(usable))
    valid = [r for r in valid if r.group in usable]

    summaries = []
    for attr in ("st_ms", "speed_kmh", "igd_px", "ttc_s"):
        for g, vals in _group_values(valid, attr).items():
            summaries.append(stats.summarize(vals, g, attr))

    # box plot keeps the IQR outliers visible but not the misses
    boxed = _group_values([r for r in rows if r.status in (VALID, OUTLIER) and r.group in usable])
    box = {g: stats.box_stats(v, g, config.iqr_k) for g, v in boxed.items()}

    welch = _try(lambda: stats.welch_anova(usable), notes, "welch")
    tukey = _try(lambda: stats.tukey_hsd(usable, config.conf_level), notes, "tukey") or []

    complete = [r for r in valid if None not in (r.speed_kmh, r.igd_px, r.ttc_s)]
    if len(complete) < len(valid):
        notes.append(f"GLM: {len(valid) - len(complete)} valid rows lack a covariate and are left out")
    glm = _try(
        lambda: stats.fit_glm(
            [r.st_ms for r in complete], [r.group for r in complete], [r.speed_kmh for r in complete],
            [r.igd_px for r in complete], [r.ttc_s for r in complete], alpha=config.glm_alpha,
        ),
        notes, "glm",
    )
    shapiro = _try(lambda: stats.shapiro_wilk(glm.residuals), notes, "shapiro") if glm else None

    pearson = {}
    for attr in ("speed_kmh", "igd_px", "ttc_s"):
        pairs = [(r.st_ms, getattr(r, attr)) for r in valid if getattr(r, attr) is not None]
        pearson[attr] = _try(
            lambda: stats.pearson_r([p[0] for p in pairs], [p[1] for p in pairs]), notes, f"pearson {attr}"
        )

    # robustness: repeat the group comparisons with misses and outliers kept
    everything = _group_values(
        [r for r in rows if r.status in (VALID, MISS, OUTLIER) and r.group in usable]
    )
    s_welch = _try(lambda: stats.welch_anova(everything), notes, "sensitivity welch")
    s_tukey = _try(lambda: stats.tukey_hsd(everything, config.conf_level), notes, "sensitivity tukey") or []

    return StatReport(
        config=config, rows=list(rows), groups=groups, summaries=summaries, box=box, welch=welch,
        tukey=tukey, glm=glm, glm_n=len(complete), shapiro=shapiro, pearson=pearson,
        uncertainty=type_b_uncertainty(config.resolution_ms), sensitivity_welch=s_welch,
        sensitivity_tukey=s_tukey, audit=sorted(audit, key=lambda e: e.trial_id), notes=notes,
    )


# serialisation -------------------------------------------------------------------

def _f(value, digits: int = 3) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return f"{value:.{digits}f}"


def _p(value) -> str:
    return _f(value, 7)


def format_report(rep: StatReport) -> str:
    lines = ["# sensing time statistics report", "", "[config]"]
    # execution details (paths, worker count) do not change results
    lines += [
        ln for ln in rep.config.to_text().splitlines()
        if ln.split(" = ")[0] not in ("jobs", "input", "output")
    ]

    counts: dict[str, int] = {}
    for r in rep.rows:
        counts[r.status] = counts.get(r.status, 0) + 1
    lines += ["", "[counts]", f"trials = {len(rep.rows)}"]
    lines += [f"{k} = {counts[k]}" for k in sorted(counts)]
    for g in GROUPS:
        n = sum(1 for r in rep.rows if r.group == g and r.status == VALID)
        lines.append(f"valid_{g} = {n}")

    lines += ["", "[removed]", "trial_id,group,st_ms,status"]
    for r in rep.rows:
        if r.status in (MISS, OUTLIER):
            lines.append(f"{r.trial_id},{r.group},{r.st_ms},{r.status}")

    lines += ["", "[summaries]", "group,variable,n,min,max,mean,sd,median"]
    for s in rep.summaries:
        lines.append(
            f"{s.group},{s.variable},{s.n},{_f(s.min)},{_f(s.max)},{_f(s.mean)},{_f(s.sd)},{_f(s.median)}"
        )

    lines += ["", "[box]", "group,n,min,q1,median,q3,max,iqr,outliers"]
    for g, b in rep.box.items():
        outs = " ".join(_f(v, 1) for v in b.outliers)
        lines.append(f"{g},{b.n},{_f(b.min)},{_f(b.q1)},{_f(b.median)},{_f(b.q3)},{_f(b.max)},{_f(b.iqr)},{outs}")

    lines += ["", "[welch]"]
    if rep.welch:
        w = rep.welch
        lines += [f"F = {_f(w.F)}", f"df1 = {_f(w.df1)}", f"df2 = {_f(w.df2)}", f"p = {_p(w.p)}"]

    lines += ["", "[tukey]", f"conf_level = {rep.config.conf_level}", "pair,diff,lwr,upr,p_adj"]
    for t in rep.tukey:
        lines.append(f"{t.label},{_f(t.diff)},{_f(t.lwr)},{_f(t.upr)},{_p(t.p_adj)}")

    lines += ["", "[glm]", f"n = {rep.glm_n}", "term,df,ss,F,p,significant"]
    if rep.glm:
        for t in rep.glm.terms:
            lines.append(f"{t.name},{t.df},{_f(t.ss)},{_f(t.F)},{_p(t.p)},{int(t.p < rep.glm.alpha)}")
        lines.append(f"residual_df = {rep.glm.residual_df}")
        lines.append(f"residual_ss = {_f(rep.glm.residual_ss)}")
        lines.append(f"alpha = {rep.glm.alpha}")
        for name, c in rep.glm.coefficients.items():
            lines.append(f"coef {name} = {_f(c, 6)}")

    lines += ["", "[shapiro_wilk]"]
    if rep.shapiro:
        lines += [f"W = {_f(rep.shapiro.W, 6)}", f"p = {_p(rep.shapiro.p)}", f"n = {rep.shapiro.n}"]

    lines += ["", "[pearson]", "variable,r,p,n"]
    for name, res in rep.pearson.items():
        if res is not None:
            lines.append(f"{name},{_f(res.r)},{_p(res.p)},{res.n}")

    u = rep.uncertainty
    lines += [
        "", "[uncertainty]", f"resolution_ms = {_f(u.resolution_ms)}", f"u_b_ms = {_f(u.u_b_ms)}",
        f"u_combined_ms = {_f(u.u_combined_ms)}",
    ]

    lines += ["", "[sensitivity_outliers_included]"]
    if rep.sensitivity_welch:
        lines += [f"welch_F = {_f(rep.sensitivity_welch.F)}", f"welch_p = {_p(rep.sensitivity_welch.p)}"]
    for t in rep.sensitivity_tukey:
        lines.append(f"{t.label},{_f(t.diff)},{_f(t.lwr)},{_f(t.upr)},{_p(t.p_adj)}")

    lines += ["", "[low_st]", f"threshold_ms = {rep.config.low_st_ms:g}"]
    for r in rep.rows:
        if r.status == VALID and r.st_ms < rep.config.low_st_ms:
            lines.append(f"{r.trial_id},{r.st_ms}")

    lines += ["", "[audit]", ",".join(AUDIT_HEADER)]
    for e in rep.audit:
        lines.append(",".join([e.trial_id, e.kind, e.field, e.value, e.reason.replace(",", ";")]))

    lines += ["", "[notes]"] + rep.notes
    return "\n".join(lines) + "\n"


def box_document(box: dict[str, stats.BoxStats]) -> str:
    import json

    doc = {
        g: {
            "n": b.n, "min": b.min, "q1": b.q1, "median": b.median, "q3": b.q3, "max": b.max,
            "iqr": b.iqr, "outliers": list(b.outliers),
        }
        for g, b in box.items()
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def box_svg(box: dict[str, stats.BoxStats], width: int = 480, height: int = 320) -> str:
    """Vertical box plot, one box per group, outliers as open circles."""
    if not box:
        raise stats.EmptyGroup("nothing to plot")
    values = [v for b in box.values() for v in (b.min, b.max, *b.outliers)]
    lo, hi = min(values), max(values)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    left, right, top, bottom = 60.0, 20.0, 20.0, 40.0
    plot_h = height - top - bottom
    slot = (width - left - right) / len(box)

    def y(v):
        return top + (hi - v) / (hi - lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<line x1="{left:.1f}" y1="{top:.1f}" x2="{left:.1f}" y2="{top + plot_h:.1f}" stroke="black"/>',
    ]
    for tick in np.linspace(lo + pad, hi - pad, 5):
        parts.append(
            f'<text x="{left - 6:.1f}" y="{y(tick) + 4:.1f}" text-anchor="end">{tick:.0f}</text>'
        )
    parts.append(
        f'<text x="14" y="{top + plot_h / 2:.1f}" transform="rotate(-90 14 {top + plot_h / 2:.1f})" '
        f'text-anchor="middle">ST [ms]</text>'
    )
    for i, (g, b) in enumerate(box.items()):
        cx = left + slot * (i + 0.5)
        bw = slot * 0.4
        x0 = cx - bw / 2
        parts += [
            f'<g class="group" data-group="{g}">',
            f'<line x1="{cx:.1f}" y1="{y(b.max):.1f}" x2="{cx:.1f}" y2="{y(b.q3):.1f}" stroke="black"/>',
            f'<line x1="{cx:.1f}" y1="{y(b.q1):.1f}" x2="{cx:.1f}" y2="{y(b.min):.1f}" stroke="black"/>',
            f'<line x1="{cx - bw / 4:.1f}" y1="{y(b.max):.1f}" x2="{cx + bw / 4:.1f}" y2="{y(b.max):.1f}" stroke="black"/>',
            f'<line x1="{cx - bw / 4:.1f}" y1="{y(b.min):.1f}" x2="{cx + bw / 4:.1f}" y2="{y(b.min):.1f}" stroke="black"/>',
            f'<rect x="{x0:.1f}" y="{y(b.q3):.1f}" width="{bw:.1f}" height="{y(b.q1) - y(b.q3):.1f}" '
            f'fill="#dde6f0" stroke="black"/>',
            f'<line x1="{x0:.1f}" y1="{y(b.median):.1f}" x2="{x0 + bw:.1f}" y2="{y(b.median):.1f}" '
            f'stroke="black" stroke-width="2"/>',
        ]
        for v in b.outliers:
            parts.append(f'<circle class="outlier" cx="{cx:.1f}" cy="{y(v):.1f}" r="3" fill="none" stroke="black"/>')
        parts += [
            f'<text x="{cx:.1f}" y="{height - bottom + 18:.1f}" text-anchor="middle">{g}</text>',
            "</g>",
        ]
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
