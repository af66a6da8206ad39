"""Run strategies over sequences and write result, trace, curve and report files.

Layout of one run directory::

    results/<name>.txt           x,y,w,h per frame, ground-truth convention
    results/<name>.trace.jsonl   one JSON record per frame
    curves/<name>.csv            success, precision and normalised-precision curves
    report.json                  per-sequence and aggregate MetricReport fields
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .annotations import load_sequence_dir, serialize_boxes
from .config import RunConfig
from .metrics import (NORM_PRECISION_THRESHOLDS, PRECISION_CURVE_PIXELS, SUCCESS_THRESHOLDS,
                      MetricReport, attribute_breakdown, evaluate, norm_precision_curve,
                      precision_curve, success_curve)
from .pipeline import ArrayProvider, run_sequence
from .synth import ScenarioProvider, ScenarioSpec, standard_suite

METRIC_FIELDS = ("auc", "precision", "norm_precision", "ao", "sr50", "sr75")


@dataclass(frozen=True)
class Source:
    """A scenario spec or an on-disk sequence directory; picklable for workers."""

    scenario: ScenarioSpec | None = None
    directory: str | None = None

    def __post_init__(self):
        if (self.scenario is None) == (self.directory is None):
            raise ValueError("exactly one of scenario and directory must be set")

    @property
    def name(self) -> str:
        return self.scenario.name if self.scenario is not None else Path(self.directory).name

    def load(self):
        """``(provider, gt boxes, sequence attribute tags)``."""
        if self.scenario is not None:
            provider = ScenarioProvider(self.scenario)
            truths = provider.truths()
            tags = frozenset(self.scenario.tags).union(*(t.attributes for t in truths))
            return provider, [t.gt_box for t in truths], tags
        feats, ann = load_sequence_dir(self.directory)
        return ArrayProvider(feats), ann.boxes, ann.attributes


def suite_sources(seed: int = 0, names=None) -> list[Source]:
    specs = standard_suite(seed)
    if names:
        known = {s.name: s for s in specs}
        missing = [n for n in names if n not in known]
        if missing:
            raise KeyError(f"unknown scenario(s): {', '.join(missing)}")
        specs = [known[n] for n in names]
    return [Source(scenario=s) for s in specs]


def _curves_csv(pred, gt) -> str:
    succ = success_curve(pred, gt)
    prec = precision_curve(pred, gt)
    nprec = norm_precision_curve(pred, gt)
    rows = ["iou_threshold,success,pixel_threshold,precision,norm_threshold,norm_precision"]
    n = max(len(SUCCESS_THRESHOLDS), len(PRECISION_CURVE_PIXELS), len(NORM_PRECISION_THRESHOLDS))

    def cell(grid, vals, i):
        return (f"{grid[i]:g}", f"{vals[i]:.6f}") if i < len(grid) else ("", "")

    for i in range(n):
        cells = (cell(SUCCESS_THRESHOLDS, succ, i) + cell(PRECISION_CURVE_PIXELS, prec, i)
                 + cell(NORM_PRECISION_THRESHOLDS, nprec, i))
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def track_one(source: Source, config: RunConfig, out_dir) -> dict:
    """Track one sequence, write its files, return its report and tags."""
    out = Path(out_dir)
    provider, gt, tags = source.load()
    rep = run_sequence(provider, gt[0], config, source.name)
    if len(rep.boxes) != len(gt):
        raise ValueError(f"{source.name}: {len(rep.boxes)} frames tracked, {len(gt)} annotated")
    (out / "results").mkdir(parents=True, exist_ok=True)
    (out / "curves").mkdir(parents=True, exist_ok=True)
    (out / "results" / f"{source.name}.txt").write_text(serialize_boxes(rep.boxes))
    with open(out / "results" / f"{source.name}.trace.jsonl", "w") as fh:
        for rec in rep.traces:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    (out / "curves" / f"{source.name}.csv").write_text(_curves_csv(rep.boxes, gt))
    metrics = evaluate(rep.boxes, gt)
    return {"name": source.name, "report": metrics.to_dict(), "tags": sorted(tags)}


def _job(args):
    return track_one(*args)


def aggregate(reports: list[MetricReport], tags: list) -> MetricReport:
    """Unweighted mean over sequences; attribute AUCs from the per-sequence reports."""
    if not reports:
        raise ValueError("nothing to aggregate")
    vals = {k: float(np.mean([getattr(r, k) for r in reports])) for k in METRIC_FIELDS}
    return MetricReport(**vals, frames=sum(r.frames for r in reports),
                        per_attribute_auc=attribute_breakdown(zip(reports, tags)))


def _report_from(d: dict) -> MetricReport:
    names = {f.name for f in fields(MetricReport)}
    return MetricReport(**{k: v for k, v in d.items() if k in names})


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def run_sources(sources: list[Source], config: RunConfig, out_dir, workers: int = 1) -> dict:
    """Track every source into ``out_dir`` and write ``report.json``.

    Each sequence is handled start to finish by one worker; the summary is
    reduced afterwards in input order, so output does not depend on ``workers``.
    """
    if not sources:
        raise ValueError("no sequences to run")
    names = [s.name for s in sources]
    if len(set(names)) != len(names):
        raise ValueError("sequence names must be unique within a run")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(s, config, out) for s in sources]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_job, jobs))
    else:
        rows = [_job(j) for j in jobs]
    reports = [_report_from(r["report"]) for r in rows]
    agg = aggregate(reports, [r["tags"] for r in rows])
    summary = {
        "config": config.to_dict(),
        "sequences": {r["name"]: r["report"] for r in rows},
        "tags": {r["name"]: r["tags"] for r in rows},
        "aggregate": agg.to_dict(),
    }
    _dump(out / "report.json", summary)
    return summary


def format_table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[v if isinstance(v, str) else f"{v:.4f}" for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def compare(sources: list[Source], config: RunConfig, strategies: list[str], out_dir,
            workers: int = 1) -> dict:
    """One run per strategy plus a per-scenario / aggregate comparison table."""
    if len(strategies) < 2:
        raise ValueError("compare needs at least two strategies")
    if len(set(strategies)) != len(strategies):
        raise ValueError("duplicate strategy in compare")
    if not sources:
        raise ValueError("compare needs a non-empty suite")
    out = Path(out_dir)
    table = {}
    for s in strategies:
        table[s] = run_sources(sources, config.replace(strategy=s), out / s, workers)
    rows = []
    for s in strategies:
        for name, rep in table[s]["sequences"].items():
            rows.append([s, name] + [rep[k] for k in METRIC_FIELDS])
        rows.append([s, "(aggregate)"] + [table[s]["aggregate"][k] for k in METRIC_FIELDS])
    (out / "compare.txt").write_text(format_table(["strategy", "sequence", *METRIC_FIELDS], rows))
    result = {s: {"aggregate": table[s]["aggregate"], "sequences": table[s]["sequences"]}
              for s in strategies}
    _dump(out / "compare.json", {"config": config.to_dict(), "strategies": result})
    return result


SWEEP_PARAMS = {"alpha": "alpha", "m": "window_m", "beta": "beta"}
# value grids used when a sweep is requested without explicit values
DEFAULT_GRIDS = {
    "alpha": (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 1.0),
    "m": (20, 30, 40, 50, 60),
    "beta": (0.5, 0.6, 0.7, 0.8, 0.9),
}


def sweep(sources: list[Source], config: RunConfig, param: str, values: list, out_dir,
          workers: int = 1) -> list[dict]:
    """Aggregate metrics for each value of one hyperparameter."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"cannot sweep {param!r}; choose from {', '.join(SWEEP_PARAMS)}")
    if not values:
        raise ValueError("sweep needs at least one value")
    attr = SWEEP_PARAMS[param]
    # validate every value before running anything
    configs = [config.replace(**{attr: v}) for v in values]
    out = Path(out_dir)
    rows = []
    for v, cfg in zip(values, configs):
        rep = run_sources(sources, cfg, out / f"{param}={v:g}", workers)
        rows.append({"value": v, **{k: rep["aggregate"][k] for k in METRIC_FIELDS}})
    (out / "sweep.txt").write_text(format_table(
        [param, *METRIC_FIELDS], [[f"{r['value']:g}"] + [r[k] for k in METRIC_FIELDS] for r in rows]))
    _dump(out / "sweep.json", {"config": config.to_dict(), "param": param, "rows": rows})
    return rows
