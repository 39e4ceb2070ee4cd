"""Experiment grid: select sources, pre-train, fine-tune, evaluate, report.

Experiments 1-5 differ only in where the sources come from (the target is
always a bank series):

====  ==================  ======================
id    sources             selection
====  ==================  ======================
1     bank                one source
2     other industries    one source
3     bank, bank          two sources, one pool
4     other, other        two sources, one pool
5     bank, other         one source per pool
====  ==================  ======================

Training randomness is keyed by (seed, architecture, source chain), so two
similarity functions that pick the same sources produce the same model and
the same metrics. That is what lets report rows be merged by selection, and
it lets a :class:`Trainer` reuse any chain, or chain prefix, it has seen.
"""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import model as nn
from .data import Group, prepare
from .errors import ConfigError, GafTLError, MismatchedConfigs, UnknownTicker
from .metrics import forecast_metrics
from .selection import CandidatePool, SelectionResult, select_cross_pool, select_multi, select_single
from .similarity import BASELINE_SPECS, GAF_SPECS, SimilaritySpec

EXPERIMENTS = {
    1: (Group.BANK,),
    2: (Group.OTHER,),
    3: (Group.BANK, Group.BANK),
    4: (Group.OTHER, Group.OTHER),
    5: (Group.BANK, Group.OTHER),
}
METRICS = ("mape", "rmse", "r2")
HIGHER_IS_BETTER = {"mape": False, "rmse": False, "r2": True}
KIND_PREFIX = {nn.Kind.DNN: "nn", nn.Kind.LSTM: "lstm"}
METRIC_LABEL = {"mape": "MAPE", "rmse": "RMSE", "r2": "R²"}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: int
    target: str
    specs: tuple = BASELINE_SPECS
    kinds: tuple = (nn.Kind.DNN, nn.Kind.LSTM)
    seed: int = 0
    pretrain: nn.TrainConfig = nn.PRETRAIN
    finetune: nn.TrainConfig = nn.FINETUNE
    hidden: int = nn.HIDDEN
    dtype: str = "float32"

    def __post_init__(self):
        if self.experiment_id not in EXPERIMENTS:
            raise ConfigError(f"experiment id must be one of 1-5, got {self.experiment_id}")
        object.__setattr__(self, "specs", tuple(self.specs))
        object.__setattr__(self, "kinds", tuple(nn.Kind(k) for k in self.kinds))
        if not self.specs:
            raise ConfigError("at least one similarity spec is required")

    @property
    def arity(self):
        return len(EXPERIMENTS[self.experiment_id])

    @property
    def uses_gaf(self):
        return any(s.uses_gaf for s in self.specs)


@dataclass
class KindResult:
    mape: float = None
    rmse: float = None
    r2: float = None
    digest: str = None
    error: str = None

    @property
    def ok(self):
        return self.error is None

    def to_dict(self):
        return {"mape": self.mape, "rmse": self.rmse, "r2": self.r2, "digest": self.digest, "error": self.error}


@dataclass
class ReportRow:
    spec: SimilaritySpec
    selection: SelectionResult = None
    results: dict = field(default_factory=dict)
    error: str = None

    @property
    def chosen(self):
        return None if self.selection is None else self.selection.chosen

    def to_dict(self):
        return {
            "spec": self.spec.id,
            "label": self.spec.label,
            "selection": None if self.selection is None else self.selection.to_dict(),
            "error": self.error,
            "results": {k.value: r.to_dict() for k, r in self.results.items()},
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            spec=SimilaritySpec.parse(doc["spec"]),
            selection=None if doc["selection"] is None else SelectionResult.from_dict(doc["selection"]),
            results={nn.Kind(k): KindResult(**v) for k, v in doc["results"].items()},
            error=doc["error"],
        )


@dataclass
class ExperimentReport:
    experiment_id: int
    target: str
    seed: int
    gaf: bool
    kinds: tuple
    rows: list

    @property
    def title(self):
        kind = "Experiment" if self.gaf else "Baseline Evaluation"
        return f"Result of {kind} {self.experiment_id}"

    @property
    def arity(self):
        return len(EXPERIMENTS[self.experiment_id])

    def groups(self):
        """Spec ids grouped by identical selections, in first-appearance order.

        Failed rows each form their own group.
        """
        groups, index = [], {}
        for row in self.rows:
            key = row.chosen if row.error is None else ("!", row.spec.id)
            if key not in index:
                index[key] = len(groups)
                groups.append([])
            groups[index[key]].append(row.spec.id)
        return groups

    def best(self):
        """``{(kind, metric): [spec ids]}`` for the best value in each column."""
        out = {}
        for kind in self.kinds:
            for metric in METRICS:
                vals = [
                    (getattr(r.results[kind], metric), r.spec.id)
                    for r in self.rows
                    if kind in r.results and r.results[kind].ok
                ]
                if not vals:
                    continue
                pick = max if HIGHER_IS_BETTER[metric] else min
                target = pick(v for v, _ in vals)
                out[(kind, metric)] = [sid for v, sid in vals if v == target]
        return out

    def row(self, spec_id):
        for r in self.rows:
            if r.spec.id == spec_id:
                return r
        raise KeyError(spec_id)

    def to_dict(self):
        return {
            "title": self.title,
            "experiment_id": self.experiment_id,
            "target": self.target,
            "seed": self.seed,
            "gaf": self.gaf,
            "kinds": [k.value for k in self.kinds],
            "rows": [r.to_dict() for r in self.rows],
            "groups": self.groups(),
            "best": [
                {"kind": k.value, "metric": m, "specs": ids} for (k, m), ids in self.best().items()
            ],
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            experiment_id=doc["experiment_id"],
            target=doc["target"],
            seed=doc["seed"],
            gaf=doc["gaf"],
            kinds=tuple(nn.Kind(k) for k in doc["kinds"]),
            rows=[ReportRow.from_dict(r) for r in doc["rows"]],
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, ExperimentReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


# -- training ---------------------------------------------------------------


class Trainer:
    """Trains and scores source chains, memoising every chain and prefix."""

    def __init__(self, manifest, target, seed, pretrain=nn.PRETRAIN, finetune=nn.FINETUNE,
                 hidden=nn.HIDDEN, dtype="float32"):
        self.manifest = manifest
        self.target = target
        self.seed = seed
        self.pretrain = pretrain
        self.finetune = finetune
        self.hidden = hidden
        self.dtype = np.dtype(dtype)
        self._prepared = {}
        self._prefix_cache = {}
        self._results = {}

    def prepared(self, ticker):
        if ticker not in self._prepared:
            self._prepared[ticker] = prepare(self.manifest[ticker])
        return self._prepared[ticker]

    def compatible(self, config):
        return (
            config.target == self.target
            and config.seed == self.seed
            and config.pretrain == self.pretrain
            and config.finetune == self.finetune
            and config.hidden == self.hidden
            and np.dtype(config.dtype) == self.dtype
        )

    def run(self, kind, chain):
        """Metrics on the target's test split after training on ``chain`` then the target."""
        key = (nn.Kind(kind), tuple(chain))
        if key not in self._results:
            self._results[key] = self._run(*key)
        return replace(self._results[key])

    def _run(self, kind, chain):
        try:
            tgt = self.prepared(self.target)
            model, _ = nn.pretrain_then_finetune(
                kind,
                [self.prepared(t).train for t in chain],
                tgt.train,
                self.seed,
                pretrain=self.pretrain,
                finetune=self.finetune,
                source_keys=chain,
                cache=self._prefix_cache,
                dtype=self.dtype,
                hidden=self.hidden,
            )
            pred = tgt.scaler.inverse(nn.predict(model, tgt.test.inputs).astype(np.float64))
            actual = tgt.series.closes[len(tgt.series) - len(tgt.test) :]
            m = forecast_metrics(actual, pred)
            if not all(math.isfinite(v) for v in (m.mape, m.rmse, m.r2)):
                raise ArithmeticError("non-finite forecast metrics")
            return KindResult(m.mape, m.rmse, m.r2, model.digest())
        except (GafTLError, ArithmeticError, ValueError) as exc:
            return KindResult(error=f"{type(exc).__name__}: {exc}")


def _train_job(args):
    manifest, target, seed, pretrain, finetune, hidden, dtype, kind, chain = args
    trainer = Trainer(manifest, target, seed, pretrain, finetune, hidden, dtype)
    return trainer.run(kind, chain)


# -- experiments ------------------------------------------------------------


def pools(manifest, target):
    """Bank and other-industry candidate pools in manifest order, target excluded."""
    if target not in manifest:
        raise UnknownTicker(f"target {target!r} not in manifest")
    bank = CandidatePool([manifest[t] for t in manifest.tickers(Group.BANK) if t != target], "bank")
    other = CandidatePool([manifest[t] for t in manifest.tickers(Group.OTHER) if t != target], "other")
    return {Group.BANK: bank, Group.OTHER: other}


def select_for(experiment_id, spec, manifest, target, jobs=1):
    """Run the selection rule experiment ``experiment_id`` uses for one spec."""
    groups = EXPERIMENTS[experiment_id]
    by_group = pools(manifest, target)
    tgt = manifest[target]
    if len(groups) == 1:
        return select_single(by_group[groups[0]], tgt, spec, jobs)
    if groups[0] == groups[1]:
        return select_multi(by_group[groups[0]], tgt, spec, jobs)
    return select_cross_pool(by_group[groups[0]], by_group[groups[1]], tgt, spec, jobs)


def _select_job(args):
    experiment_id, spec, manifest, target = args
    try:
        return select_for(experiment_id, spec, manifest, target), None
    except GafTLError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def run_experiment(config, manifest, jobs=1, trainer=None):
    """Select sources for every spec, train each model kind, and score on the target.

    Failures are recorded per row; they never abort the other specs.
    """
    if config.target not in manifest:
        raise UnknownTicker(f"target {config.target!r} not in manifest")
    if trainer is None or not trainer.compatible(config):
        trainer = Trainer(manifest, config.target, config.seed, config.pretrain, config.finetune,
                          config.hidden, config.dtype)

    work = [(config.experiment_id, spec, manifest, config.target) for spec in config.specs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            selections = list(ex.map(_select_job, work))
    else:
        selections = [_select_job(w) for w in work]

    rows = [ReportRow(spec, sel, error=err) for spec, (sel, err) in zip(config.specs, selections)]
    chains = []
    for row in rows:
        if row.error is None and row.chosen not in chains:
            chains.append(row.chosen)
    jobs_list = [(kind, chain) for chain in chains for kind in config.kinds]

    if jobs > 1 and len(jobs_list) > 1:
        payload = [
            (manifest, config.target, config.seed, config.pretrain, config.finetune, config.hidden,
             config.dtype, kind, chain)
            for kind, chain in jobs_list
        ]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            outcomes = dict(zip(jobs_list, ex.map(_train_job, payload)))
    else:
        outcomes = {(kind, chain): trainer.run(kind, chain) for kind, chain in jobs_list}

    for row in rows:
        if row.error is None:
            row.results = {kind: replace(outcomes[(kind, row.chosen)]) for kind in config.kinds}
    return ExperimentReport(config.experiment_id, config.target, config.seed, config.uses_gaf,
                            config.kinds, rows)


def run_grid(manifest, target=None, seed=0, experiments=(1, 2, 3, 4, 5), jobs=1, **config_kw):
    """Baseline and GAF reports for each experiment plus their comparisons.

    Returns ``{experiment_id: (baseline, gaf, comparison)}``.
    """
    target = target or manifest.target
    if target is None:
        raise ConfigError("no target given and none marked in the manifest")
    trainer = None
    out = {}
    for eid in experiments:
        base_cfg = ExperimentConfig(eid, target, BASELINE_SPECS, seed=seed, **config_kw)
        gaf_cfg = ExperimentConfig(eid, target, GAF_SPECS, seed=seed, **config_kw)
        if trainer is None:
            trainer = Trainer(manifest, target, seed, base_cfg.pretrain, base_cfg.finetune,
                              base_cfg.hidden, base_cfg.dtype)
        base = run_experiment(base_cfg, manifest, jobs, trainer)
        gaf = run_experiment(gaf_cfg, manifest, jobs, trainer)
        out[eid] = (base, gaf, compare_gaf_vs_baseline(base, gaf))
    return out


# -- comparison -------------------------------------------------------------


def _column_best(report, kind, metric):
    vals = [
        getattr(r.results[kind], metric)
        for r in report.rows
        if kind in r.results and r.results[kind].ok and getattr(r.results[kind], metric) is not None
    ]
    if not vals:
        raise MismatchedConfigs(f"{report.title}: no {KIND_PREFIX[kind]}{METRIC_LABEL[metric]} values")
    return max(vals) if HIGHER_IS_BETTER[metric] else min(vals)


def compare_gaf_vs_baseline(baseline, gaf):
    """Best GAF score vs best baseline score for every metric column.

    GAF "enhances" a column when its best error is lower (or, for R², its
    best fit higher) than the baseline's best.
    """
    for attr in ("experiment_id", "target", "seed"):
        if getattr(baseline, attr) != getattr(gaf, attr):
            raise MismatchedConfigs(
                f"{attr} differs: {getattr(baseline, attr)!r} vs {getattr(gaf, attr)!r}"
            )
    if set(baseline.kinds) != set(gaf.kinds):
        raise MismatchedConfigs("reports cover different model kinds")
    entries = []
    for kind in baseline.kinds:
        for metric in METRICS:
            b = _column_best(baseline, kind, metric)
            g = _column_best(gaf, kind, metric)
            better = g > b if HIGHER_IS_BETTER[metric] else g < b
            entries.append({
                "kind": kind.value,
                "metric": metric,
                "column": f"{KIND_PREFIX[kind]}{METRIC_LABEL[metric]}",
                "best_gaf": g,
                "best_baseline": b,
                "delta": g - b,
                "gaf_enhances": bool(better),
            })
    return {
        "experiment_id": baseline.experiment_id,
        "target": baseline.target,
        "seed": baseline.seed,
        "entries": entries,
    }


# -- rendering --------------------------------------------------------------


def _fmt(value):
    return "-" if value is None else f"{value:.4f}"


def render_report(report, fmt="markdown"):
    """Render a report as JSON or as a grouped Markdown table with best cells in bold."""
    if fmt == "json":
        return report.to_json()
    if fmt != "markdown":
        raise ConfigError(f"unknown format {fmt!r}")

    first = "Similarity Functions with GAF" if report.gaf else "Similarity Functions"
    d_cols = ["D"] if report.arity == 1 else ["D₁", "D₂"]
    metric_cols = [(k, m) for k in report.kinds for m in METRICS]
    header = [first] + d_cols + [f"{KIND_PREFIX[k]}{METRIC_LABEL[m]}" for k, m in metric_cols]
    lines = [f"### {report.title} (target {report.target}, seed {report.seed})", ""]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join(["---"] * len(header)) + "|")

    best = report.best()
    for group in report.groups():
        rows = [report.row(sid) for sid in group]
        lead = rows[0]
        labels = ", ".join(r.spec.label for r in rows)
        if lead.error is not None:
            cells = [labels] + ["-"] * len(d_cols) + ["-"] * len(metric_cols)
            lines.append("| " + " | ".join(cells) + f" |  <!-- {lead.error} -->")
            continue
        cells = [labels] + list(lead.chosen)
        for kind, metric in metric_cols:
            res = lead.results.get(kind)
            if res is None or not res.ok:
                cells.append("-")
                continue
            text = _fmt(getattr(res, metric))
            if lead.spec.id in best.get((kind, metric), ()):
                text = f"**{text}**"
            cells.append(text)
        lines.append("| " + " | ".join(cells) + " |")

    notes = [g for g in report.groups() if len(g) > 1]
    if notes:
        lines.append("")
        for g in notes:
            labels = ", ".join(report.row(s).spec.label for s in g)
            chosen = ", ".join(report.row(g[0]).chosen)
            lines.append(f"- {labels} share a cell: they selected the same source(s), {chosen}.")
    failed = [r for r in report.rows if r.error is not None]
    if failed:
        lines.append("")
        for r in failed:
            lines.append(f"- {r.spec.label} failed: {r.error}")
    return "\n".join(lines) + "\n"


def render_comparison(summary):
    lines = [
        f"### GAF vs baseline, experiment {summary['experiment_id']} (target {summary['target']})",
        "",
        "| Column | Best with GAF | Best without GAF | Delta | GAF enhances |",
        "|---|---|---|---|---|",
    ]
    for e in summary["entries"]:
        lines.append(
            f"| {e['column']} | {_fmt(e['best_gaf'])} | {_fmt(e['best_baseline'])} | "
            f"{e['delta']:+.4f} | {'yes' if e['gaf_enhances'] else 'no'} |"
        )
    return "\n".join(lines) + "\n"
