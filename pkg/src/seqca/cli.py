"""Command-line interface.

Subcommands: ingest, ca, project, cluster, style-test, plot, pipeline.
Exit status is 0 on success, 1 for input or configuration errors and 2
for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import ca, render, seqclust, stylometrics, tabulate
from .errors import DimensionMismatch, InputError, NumericError, SeqcaError

CLUSTER_MODES = ("coordinates", "correlations")


class StageError(Exception):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")
        self.stage = stage
        self.exc = exc

    @property
    def exit_code(self) -> int:
        return 2 if isinstance(self.exc, (NumericError, np.linalg.LinAlgError)) else 1


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, etype, exc, tb):
        if exc is None or isinstance(exc, StageError):
            return False
        if isinstance(exc, (SeqcaError, OSError, ValueError, KeyError, json.JSONDecodeError, ArithmeticError, np.linalg.LinAlgError)):
            raise StageError(self.name, exc) from exc
        return False


def _fmt(v) -> str:
    return format(float(v), ".12g")


# ---------------------------------------------------------------- config


@dataclass
class PipelineConfig:
    """Run description; relative paths resolve against ``base``."""

    base: Path = field(default_factory=Path.cwd)
    script: Path | None = None
    table: Path | None = None
    markers: dict = field(default_factory=dict)
    vocab: dict = field(default_factory=dict)
    attributes: Any = None
    grouping: Any = None
    supplementary: list = field(default_factory=list)
    cluster_input: str = "coordinates"
    caesuras: int = 3
    trials: int = 999
    seed: int = 0
    factors: tuple[int, int] = (1, 2)
    overlay: Any = None
    out: Path = Path("out")

    KEYS = (
        "script", "table", "markers", "vocab", "attributes", "grouping", "supplementary",
        "cluster_input", "caesuras", "trials", "seed", "factors", "overlay", "out",
    )

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        doc = json.loads(path.read_text(encoding="utf-8"))
        return cls.from_dict(doc, path.parent)

    @classmethod
    def from_dict(cls, doc: dict, base: Path) -> "PipelineConfig":
        unknown = sorted(set(doc) - set(cls.KEYS))
        if unknown:
            raise InputError(f"unknown config keys: {unknown}")
        cfg = cls(base=Path(base))
        for key in ("markers", "vocab"):
            if key in doc:
                setattr(cfg, key, dict(doc[key]))
        for key in ("script", "table", "out"):
            if doc.get(key) is not None:
                setattr(cfg, key, cfg.resolve(doc[key]))
        for key in ("attributes", "grouping", "overlay"):
            v = doc.get(key)
            setattr(cfg, key, cfg.resolve(v) if isinstance(v, str) else v)
        cfg.supplementary = [
            {"path": cfg.resolve(s["path"]), "axis": s.get("axis", "rows"), "name": s.get("name")}
            for s in doc.get("supplementary", [])
        ]
        cfg.cluster_input = doc.get("cluster_input", cfg.cluster_input)
        cfg.caesuras = int(doc.get("caesuras", cfg.caesuras))
        cfg.trials = int(doc.get("trials", cfg.trials))
        cfg.seed = int(doc.get("seed", cfg.seed))
        cfg.factors = tuple(int(x) for x in doc.get("factors", cfg.factors))
        cfg.validate()
        return cfg

    def resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base / p

    def validate(self) -> None:
        if (self.script is None) == (self.table is None):
            raise InputError("config needs exactly one of 'script' or 'table'")
        if self.cluster_input not in CLUSTER_MODES:
            raise InputError(f"cluster_input must be one of {CLUSTER_MODES}")
        if len(self.factors) != 2:
            raise InputError("factors must name two factors")

    def check_files(self) -> None:
        paths = [self.script, self.table] + [s["path"] for s in self.supplementary]
        paths += [v for v in (self.attributes, self.grouping, self.overlay) if isinstance(v, Path)]
        missing = [str(p) for p in paths if p is not None and not p.exists()]
        if missing:
            raise FileNotFoundError(f"missing input files: {missing}")


# ---------------------------------------------------------------- helpers


def read_profiles(path, expected_labels) -> tuple[list[str], np.ndarray]:
    """Read supplementary counts and align them to ``expected_labels``.

    CSV uses the table layout; JSON is ``{element: {label: count}}``.
    Missing labels count as zero.
    """
    path = Path(path)
    expected = list(expected_labels)
    if path.suffix.lower() == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        names = list(doc)
        rows = [doc[n] for n in names]
        extra = sorted({k for r in rows for k in r} - set(expected))
        if extra:
            raise DimensionMismatch(f"supplementary labels not in the active table: {extra}")
        data = np.array([[float(r.get(lab, 0.0)) for lab in expected] for r in rows])
        return names, data.reshape(len(names), len(expected))
    rows = [r for r in csv.reader(io.StringIO(path.read_text(encoding="utf-8"))) if r]
    header = rows[0][1:]
    extra = sorted(set(header) - set(expected))
    if extra:
        raise DimensionMismatch(f"supplementary labels not in the active table: {extra}")
    pos = {lab: j for j, lab in enumerate(header)}
    names, data = [], []
    for r in rows[1:]:
        names.append(r[0])
        vals = [float(x) for x in r[1:]]
        data.append([vals[pos[lab]] if lab in pos else 0.0 for lab in expected])
    return names, np.array(data).reshape(len(names), len(expected))


def project_file(space: ca.FactorSpace, path, axis: str) -> tuple[list[str], np.ndarray]:
    opposite = space.col_labels if axis == "rows" else space.row_labels
    names, counts = read_profiles(path, opposite)
    coords = np.array([ca.project_supplementary(space, c, axis) for c in counts]).reshape(len(names), space.n_factors)
    return names, coords


def coords_to_csv(labels, coords, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label"] + [f"F{a}" for a in range(1, coords.shape[1] + 1)])
    for lab, row in zip(labels, coords):
        w.writerow([lab] + [_fmt(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def frequencies_to_csv(model: ca.FrequencyModel, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "mass"] + list(model.col_labels))
    for lab, m, row in zip(model.row_labels, model.row_masses, model.f):
        w.writerow([lab, _fmt(m)] + [_fmt(v) for v in row])
    w.writerow(["mass", ""] + [_fmt(v) for v in model.col_masses])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def summary(space: ca.FactorSpace) -> dict:
    return {
        "rows": len(space.row_labels),
        "columns": len(space.col_labels),
        "n_factors": space.n_factors,
        "total_inertia": space.total_inertia,
        "eigenvalues": [float(v) for v in space.eigenvalues],
        "percent": [float(v) for v in space.percentages()],
    }


def format_summary(s: dict) -> str:
    lines = [f"{s['rows']} rows x {s['columns']} columns, N = {s['n_factors']} factors, "
             f"total inertia {_fmt(s['total_inertia'])}"]
    for a, (lam, pct) in enumerate(zip(s["eigenvalues"], s["percent"]), start=1):
        lines.append(f"  factor {a:>2}: eigenvalue {lam:.6g}  {pct:6.2f}%")
    if len(s["percent"]) >= 2:
        lines.append(f"  plane 1-2: {s['percent'][0] + s['percent'][1]:.2f}%")
    return "\n".join(lines)


def cluster_points(space: ca.FactorSpace, mode: str) -> np.ndarray:
    if mode == "coordinates":
        return np.asarray(space.row_coords)
    if mode == "correlations":
        return np.array([ca.factor_correlations(space, "rows", i) for i in range(len(space.row_labels))])
    raise InputError(f"cluster mode must be one of {CLUSTER_MODES}")


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def build_table(cfg: PipelineConfig) -> tuple[tabulate.ContingencyTable, tabulate.ScriptCorpus | None]:
    corpus = None
    if cfg.script is not None:
        text = cfg.script.read_text(encoding="utf-8")
        corpus = tabulate.parse_script(text, tabulate.MarkerConfig.from_dict(cfg.markers))
        if cfg.attributes is not None:
            table = tabulate.build_attribute_table(corpus, tabulate.load_attribute_specs(cfg.attributes))
        else:
            table = tabulate.build_term_table(corpus, tabulate.VocabPolicy.from_dict(cfg.vocab))
    else:
        table = tabulate.ContingencyTable.from_csv(cfg.table)
    if cfg.grouping is not None:
        mapping, axis = tabulate.load_grouping(cfg.grouping)
        table = tabulate.aggregate(table, mapping, axis)
    return table, corpus


def corpus_doc(corpus: tabulate.ScriptCorpus) -> dict:
    return {
        "scenes": [
            {"index": s.index, "heading": s.heading, "words": s.n_words} for s in corpus
        ],
        "total_words": corpus.total_words,
    }


# ---------------------------------------------------------------- pipeline


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run every stage and write all artifacts to ``cfg.out``.

    Returns the run report, which is also written as ``report.json``.
    """
    with _Stage("ingest"):
        cfg.check_files()
        table, corpus = build_table(cfg)
    out = Path(cfg.out)
    with _Stage("output"):
        out.mkdir(parents=True, exist_ok=True)
    artifacts = []

    def put(name, text):
        _write(out / name, text)
        artifacts.append(name)

    put("table.csv", table.to_csv())
    if corpus is not None:
        put("corpus.json", _dump(corpus_doc(corpus)))

    with _Stage("ca"):
        model = ca.frequencies(table)
        space = ca.decompose(model)
    put("frequencies.csv", frequencies_to_csv(model))
    put("factors_rows.csv", space.to_csv("rows"))
    put("factors_columns.csv", space.to_csv("columns"))
    report: dict[str, Any] = {"summary": summary(space)}

    supp_sets = []
    with _Stage("project"):
        for i, s in enumerate(cfg.supplementary, start=1):
            names, coords = project_file(space, s["path"], s["axis"])
            name = s.get("name") or f"supplementary_{i}"
            put(f"{name}.csv", coords_to_csv(names, coords))
            supp_sets.append(render.PointSet(tuple(names), coords, "supp"))

    n = len(table.row_labels)
    with _Stage("cluster"):
        pts = cluster_points(space, cfg.cluster_input) if space.n_factors else np.zeros((n, 1))
        dend = seqclust.cluster_sequence(seqclust.OrderedPoints(pts, table.row_labels))
        k = min(cfg.caesuras, n - 1)
        cuts = seqclust.detect_caesuras(dend, k) if k >= 1 else []
    put("dendrogram.json", dend.to_json() + "\n")
    put("dendrogram.txt", render.emit_dendrogram(dend, "text"))
    put("dendrogram.svg", render.emit_dendrogram(dend, "svg"))
    put("ultrametric.csv", seqclust.ultrametric_to_csv(seqclust.cophenetic(dend), table.row_labels))
    caesura_doc = [
        {"after": table.row_labels[c.after - 1], "before": table.row_labels[c.after], "position": c.after, "level": c.level}
        for c in cuts
    ]
    put("caesuras.json", _dump(caesura_doc))
    report["caesuras"] = caesura_doc

    if n >= 3 and space.n_factors:
        with _Stage("style-test"):
            profile = stylometrics.SequenceProfile(
                seqclust.OrderedPoints(space.row_coords, table.row_labels), table.counts.sum(axis=1)
            )
            style = stylometrics.permutation_test(profile, cfg.trials, cfg.seed)
        put("style_report.json", style.to_json() + "\n")
        report["style"] = style.to_dict()

    with _Stage("plot"):
        overlay = _load_overlay(cfg.overlay)
        planes = _plane_pairs(space.n_factors, cfg.factors)
        for a, b in planes:
            r = render.PlaneRender(factors=(a, b), supplementary=tuple(supp_sets))
            put(f"plane_{a}_{b}.svg", render.emit_plane_svg(space, r, overlay))

    report["artifacts"] = artifacts + ["report.json"]
    _write(out / "report.json", _dump(report))
    return report


def _load_overlay(src):
    if src is None:
        return None
    if isinstance(src, dict):
        return {str(k): float(v) for k, v in src.items()}
    return {str(k): float(v) for k, v in json.loads(Path(src).read_text(encoding="utf-8")).items()}


def _plane_pairs(n: int, first: tuple[int, int]) -> list[tuple[int, int]]:
    """Requested plane plus consecutive pairs covering every factor."""
    if n < 2:
        return []
    pairs = [tuple(first)] if max(first) <= n else []
    for a in range(1, n, 2):
        pair = (a, a + 1) if a + 1 <= n else (a - 1, a)
        if pair not in pairs:
            pairs.append(pair)
    if n % 2 and (n - 1, n) not in pairs:
        pairs.append((n - 1, n))
    return pairs


# ---------------------------------------------------------------- commands


def _load_table(args) -> tabulate.ContingencyTable:
    with _Stage("ingest"):
        if args.input is None:
            raise InputError("--input is required")
        return tabulate.ContingencyTable.from_csv(args.input)


def _space(table):
    with _Stage("ca"):
        return ca.decompose(ca.frequencies(table))


def _outdir(args) -> Path:
    out = Path(args.out)
    with _Stage("output"):
        out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(args) -> int:
    with _Stage("ingest"):
        if args.input is None:
            raise InputError("--input is required")
        doc = json.loads(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
        base = Path(args.config).parent if args.config else Path.cwd()
        doc = {k: v for k, v in doc.items() if k in ("markers", "vocab", "attributes", "grouping")}
        cfg = PipelineConfig.from_dict({**doc, "script": str(Path(args.input).resolve())}, base)
        cfg.check_files()
        table, corpus = build_table(cfg)
    out = _outdir(args)
    if args.format == "json":
        _write(out / "corpus.json", _dump(corpus_doc(corpus)))
    _write(out / "table.csv", table.to_csv())
    print(f"{len(corpus)} scenes, {table.shape[1]} columns, total {_fmt(table.grand_total)} -> {out / 'table.csv'}")
    return 0


def cmd_ca(args) -> int:
    table = _load_table(args)
    with _Stage("ca"):
        model = ca.frequencies(table)
        space = ca.decompose(model)
    out = _outdir(args)
    _write(out / "frequencies.csv", frequencies_to_csv(model))
    space.to_csv("rows", out / "factors_rows.csv")
    space.to_csv("columns", out / "factors_columns.csv")
    s = summary(space)
    _write(out / "summary.json", _dump(s))
    print(format_summary(s))
    return 0


def cmd_project(args) -> int:
    table = _load_table(args)
    space = _space(table)
    with _Stage("project"):
        if not args.supplementary:
            raise InputError("--supplementary is required")
        names, coords = project_file(space, args.supplementary, args.axis)
    out = _outdir(args)
    coords_to_csv(names, coords, out / f"supplementary_{args.axis}.csv")
    print(coords_to_csv(names, coords), end="")
    return 0


def cmd_cluster(args) -> int:
    table = _load_table(args)
    space = _space(table)
    with _Stage("cluster"):
        pts = cluster_points(space, args.mode) if space.n_factors else np.zeros((len(table.row_labels), 1))
        dend = seqclust.cluster_sequence(seqclust.OrderedPoints(pts, table.row_labels))
        n = len(table.row_labels)
        cuts = seqclust.detect_caesuras(dend, min(args.k, n - 1)) if n > 1 else []
    out = _outdir(args)
    fmt = args.format or "json"
    if fmt == "json":
        _write(out / "dendrogram.json", dend.to_json() + "\n")
    elif fmt in ("text", "svg"):
        _write(out / f"dendrogram.{'txt' if fmt == 'text' else 'svg'}", render.emit_dendrogram(dend, fmt))
    else:
        seqclust.ultrametric_to_csv(seqclust.cophenetic(dend), table.row_labels, out / "ultrametric.csv")
    doc = [{"after": table.row_labels[c.after - 1], "before": table.row_labels[c.after], "position": c.after, "level": c.level} for c in cuts]
    _write(out / "caesuras.json", _dump(doc))
    print(render.emit_dendrogram(dend, "text"), end="")
    for c in doc:
        print(f"caesura {c['after']} | {c['before']} at level {_fmt(c['level'])}")
    return 0


def cmd_style_test(args) -> int:
    table = _load_table(args)
    space = _space(table)
    with _Stage("style-test"):
        pts = cluster_points(space, args.mode) if space.n_factors else np.zeros((len(table.row_labels), 1))
        profile = stylometrics.SequenceProfile(seqclust.OrderedPoints(pts, table.row_labels), table.counts.sum(axis=1))
        rep = stylometrics.permutation_test(profile, args.trials, args.seed)
    out = _outdir(args)
    _write(out / "style_report.json", rep.to_json() + "\n")
    print(rep.format_table())
    return 0


def cmd_plot(args) -> int:
    table = _load_table(args)
    space = _space(table)
    with _Stage("plot"):
        a, b = (int(x) for x in args.factors.split(","))
        supp = ()
        if args.supplementary:
            names, coords = project_file(space, args.supplementary, args.axis)
            supp = (render.PointSet(tuple(names), coords, "supp"),)
        svg = render.emit_plane_svg(space, render.PlaneRender(factors=(a, b), supplementary=supp), _load_overlay(args.overlay))
    out = _outdir(args)
    _write(out / f"plane_{a}_{b}.svg", svg)
    print(out / f"plane_{a}_{b}.svg")
    return 0


def cmd_pipeline(args) -> int:
    with _Stage("config"):
        if not args.config:
            raise InputError("--config is required")
        cfg = PipelineConfig.load(args.config)
        if args.out:
            cfg.out = Path(args.out)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.trials is not None:
            cfg.trials = args.trials
    report = run_pipeline(cfg)
    print(format_summary(report["summary"]))
    print(f"artifacts written to {cfg.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="script text (ingest) or table CSV")
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--format", choices=("csv", "json", "svg", "text"))
    common.add_argument("--error-json", action="store_true", help="print errors as JSON on stderr")

    parser = argparse.ArgumentParser(prog="seqca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="script text -> contingency table")
    p.set_defaults(func=cmd_ingest)
    p = sub.add_parser("ca", parents=[common], help="correspondence analysis of a table")
    p.set_defaults(func=cmd_ca)
    p = sub.add_parser("project", parents=[common], help="project supplementary profiles")
    p.add_argument("--supplementary")
    p.add_argument("--axis", choices=("rows", "columns"), default="rows")
    p.set_defaults(func=cmd_project)
    p = sub.add_parser("cluster", parents=[common], help="sequence-constrained clustering of rows")
    p.add_argument("--mode", choices=CLUSTER_MODES, default="coordinates")
    p.add_argument("--k", type=int, default=3, help="number of caesuras")
    p.set_defaults(func=cmd_cluster)
    p = sub.add_parser("style-test", parents=[common], help="Monte Carlo style test of the row sequence")
    p.add_argument("--mode", choices=CLUSTER_MODES, default="coordinates")
    p.add_argument("--trials", type=int, default=999)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_style_test)
    p = sub.add_parser("plot", parents=[common], help="SVG factor plane")
    p.add_argument("--factors", default="1,2")
    p.add_argument("--supplementary")
    p.add_argument("--axis", choices=("rows", "columns"), default="rows")
    p.add_argument("--overlay", help="JSON {label: size} for glyph sizing")
    p.set_defaults(func=cmd_plot)
    p = sub.add_parser("pipeline", parents=[common], help="run every stage from a config file")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_pipeline, out=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as err:
        if args.error_json:
            doc = {"stage": err.stage, "error": type(err.exc).__name__, "message": str(err.exc)}
            print(json.dumps(doc), file=sys.stderr)
        else:
            print(f"seqca: error in stage {err.stage!r}: {err.exc}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
