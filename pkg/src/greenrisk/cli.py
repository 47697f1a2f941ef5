"""``greenrisk`` command line.

Settings come from an INI-style ``--config`` file; any value can be
overridden with ``--set section.key=value`` and the global flags below win
over both. Relative paths in the config resolve against the config file's
directory.

Exit codes: 0 success, 2 bad input or violated precondition, 3 internal error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from types import SimpleNamespace

from greenrisk import __version__
from greenrisk.classifier import FeatureConfig, TrainConfig, load_model, run_experiment, save_model, select_run
from greenrisk.corpus import (
    DEFAULT_MAX_CHARS,
    chunk_document,
    load_chunk_file,
    load_dataset,
    load_reports,
    parse_paragraphs,
    persist_dataset,
    records_from_labeled,
    split_dataset,
)
from greenrisk.emissions import (
    DEFAULT_K,
    emissions_report,
    flag_outliers,
    load_emissions_csv,
    relative_emissions,
    report_to_csv,
)
from greenrisk.evaluation import aggregate_runs, company_table, evaluate_report
from greenrisk.exceptions import GreenRiskError
from greenrisk.labeling import (
    EQ2,
    DEFAULT_COEFFICIENTS,
    RiskCoefficients,
    fit_coefficients,
    generate_labels,
    load_coefficients,
    load_exemplars,
    save_coefficients,
)
from greenrisk.lexicon import (
    MODEL_ATTRIBUTES,
    AttributeScorer,
    default_fallbacks,
    default_lexicon,
    load_external_scores,
    load_lexicon,
)

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3

DEFAULTS = {
    "general": {"seed": "0", "out_dir": "out"},
    "paths": {},
    "attributes": {"fallbacks": "default"},
    "labeling": {"scheme": "eq1"},
    "chunking": {"max_chars": str(DEFAULT_MAX_CHARS)},
    "split": {"train_fraction": "0.8"},
    "classifier": {},
    "experiment": {"seeds": "0,1,2,3,4,5,6,7,8,9"},
    "evaluation": {"tie": "1"},
    "emissions": {"k": str(DEFAULT_K)},
}


class Settings:
    """Merged view of defaults, config file, ``--set`` overrides and global flags."""

    def __init__(self, args: argparse.Namespace):
        self.parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
        self.parser.read_dict(DEFAULTS)
        self.base = Path.cwd()
        if args.config:
            path = Path(args.config)
            if not path.is_file():
                raise GreenRiskError(f"config file not found: {path}")
            try:
                self.parser.read(path, encoding="utf-8")
            except configparser.Error as exc:
                raise GreenRiskError(f"{path}: {exc}") from exc
            self.base = path.resolve().parent
        for item in args.overrides or ():
            key, sep, value = item.partition("=")
            section, dot, option = key.strip().partition(".")
            if not sep or not dot:
                raise GreenRiskError(f"--set expects section.key=value, got {item!r}")
            if not self.parser.has_section(section):
                self.parser.add_section(section)
            self.parser.set(section, option, value.strip())
        if args.seed is not None:
            self.parser.set("general", "seed", str(args.seed))
        if args.out_dir is not None:
            self.parser.set("general", "out_dir", args.out_dir)
            self._out_from_flag = True
        else:
            self._out_from_flag = False
        if args.scheme is not None:
            self.parser.set("labeling", "scheme", args.scheme)

    def get(self, section: str, key: str, fallback=None):
        return self.parser.get(section, key, fallback=fallback)

    def number(self, section: str, key: str, kind=float, fallback=None):
        raw = self.get(section, key)
        if raw is None:
            return fallback
        try:
            return kind(raw)
        except ValueError:
            raise GreenRiskError(f"[{section}] {key} = {raw!r} is not a valid {kind.__name__}") from None

    def flag(self, section: str, key: str, fallback: bool = False) -> bool:
        raw = self.get(section, key)
        if raw is None:
            return fallback
        try:
            return self.parser.getboolean(section, key)
        except ValueError:
            raise GreenRiskError(f"[{section}] {key} = {raw!r} is not a boolean") from None

    def path(self, key: str, required: bool = False, must_exist: bool = True) -> Path | None:
        raw = self.get("paths", key)
        if not raw:
            if required:
                raise GreenRiskError(f"missing required path: [paths] {key}")
            return None
        path = Path(raw)
        if not path.is_absolute():
            path = self.base / path
        if must_exist and not path.exists():
            raise GreenRiskError(f"[paths] {key}: path not found: {path}")
        return path

    @property
    def seed(self) -> int:
        return self.number("general", "seed", int)

    @property
    def out_dir(self) -> Path:
        out = Path(self.get("general", "out_dir"))
        if not out.is_absolute() and not self._out_from_flag:
            out = self.base / out
        out.mkdir(parents=True, exist_ok=True)
        return out

    def seeds(self) -> list[int]:
        raw = self.get("experiment", "seeds", "")
        try:
            seeds = [int(s) for s in raw.replace(" ", "").split(",") if s]
        except ValueError:
            raise GreenRiskError(f"[experiment] seeds = {raw!r} is not a list of integers") from None
        if not seeds:
            raise GreenRiskError("[experiment] seeds is empty")
        return seeds

    def coefficients(self) -> RiskCoefficients:
        scheme = self.get("labeling", "scheme")
        if scheme == "eq2":
            return EQ2
        if scheme != "eq1":
            raise GreenRiskError(f"unknown scheme {scheme!r}; expected eq1 or eq2")
        path = self.path("coefficients")
        coeffs = load_coefficients(path) if path else DEFAULT_COEFFICIENTS
        if coeffs.scheme == "eq2":
            return coeffs
        threshold = self.number("labeling", "threshold", float, coeffs.threshold)
        return RiskCoefficients.from_weights(coeffs.weights, threshold)

    def scorer(self) -> AttributeScorer:
        lex_path = self.path("lexicon")
        lexicon = load_lexicon(lex_path) if lex_path else default_lexicon()
        scores_path = self.path("external_scores")
        external = load_external_scores(scores_path) if scores_path else {}
        mode = self.get("attributes", "fallbacks")
        if mode not in ("default", "none"):
            raise GreenRiskError(f"[attributes] fallbacks must be default or none, got {mode!r}")
        fallbacks = default_fallbacks() if mode == "default" else {}
        for attr in MODEL_ATTRIBUTES:
            custom = self.path(f"fallback_{attr}")
            if custom:
                fallbacks[attr] = load_lexicon(custom)
        return AttributeScorer(lexicon, external, fallbacks)

    def climate_lexicon(self):
        path = self.path("climate_keywords")
        return load_lexicon(path) if path else None

    def max_chars(self) -> int:
        return self.number("chunking", "max_chars", int)

    def feature_config(self) -> FeatureConfig:
        kw = {}
        if self.get("classifier", "ngram_orders"):
            kw["ngram_orders"] = tuple(int(x) for x in self.get("classifier", "ngram_orders").split(","))
        if self.get("classifier", "hash_dimension"):
            kw["hash_dimension"] = self.number("classifier", "hash_dimension", int)
        if self.get("classifier", "lowercase"):
            kw["lowercase"] = self.flag("classifier", "lowercase")
        return FeatureConfig(**kw)

    def train_config(self, frozen: bool | None = None) -> TrainConfig:
        base = TrainConfig()
        return TrainConfig(
            learning_rate=self.number("classifier", "learning_rate", float, base.learning_rate),
            epochs=self.number("classifier", "epochs", int, base.epochs),
            l2=self.number("classifier", "l2", float, base.l2),
            seed=self.seed,
            frozen_features=frozen if frozen is not None else self.flag("classifier", "frozen_features"),
            batch_size=self.number("classifier", "batch_size", int, base.batch_size),
        )


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")


def _input_chunks(settings: Settings):
    reports = settings.path("reports")
    chunk_file = settings.path("chunks")
    if not reports and not chunk_file:
        raise GreenRiskError("nothing to label: set [paths] reports and/or [paths] chunks")
    chunks = []
    if reports:
        climate = settings.climate_lexicon()
        for doc in load_reports(reports):
            chunks.extend(c for c in chunk_document(doc, settings.max_chars(), climate) if c.climate_related)
    if chunk_file:
        chunks.extend(load_chunk_file(chunk_file))
    return chunks


def cmd_label(settings: Settings, args) -> int:
    scorer = settings.scorer()
    coeffs = settings.coefficients()
    chunks = _input_chunks(settings)
    labeled = generate_labels([(c, scorer.score(c)[0]) for c in chunks], coeffs)
    dataset = records_from_labeled(labeled)
    fraction = settings.number("split", "train_fraction", float)
    train_set, validation_set = split_dataset(dataset, fraction, settings.seed)
    out = settings.out_dir
    persist_dataset(train_set, out / "train.jsonl")
    persist_dataset(validation_set, out / "validation.jsonl")
    counts = dataset.label_counts()
    print(f"scheme={coeffs.scheme} chunks={len(dataset)} label0={counts[0]} label1={counts[1]}")
    print(f"train={len(train_set)} validation={len(validation_set)}")
    return EXIT_OK


def cmd_fit(settings: Settings, args) -> int:
    path = Path(args.exemplars) if args.exemplars else settings.path("exemplars", required=True)
    threshold = settings.number("labeling", "threshold", float, DEFAULT_COEFFICIENTS.threshold)
    result = fit_coefficients(load_exemplars(path), threshold)
    out = settings.out_dir / "coefficients.json"
    save_coefficients(result.coefficients, out)
    print(json.dumps({**result.coefficients.to_dict(), "residual_norm": result.residual_norm,
                      "n_exemplars": result.n_exemplars}, indent=2))
    return EXIT_OK


def cmd_train(settings: Settings, args) -> int:
    out = settings.out_dir
    train_path = settings.path("train", must_exist=False) or out / "train.jsonl"
    val_path = settings.path("validation", must_exist=False) or out / "validation.jsonl"
    train_set, validation_set = load_dataset(train_path), load_dataset(val_path)
    if len(validation_set) == 0:
        raise GreenRiskError(f"validation set is empty: {val_path}")
    fc = settings.feature_config()
    tc = settings.train_config(frozen=True if args.frozen else None)
    seeds = settings.seeds()
    runs = run_experiment(train_set, validation_set, fc, tc, seeds)
    stats = aggregate_runs(runs)
    chosen = select_run(runs)
    save_model(chosen.model, out / "model.json")
    manifest = {
        "metadata": {"created_at": datetime.now(timezone.utc).isoformat(), "greenrisk_version": __version__},
        "train_path": str(train_path),
        "validation_path": str(val_path),
        "feature_config": asdict(fc),
        "train_config": {k: v for k, v in asdict(tc).items() if k != "seed"},
        "seeds": seeds,
        "runs": [r.to_dict() for r in runs],
        "aggregate": asdict(stats),
        "selected_seed": chosen.seed,
    }
    _write(out / "experiment.json", json.dumps(manifest, indent=2) + "\n")
    print(
        f"accuracy {stats.mean_accuracy * 100:.2f} ± {stats.std_accuracy * 100:.2f}  "
        f"F1 {stats.mean_f1:.2f} ± {stats.std_f1:.2f}  selected seed {chosen.seed}"
    )
    return EXIT_OK


def cmd_evaluate(settings: Settings, args) -> int:
    out = settings.out_dir
    model_path = settings.path("model") or out / "model.json"
    model = load_model(model_path)
    docs = load_reports(settings.path("reports", required=True))
    scorer, coeffs = settings.scorer(), settings.coefficients()
    tie = settings.number("evaluation", "tie", int)
    if tie not in (0, 1):
        raise GreenRiskError("[evaluation] tie must be 0 or 1")
    climate = settings.climate_lexicon()
    evals = [evaluate_report(model, doc, coeffs, settings.max_chars(), scorer, climate, tie) for doc in docs]
    table = company_table(evals)
    _write(out / "evaluation.csv", table.to_csv())
    sys.stdout.write(table.to_text())
    return EXIT_OK


def _read_evaluation_labels(path: Path):
    rows = []
    with path.open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if row.get("Company") in (None, "Mean") or row.get("ReportLabelPred", "") == "":
                continue
            rows.append(
                SimpleNamespace(
                    company=row["Company"],
                    report_label_predicted=int(row["ReportLabelPred"]),
                    report_label_gold=int(row["ReportLabelGold"]),
                )
            )
    return rows


def cmd_emissions(settings: Settings, args) -> int:
    csv_path = Path(args.csv) if args.csv else settings.path("emissions", required=True)
    k = settings.number("emissions", "k", float)
    relatives = relative_emissions(load_emissions_csv(csv_path))
    flags = flag_outliers(relatives, k)
    eval_path = Path(args.evaluation) if args.evaluation else settings.path("evaluation")
    if eval_path is not None and not eval_path.is_file():
        raise GreenRiskError(f"evaluation CSV not found: {eval_path}")
    evals = _read_evaluation_labels(eval_path) if eval_path else None
    rows = emissions_report(relatives, evals, flags)
    _write(settings.out_dir / "emissions_report.csv", report_to_csv(rows))
    for f in flags:
        print(f"outlier {f.company} {f.field} deviation={f.deviation:+g} cutoff={f.cutoff:.4g}")
    if not flags:
        print("no outliers")
    return EXIT_OK


def cmd_scan_hedging(settings: Settings, args) -> int:
    lexicon = settings.scorer().lexicon
    sources = args.files or ["-"]
    for name in sources:
        if name == "-":
            text = sys.stdin.read()
        else:
            path = Path(name)
            if not path.is_file():
                raise GreenRiskError(f"file not found: {path}")
            text = path.read_text(encoding="utf-8")
        for i, para in enumerate(parse_paragraphs(text)):
            matches = lexicon.find(para)
            print(f"{name}:{i}\t{int(bool(matches))}\t{'; '.join(matches)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greenrisk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI-style configuration file")
    common.add_argument("--seed", type=int, help="split/training seed (overrides [general] seed)")
    common.add_argument("--out-dir", help="output directory (overrides [general] out_dir)")
    common.add_argument("--scheme", choices=("eq1", "eq2"), help="labeling scheme")
    common.add_argument("--set", dest="overrides", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one config value; repeatable")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("label", parents=[common], help="chunk, score and label a corpus, then split it")
    p = sub.add_parser("fit", parents=[common], help="least-squares fit of eq1 weights to expert exemplars")
    p.add_argument("--exemplars", help="JSONL exemplars (overrides [paths] exemplars)")
    p = sub.add_parser("train", parents=[common], help="multi-seed classifier experiment")
    p.add_argument("--frozen", action="store_true", help="train the bias only")
    sub.add_parser("evaluate", parents=[common], help="report-level evaluation with majority voting")
    p = sub.add_parser("emissions", parents=[common], help="relative emissions and outlier flags")
    p.add_argument("--csv", help="emissions CSV (overrides [paths] emissions)")
    p.add_argument("--evaluation", help="evaluation.csv to join report labels from")
    p = sub.add_parser("scan-hedging", parents=[common], help="print hedging matches per paragraph")
    p.add_argument("files", nargs="*", help="text files; '-' or nothing reads stdin")
    return parser


COMMANDS = {
    "label": cmd_label,
    "fit": cmd_fit,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "emissions": cmd_emissions,
    "scan-hedging": cmd_scan_hedging,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = Settings(args)
        return COMMANDS[args.command](settings, args)
    except GreenRiskError as exc:
        print(f"greenrisk: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"greenrisk: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
