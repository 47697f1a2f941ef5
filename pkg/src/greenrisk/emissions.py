"""Company emissions relative to their sector-year average, with outlier flags.

Values are in hundred-thousand metric tonnes CO2e and revenue in billions of
USD. Input rows are either raw emissions (deviations are computed here) or
already-relative values, which pass through unchanged.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from greenrisk.exceptions import GreenRiskError

FIELDS = ("scope1", "scope2_market", "scope2_location", "scope2_uncategorized")
EMISSION_SECTORS = ("oil-gas", "tech")
MODES = ("raw", "relative")
CSV_COLUMNS = ("company", "sector", "year", "mode", *FIELDS, "revenue")
DEFAULT_K = 1.5


@dataclass(frozen=True)
class EmissionsRecord:
    company: str
    sector: str
    year: int
    values: Mapping[str, float]
    revenue: float
    mode: str = "raw"

    def __post_init__(self):
        if self.sector not in EMISSION_SECTORS:
            raise GreenRiskError(f"{self.company}: sector must be one of {EMISSION_SECTORS}, got {self.sector!r}")
        if self.mode not in MODES:
            raise GreenRiskError(f"{self.company}: mode must be raw or relative, got {self.mode!r}")
        unknown = set(self.values) - set(FIELDS)
        if unknown:
            raise GreenRiskError(f"{self.company}: unknown emission fields {sorted(unknown)}")
        if not (self.revenue > 0 and math.isfinite(self.revenue)):
            raise GreenRiskError(f"{self.company}: revenue must be positive")
        for name, v in self.values.items():
            if not math.isfinite(v):
                raise GreenRiskError(f"{self.company}: {name} is not finite")
            if self.mode == "raw" and v < 0:
                raise GreenRiskError(f"{self.company}: raw {name} must be >= 0")


@dataclass(frozen=True)
class RelativeEmissions:
    company: str
    sector: str
    year: int
    deviations: Mapping[str, float]
    revenue: float


@dataclass(frozen=True)
class OutlierFlag:
    company: str
    field: str
    deviation: float
    cutoff: float


def _parse_float(cell: str, what: str) -> float | None:
    cell = cell.strip()
    if cell in ("", "-"):
        return None
    try:
        return float(cell)
    except ValueError:
        raise GreenRiskError(f"{what}: not a number: {cell!r}") from None


def load_emissions_csv(path) -> list[EmissionsRecord]:
    """Read the emissions CSV; blank or ``-`` cells mean "not reported"."""
    path = Path(path)
    if not path.is_file():
        raise GreenRiskError(f"emissions CSV not found: {path}")
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise GreenRiskError(f"{path}: missing columns {sorted(missing)}")
        records = []
        for lineno, row in enumerate(reader, 2):
            where = f"{path}:{lineno}"
            values = {}
            for name in FIELDS:
                v = _parse_float(row[name], f"{where} {name}")
                if v is not None:
                    values[name] = v
            revenue = _parse_float(row["revenue"], f"{where} revenue")
            try:
                year = int(row["year"])
            except ValueError:
                raise GreenRiskError(f"{where}: bad year {row['year']!r}") from None
            if revenue is None:
                raise GreenRiskError(f"{where}: revenue is required")
            try:
                records.append(
                    EmissionsRecord(row["company"].strip(), row["sector"].strip(), year, values, revenue, row["mode"].strip())
                )
            except GreenRiskError as exc:
                raise GreenRiskError(f"{where}: {exc}") from exc
    return records


def relative_emissions(records: Sequence[EmissionsRecord]) -> list[RelativeEmissions]:
    """Deviation of each present field from its (sector, year) mean.

    A field missing for a company is left out of that group's mean and out of
    the company's output. Relative-mode records are passed through.
    """
    sums: dict[tuple, list[float]] = defaultdict(list)
    for r in records:
        if r.mode == "raw":
            for name, v in r.values.items():
                sums[(r.sector, r.year, name)].append(v)
    means = {key: math.fsum(vs) / len(vs) for key, vs in sums.items()}
    out = []
    for r in records:
        if r.mode == "relative":
            devs = dict(r.values)
        else:
            devs = {name: v - means[(r.sector, r.year, name)] for name, v in r.values.items()}
        out.append(RelativeEmissions(r.company, r.sector, r.year, {f: devs[f] for f in FIELDS if f in devs}, r.revenue))
    return out


def flag_outliers(relatives: Sequence[RelativeEmissions], k: float = DEFAULT_K) -> list[OutlierFlag]:
    """Flag deviations above ``k`` population standard deviations of their group.

    Groups are (sector, year, field) over companies reporting that field;
    groups of one company, or with zero spread, never flag.
    """
    if not k > 0:
        raise GreenRiskError(f"k must be > 0, got {k}")
    groups: dict[tuple, list[tuple[str, float]]] = defaultdict(list)
    for rel in relatives:
        for name, dev in rel.deviations.items():
            groups[(rel.sector, rel.year, name)].append((rel.company, dev))
    flags = []
    for (_, _, name), members in groups.items():
        if len(members) < 2:
            continue
        spread = float(np.std([d for _, d in members]))
        if spread == 0.0:
            continue
        cutoff = k * spread
        flags.extend(OutlierFlag(company, name, dev, cutoff) for company, dev in members if dev > cutoff)
    return sorted(flags, key=lambda f: (f.company, FIELDS.index(f.field)))


REPORT_COLUMNS = (
    "company",
    "sector",
    "year",
    *FIELDS,
    "revenue",
    "scope1_per_revenue",
    "report_label_predicted",
    "report_label_gold",
    "outlier_fields",
)


def emissions_report(
    relatives: Sequence[RelativeEmissions], evals: Iterable | None = None, flags: Sequence[OutlierFlag] = ()
) -> list[dict]:
    """Join relative emissions with report-level labels; one row per company.

    Companies present only in ``evals`` get blank emissions cells. Rows are
    sorted by sector, then company.
    """
    rows: dict[str, dict] = {}
    flagged = defaultdict(list)
    for f in flags:
        flagged[f.company].append(f.field)
    for rel in relatives:
        row = dict.fromkeys(REPORT_COLUMNS)
        row.update(company=rel.company, sector=rel.sector, year=rel.year, revenue=rel.revenue)
        row.update(rel.deviations)
        if "scope1" in rel.deviations:
            row["scope1_per_revenue"] = rel.deviations["scope1"] / rel.revenue
        row["outlier_fields"] = ";".join(flagged.get(rel.company, []))
        rows[rel.company] = row
    for ev in evals or ():
        row = rows.setdefault(ev.company, {**dict.fromkeys(REPORT_COLUMNS), "company": ev.company})
        row["report_label_predicted"] = ev.report_label_predicted
        row["report_label_gold"] = ev.report_label_gold
    return sorted(rows.values(), key=lambda r: (r["sector"] or "", r["company"]))


def report_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else (f"{v:.6g}" if isinstance(v, float) else v)) for k, v in row.items()})
    return buf.getvalue()
