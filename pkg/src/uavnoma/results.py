"""CSV output for sum-rate grids, histograms and oracle reports.

Floats are written with 17 significant digits so files parse back to the
exact same values; lists inside a cell are joined with ``;``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

from .config import ScenarioConfig
from .engine import EmpiricalPdf, OracleRow, SumRateEstimate

PDF_COLUMNS = ("statistic", "rank", "bin_left", "bin_right", "density", "sample_count")
# identifies the grid point a histogram belongs to when a file holds several
PDF_KEY_COLUMNS = ("grid_index", "delta_deg", "ordering", "rank_pair", "altitude_m", "tx_power_dbm")


class ResultsError(OSError):
    pass


@dataclass(frozen=True)
class ResultRow:
    altitude_m: float
    tx_power_dbm: float
    delta_deg: float
    scheme: str
    ordering: str
    rank_pair: tuple[int, ...]
    mean_sum_rate_bpcu: float
    ci_halfwidth_bpcu: float
    outage_freq_per_user: tuple[float, ...]
    trials_used: int
    trials_rejected: int
    master_seed: int

    @classmethod
    def from_estimate(cls, config: ScenarioConfig, est: SumRateEstimate) -> "ResultRow":
        return cls(
            altitude_m=config.radio.altitude_m,
            tx_power_dbm=config.radio.tx_power_dbm,
            delta_deg=math.degrees(config.region.horizontal_angle_rad),
            scheme=config.scheme.value,
            ordering=config.ordering.value,
            rank_pair=tuple(config.plan.ordered_user_indices),
            mean_sum_rate_bpcu=est.mean_bpcu,
            ci_halfwidth_bpcu=est.ci_halfwidth_bpcu,
            outage_freq_per_user=tuple(est.outage_freq_per_user),
            trials_used=est.trials_used,
            trials_rejected=est.trials_rejected,
            master_seed=config.master_seed,
        )


RESULT_COLUMNS = tuple(f.name for f in fields(ResultRow))


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, "#.17g") if math.isfinite(value) else repr(value)
    if isinstance(value, (tuple, list)):
        return ";".join(fmt(v) for v in value)
    return str(value)


def _write(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) for v in row])
    except OSError as exc:
        raise ResultsError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_results(rows: Sequence[ResultRow], path) -> None:
    if not rows:
        raise ValueError("nothing to write: no result rows")
    _write(path, RESULT_COLUMNS, (astuple(r) for r in rows))


def _floats(cell: str) -> tuple[float, ...]:
    return tuple(float(v) for v in cell.split(";")) if cell else ()


def read_results(path) -> list[ResultRow]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        return [ResultRow(
            altitude_m=float(r["altitude_m"]),
            tx_power_dbm=float(r["tx_power_dbm"]),
            delta_deg=float(r["delta_deg"]),
            scheme=r["scheme"],
            ordering=r["ordering"],
            rank_pair=tuple(int(v) for v in r["rank_pair"].split(";")),
            mean_sum_rate_bpcu=float(r["mean_sum_rate_bpcu"]),
            ci_halfwidth_bpcu=float(r["ci_halfwidth_bpcu"]),
            outage_freq_per_user=_floats(r["outage_freq_per_user"]),
            trials_used=int(r["trials_used"]),
            trials_rejected=int(r["trials_rejected"]),
            master_seed=int(r["master_seed"]),
        ) for r in reader]


def pdf_rows(grid_index: int, config: ScenarioConfig, statistic: str, pdfs: Sequence[EmpiricalPdf]):
    key = (grid_index, math.degrees(config.region.horizontal_angle_rad), config.ordering.value,
           tuple(config.plan.ordered_user_indices), config.radio.altitude_m,
           config.radio.tx_power_dbm)
    for pdf in pdfs:
        for left, right, dens in zip(pdf.bin_edges[:-1], pdf.bin_edges[1:], pdf.densities):
            yield key + (statistic, pdf.rank, float(left), float(right), float(dens), pdf.sample_count)


def write_pdfs(rows: Sequence[tuple], path) -> None:
    if not rows:
        raise ValueError("nothing to write: no histogram rows")
    _write(path, PDF_KEY_COLUMNS + PDF_COLUMNS, rows)


ORACLE_COLUMNS = ("geometry_index", "rank", "distance_m", "angle_rad", "analytic_non_outage",
                  "empirical_non_outage", "sigma", "passed")


def write_oracle(rows: Sequence[OracleRow], path) -> None:
    _write(path, ORACLE_COLUMNS,
           (astuple(r) + (r.passed,) for r in rows))
