"""End-to-end Faber-Krahn check: a domain against the half-space of equal Gaussian measure."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from .errors import StageError
from .gauss_geometry import (
    CorpusEntry,
    Domain2D,
    isoperimetric_g,
    load_corpus,
    measure_2d,
    perimeter_2d,
    symmetrize,
)
from .levelset_functional import compare_levels_2d
from .solver_1d import HalfLineProblem, solve_lambda1
from .solver_2d import lambda1_2d_extrapolated

TOLERANCE_FK = 1e-3
EQUALITY_BAND = 5e-3
ISOPERIMETRIC_TOL = 1e-6
DEFAULT_H = 0.1

CSV_COLUMNS = (
    "name",
    "beta",
    "gamma",
    "sigma_sharp",
    "lambda1_symmetrized",
    "lambda1_domain",
    "margin",
    "perimeter",
    "isoperimetric_margin",
    "near_equality",
    "is_half_plane",
    "equality_consistent",
    "comparison_fraction",
    "below_eigenvalue_fraction",
    "passed",
)


def default_corpus_path() -> Path:
    return Path(str(resources.files("hermite_fk") / "data" / "default_corpus.json"))


@dataclass
class ReportRow:
    name: str
    beta: float
    gamma: float
    sigma_sharp: float
    lambda1_symmetrized: float
    lambda1_domain: float
    margin: float
    perimeter: float
    isoperimetric_margin: float
    near_equality: bool
    is_half_plane: bool
    equality_consistent: bool
    comparison_fraction: float
    below_eigenvalue_fraction: float
    passed: bool
    runtime_ms: dict = field(default_factory=dict)

    @property
    def isoperimetric_ok(self) -> bool:
        return self.isoperimetric_margin >= -ISOPERIMETRIC_TOL

    def csv_values(self) -> list[str]:
        out = []
        for col in CSV_COLUMNS:
            v = getattr(self, col)
            if isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, float):
                out.append(format(v, ".17g"))
            else:
                out.append(str(v))
        return out


@dataclass
class VerificationReport:
    rows: list[ReportRow]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in self.rows:
                writer.writerow(row.csv_values())

    def summary(self) -> dict:
        return {"passed": self.passed, "rows": [asdict(r) for r in self.rows]}

    def write_summary(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2) + "\n")


class _Stages:
    """Times each stage and re-raises failures with the stage name attached."""

    def __init__(self, entry: str):
        self.entry = entry
        self.runtime_ms: dict[str, float] = {}

    def run(self, stage: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, self.entry, exc) from exc
        finally:
            self.runtime_ms[stage] = round(1e3 * (time.perf_counter() - t0), 3)


def verify_faber_krahn(domain: Domain2D, beta: float, h: float = DEFAULT_H,
                       tolerance_fk: float = TOLERANCE_FK, equality_band: float = EQUALITY_BAND,
                       name: str = "domain", levels: int = 30) -> ReportRow:
    """Compare the extrapolated 2D eigenvalue with the one of the symmetrized half-space."""
    st = _Stages(name)
    if not beta > 0.0:
        raise StageError("input", name, ValueError(f"beta must be positive, got {beta!r}"))
    gamma = st.run("measure", measure_2d, domain)
    sigma_sharp = st.run("symmetrize", symmetrize, gamma)
    sym = st.run("solve_1d", solve_lambda1, HalfLineProblem(sigma_sharp, beta))
    lam_dom, _, fine = st.run("solve_2d", lambda1_2d_extrapolated, domain, beta, h)
    perim = st.run("perimeter", perimeter_2d, domain)
    iso = perim - isoperimetric_g(gamma)
    cmp = st.run("levelset", compare_levels_2d, fine, sym, levels)

    margin = lam_dom - sym.lambda1
    near = abs(margin) <= equality_band
    return ReportRow(
        name=name,
        beta=float(beta),
        gamma=float(gamma),
        sigma_sharp=float(sigma_sharp),
        lambda1_symmetrized=float(sym.lambda1),
        lambda1_domain=float(lam_dom),
        margin=float(margin),
        perimeter=float(perim),
        isoperimetric_margin=float(iso),
        near_equality=near,
        is_half_plane=domain.is_half_plane,
        equality_consistent=near == domain.is_half_plane,
        comparison_fraction=cmp.comparison_fraction,
        below_eigenvalue_fraction=cmp.below_eigenvalue_fraction,
        passed=bool(margin >= -tolerance_fk),
        runtime_ms=st.runtime_ms,
    )


def _verify_entry(args) -> ReportRow:
    entry, h, tolerance_fk, equality_band = args
    return verify_faber_krahn(entry.domain, entry.beta, h, tolerance_fk, equality_band,
                              name=entry.name)


def verify_entries(entries: list[CorpusEntry], h: float = DEFAULT_H,
                   tolerance_fk: float = TOLERANCE_FK, equality_band: float = EQUALITY_BAND,
                   workers: int | None = None) -> VerificationReport:
    """Verify each entry, concurrently when ``workers > 1``; rows keep the corpus order."""
    jobs = [(e, h, tolerance_fk, equality_band) for e in entries]
    if workers is None:
        workers = min(len(jobs), os.cpu_count() or 1)
    if workers <= 1 or len(jobs) <= 1:
        rows = [_verify_entry(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_verify_entry, jobs))
    return VerificationReport(rows)


def run_corpus(corpus_file, output, h: float = DEFAULT_H, tolerance_fk: float = TOLERANCE_FK,
               equality_band: float = EQUALITY_BAND, workers: int | None = None) -> VerificationReport:
    """Verify a corpus file and write ``report.csv`` and ``summary.json`` into ``output``."""
    entries = load_corpus(corpus_file)
    report = verify_entries(entries, h, tolerance_fk, equality_band, workers)
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / "report.csv")
    report.write_summary(out / "summary.json")
    return report


def format_real(x: float) -> str:
    return "nan" if math.isnan(x) else format(x, ".17g")
