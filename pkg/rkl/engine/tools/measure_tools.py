"""Ensemble measurement tools"""

import json
import logging
from pathlib import Path
from typing import Optional

from tabulate import tabulate

from rkl.engine.experiments import (
    load_config,
    run_ensemble,
    write_ensemble_csv,
    write_metadata,
)
from rkl.engine.models import EnsembleResult

logger = logging.getLogger(__name__)


def summarize_ensemble(result: EnsembleResult) -> dict:
    counts: dict = {}
    for term in result.terminations:
        counts[term.value] = counts.get(term.value, 0) + 1
    return {
        "matrix": result.config.matrix,
        "solver": result.config.solver.value,
        "trials": result.config.trials,
        "theoretical_rho": result.theoretical_rho,
        "bounded": result.bounded,
        "max_observed_rho_tail": result.max_observed_rho_tail,
        "bound_violations": result.bound_violations,
        "terminations": counts,
    }


def render_summary(summary: dict, format: str = "table") -> str:
    if format == "json":
        return json.dumps(summary, indent=2)
    rows = [
        ["Matrix", summary["matrix"]],
        ["Solver", summary["solver"]],
        ["Trials", summary["trials"]],
        ["rho*", f"{summary['theoretical_rho']:.6f}" + ("" if summary["bounded"] else " (no bound)")],
        ["Max tail rho", f"{summary['max_observed_rho_tail']:.6f}"],
        ["Bound violations", summary["bound_violations"]],
        ["Terminations", ", ".join(f"{k}={v}" for k, v in sorted(summary["terminations"].items()))],
    ]
    return tabulate(rows, tablefmt="simple")


def measure_impl(
    config_path: Path, out_dir: Path, threads: Optional[int] = None, format: str = "table"
) -> str:
    """Run the ensemble described by a key=value config file

    Writes <out_dir>/<config stem>.csv and <config stem>.json.

    Args:
        config_path: Ensemble config (key=value)
        out_dir: Output directory
        threads: Worker threads when the config does not set them
        format: Output format ('table' or 'json')

    Returns:
        Rendered ensemble summary with the written file paths
    """
    cfg = load_config(config_path)
    result = run_ensemble(cfg, threads=threads)
    stem = Path(config_path).stem
    csv_path = write_ensemble_csv(result, out_dir / f"{stem}.csv")
    meta_path = write_metadata(result, out_dir / f"{stem}.json")

    summary = summarize_ensemble(result)
    summary["files_created"] = [str(csv_path), str(meta_path)]
    text = render_summary(summary, format)
    if format == "json":
        return text
    return text + "\n\n" + "\n".join(f"Wrote {p}" for p in summary["files_created"])
