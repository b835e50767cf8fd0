"""Accuracy metrics of approximate smoothing moments against a reference method."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sun import MomentSummary


def _log_sd_diff(sd, ref_sd):
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.log(sd) - np.log(ref_sd)
    return np.where(sd == ref_sd, 0.0, d)


def compare_summaries(reference: MomentSummary, other: MomentSummary, p: int) -> dict:
    """Per-coordinate averages over time of |mean diff|, |log-sd diff| and signed log-sd diff.

    A negative ``log_sd_bias`` means ``other`` is too concentrated.
    """
    ref_mean, ref_sd = reference.by_time(p)
    mean, sd = other.by_time(p)
    if mean.shape != ref_mean.shape:
        raise ValueError("summaries cover different models")
    dlog = _log_sd_diff(sd, ref_sd)
    return {
        "mean_abs_diff": np.mean(np.abs(mean - ref_mean), axis=0).tolist(),
        "log_sd_abs_diff": np.mean(np.abs(dlog), axis=0).tolist(),
        "log_sd_bias": np.mean(dlog, axis=0).tolist(),
    }


@dataclass
class ComparisonReport:
    reference: str
    metrics: dict
    wall_times: dict
    diagnostics: dict = field(default_factory=dict)

    def accuracy_doc(self):
        """Reproducible part of the report (no timings)."""
        return {"reference": self.reference, "metrics": self.metrics, "diagnostics": self.diagnostics}


def build_report(summaries: dict, reference: str, p: int) -> ComparisonReport:
    ref = summaries[reference]
    metrics = {name: compare_summaries(ref, s, p) for name, s in summaries.items() if name != reference}
    return ComparisonReport(
        reference=reference,
        metrics=metrics,
        wall_times={name: s.wall_time_seconds for name, s in summaries.items()},
        diagnostics={name: s.diagnostics for name, s in summaries.items()},
    )
