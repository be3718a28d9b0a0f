"""Spectral dynamics of the radial Euler-alignment system."""

from ._ema import (
    EnsembleResult,
    Snapshot,
    Verdict,
    blowup_time_closed_form,
    classify_point,
    classify_profile,
    criteria,
    flow_factor,
    integrate,
    presets,
    run_criterion,
    simulate,
    sweep,
    threshold_margin,
)

__all__ = [
    "EnsembleResult",
    "Snapshot",
    "Verdict",
    "blowup_time_closed_form",
    "classify_point",
    "classify_profile",
    "criteria",
    "flow_factor",
    "integrate",
    "presets",
    "run_criterion",
    "simulate",
    "sweep",
    "threshold_margin",
]
