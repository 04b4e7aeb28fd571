"""Sensing time and companion hazard-perception metrics from gaze, detection and telemetry streams."""

from .config import RunConfig
from .events import Exclusion, Override, TrialEvents, apply_overrides, classify
from .ingestion import GROUPS, SyncedTrial, TrialManifest, align, load_trial, parse_manifest
from .metrics import TrialMetrics, type_b_uncertainty
from .pipeline import StatReport, analyze_trial, process_manifest, process_manifests, run_cohort
from .synthgen import CohortSpec, ScenarioSpec, generate_cohort, generate_trial

__all__ = [
    "GROUPS", "CohortSpec", "Exclusion", "Override", "RunConfig", "ScenarioSpec", "StatReport",
    "SyncedTrial", "TrialEvents", "TrialManifest", "TrialMetrics", "align", "analyze_trial",
    "apply_overrides", "classify", "generate_cohort", "generate_trial", "load_trial",
    "parse_manifest", "process_manifest", "process_manifests", "run_cohort", "type_b_uncertainty",
]
