from .bundle import (
    DEFAULT_BUNDLE_PATH,
    ModelBundle,
    ScenarioPreset,
    bundle_from_dict,
    load_bundle,
    load_default_bundle,
    run_scenario,
)
from .calibrate import CalibrationReport, calibrate
from .pipeline import (
    BinSpec,
    deterministic_sum_cpt,
    discretize,
    ingest_block_witness_csv,
    quantile_bins,
)

__all__ = [
    "DEFAULT_BUNDLE_PATH",
    "ModelBundle",
    "ScenarioPreset",
    "BinSpec",
    "CalibrationReport",
    "bundle_from_dict",
    "calibrate",
    "deterministic_sum_cpt",
    "discretize",
    "ingest_block_witness_csv",
    "load_bundle",
    "load_default_bundle",
    "quantile_bins",
    "run_scenario",
]
