"""Hybrid logit / neural-network discrete choice models (C++ core)."""

from ._lmnl import (
    BinaryScenario,
    ChoiceDataset,
    LmnlError,
    Model,
    ModelDef,
    TrainConfig,
    binary_lmnl,
    binary_logit,
    feature_impact,
    fit,
    gen_binary,
    gen_correlated,
    gen_guevara,
    head_split,
    load_csv,
    load_model,
    load_optima,
    load_swissmetro,
    optima_model,
    split,
    swissmetro_model,
    write_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
