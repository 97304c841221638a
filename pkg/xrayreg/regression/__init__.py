# xrayreg/regression/__init__.py
"""
Zone/group regressors: training-set synthesis, bank training and hierarchical registration.
"""
from .zones import Zone, ZoneGrid, zone_of
from .groups import GROUP_MEMBERS, GROUP_ORDER, FULL_HALF_RANGES, GroupSpec, default_group_specs
from .synthesis import NominalSpec, Dataset, synthesize_sample, synthesize_dataset, save_dataset, load_dataset, sample_rng
from .bank import RegressorModel, RegressorBank, train_bank, model_seed
from .regressor import GroupStep, MultipassResult, regress_once, regress_multipass

__all__ = [
    "Zone",
    "ZoneGrid",
    "zone_of",
    "GROUP_MEMBERS",
    "GROUP_ORDER",
    "FULL_HALF_RANGES",
    "GroupSpec",
    "default_group_specs",
    "NominalSpec",
    "Dataset",
    "synthesize_sample",
    "synthesize_dataset",
    "save_dataset",
    "load_dataset",
    "sample_rng",
    "RegressorModel",
    "RegressorBank",
    "train_bank",
    "model_seed",
    "GroupStep",
    "MultipassResult",
    "regress_once",
    "regress_multipass",
]
