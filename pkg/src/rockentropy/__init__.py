"""Entropy-based textural heterogeneity coefficients for 3D grayscale volumes."""

__version__ = "0.1.0"

from .attributes import AttributeKind, AttributeTable, compute_attribute, compute_attribute_table, standardize
from .entropy import EntropyRecord, KdeConfig, discrete_entropy, image_entropy, kde_entropy
from .partition import SubcubeGrid, plan_subcubes, subcube_voxels
from .ranking import HeterogeneityCoefficient, quantile_probabilities, rank_dataset, rank_many, rank_volumes
from .volume_io import Manifest, Voi, Volume, crop_voi, high_density_fraction, load_volume, read_manifest

__all__ = [
    "AttributeKind", "AttributeTable", "compute_attribute", "compute_attribute_table", "standardize",
    "EntropyRecord", "KdeConfig", "discrete_entropy", "image_entropy", "kde_entropy",
    "SubcubeGrid", "plan_subcubes", "subcube_voxels",
    "HeterogeneityCoefficient", "quantile_probabilities", "rank_dataset", "rank_many", "rank_volumes",
    "Manifest", "Voi", "Volume", "crop_voi", "high_density_fraction", "load_volume", "read_manifest",
]
