"""Disease-phenotype detection from expression tables.

Synthetic data generation, preprocessing, an MLP classifier, a stacking
ensemble, probability-based k-means and gene-ontology enrichment.
"""

from .dataset import CsvSchema, Dataset, ScalerParams, SplitResult, apply_scaler, fit_scaler, load_csv, split
from .synthgen import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "CsvSchema", "Dataset", "ScalerParams", "SplitResult", "SynthConfig",
    "apply_scaler", "fit_scaler", "generate", "load_csv", "split",
]
