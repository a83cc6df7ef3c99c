from .correlation import CorrelationRecord, feature_label_correlation, point_biserial
from .enrichment import (
    EnrichmentRecord,
    GoAnnotation,
    bh_adjust,
    enrich,
    hypergeom_tail,
    read_annotations,
    read_gene_set,
    write_enrichment,
)

__all__ = [
    "CorrelationRecord", "EnrichmentRecord", "GoAnnotation", "bh_adjust", "enrich",
    "feature_label_correlation", "hypergeom_tail", "point_biserial", "read_annotations",
    "read_gene_set", "write_enrichment",
]
