"""Temporal topic dynamics and leader/follower analysis of candidate text corpora."""

from .graph import Partition, WeightedGraph, exhaustive_best_partition, jaccard, louvain, modularity, pearson
from .ingest import Document, TimeWindow, bucket, load_documents, tokenize
from .pipeline import PipelineConfig, report, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "Document", "Partition", "PipelineConfig", "TimeWindow", "WeightedGraph", "bucket",
    "exhaustive_best_partition", "jaccard", "load_documents", "louvain", "modularity", "pearson",
    "report", "run_pipeline", "tokenize",
]
