"""Embedding and annotation exporter for the requirement-pair pipeline."""
from .backends import CheckpointError
from .export import DEFAULT_CHECKPOINTS, ExportError, ExportJob, export

__version__ = "0.1.0"
