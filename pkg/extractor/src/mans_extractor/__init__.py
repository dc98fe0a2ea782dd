"""Offline image-feature extraction for the mans engine."""

from .backbones import VectorFileBackbone, Vgg16Backbone, get_backbone
from .extract import ExtractStats, extract, pool_entity
from .manifest import ManifestError, read_manifest
from .mmkf import write_mmkf_atomic

__version__ = "0.1.0"

__all__ = [
    "ExtractStats", "ManifestError", "VectorFileBackbone", "Vgg16Backbone",
    "extract", "get_backbone", "pool_entity", "read_manifest",
    "write_mmkf_atomic",
]
