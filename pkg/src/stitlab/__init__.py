"""Workbench for the STIT logic of imagination.

Formulas, finite imagination models and their validation, the
satisfaction relation, a Hilbert-style proof checker for the axiom system
L, bounded countermodel search and soundness fuzzing.
"""

from .formula import desugar, parse, subformulas, to_text
from .generate import BoundsTooLarge, ModelBounds, enumerate_models, random_model
from .model import (ImaginationModel, Point, TreeOrder, build_sigma_model,
                    compute_histories, load_model, validate)
from .proof import check_axiom, check_proof, parse_proof
from .search import find_countermodel
from .semantics import extension, satisfies, valid_in_model

__version__ = "0.1.0"

__all__ = [
    "BoundsTooLarge", "ImaginationModel", "ModelBounds", "Point", "TreeOrder",
    "build_sigma_model", "check_axiom", "check_proof", "compute_histories",
    "desugar", "enumerate_models", "extension", "find_countermodel", "load_model",
    "parse", "parse_proof", "random_model", "satisfies", "subformulas", "to_text",
    "valid_in_model", "validate",
]
