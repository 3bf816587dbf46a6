"""coevo: coupled evolution of metamodels and models.

Metamodel adaptations are recorded as a history of coupled operations
(reusable, constraint-checked refactorings and custom migrations) that can
be deterministically replayed to migrate models, with transactional
conformance guarantees at every operation boundary.
"""

from .catalog import get_operation, list_descriptors
from .conformance import ConformanceViolation, check_conformance
from .errors import (ConstraintViolation, EngineError, HistoryError,
                     MetamodelFormatError, MigrationError, ModelEditError,
                     ModelFormatError, ResolveError, TransactionError)
from .history import (ChangeRecord, History, MigrationContext,
                      MigrationRegistry, PrimitiveChange, apply_operation,
                      create_history, load_history, migrate, record_custom,
                      release, save_history)
from .metamodel import (Class, Enumeration, Feature, Metamodel, MetamodelSet,
                        Package, load_metamodel, metamodels_equivalent,
                        save_metamodel)
from .model import (Model, canonical_json, load_model, model_from_doc,
                    models_isomorphic, save_model)
from .transactions import execute_transaction

__version__ = "0.1.0"

__all__ = [
    "ChangeRecord",
    "Class",
    "ConformanceViolation",
    "ConstraintViolation",
    "EngineError",
    "Enumeration",
    "Feature",
    "History",
    "HistoryError",
    "Metamodel",
    "MetamodelFormatError",
    "MetamodelSet",
    "MigrationContext",
    "MigrationError",
    "MigrationRegistry",
    "Model",
    "ModelEditError",
    "ModelFormatError",
    "Package",
    "PrimitiveChange",
    "ResolveError",
    "TransactionError",
    "apply_operation",
    "canonical_json",
    "check_conformance",
    "create_history",
    "execute_transaction",
    "get_operation",
    "list_descriptors",
    "load_history",
    "load_metamodel",
    "load_model",
    "metamodels_equivalent",
    "migrate",
    "model_from_doc",
    "models_isomorphic",
    "record_custom",
    "release",
    "save_history",
    "save_metamodel",
    "save_model",
]
