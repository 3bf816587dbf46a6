"""Composition of the case history and the end-to-end extraction run."""

from __future__ import annotations

from typing import Optional

from ..errors import MigrationError
from ..history import (History, apply_operation, create_history, migrate,
                       record_custom, release)
from ..model import Model, model_from_doc
from .metamodels import case_metamodels
from .migrations import CASE_REGISTRY, SM_RESOURCE


def build_case_history() -> History:
    """The recorded coupled evolution that performs the extraction.

    Trace associations are created first by reusable operations, the four
    extraction steps and the timing step run as custom coupled operations,
    and the traces are deleted again at the end; the whole sequence is
    sealed into one release.
    """
    history = create_history(case_metamodels(), CASE_REGISTRY)
    apply_operation(history, [], "createReference", {
        "class": "sm.sm.State", "name": "class", "target": "java.java.Class",
        "containment": False, "lower": "0", "upper": "1"})
    record_custom(history, [], "ExtractStates")
    apply_operation(history, [], "createReference", {
        "class": "sm.sm.Transition", "name": "reference",
        "target": "java.java.ElementReference",
        "containment": False, "lower": "0", "upper": "1"})
    record_custom(history, [], "ExtractTransitions")
    record_custom(history, [], "ExtractTriggers")
    record_custom(history, [], "ExtractActions")
    record_custom(history, [], "PrintTime")
    apply_operation(history, [], "deleteFeature", {"feature": "sm.sm.State.class"})
    apply_operation(history, [], "deleteFeature",
                    {"feature": "sm.sm.Transition.reference"})
    release(history)
    return history


def extract_statemachine(model: Model) -> Model:
    """A standalone model holding only the extracted statemachine resource."""
    res = model.resource(SM_RESOURCE)
    if res is None:
        raise MigrationError("model has no statemachine resource")
    element_ids = []
    for root in res.roots:
        element_ids.extend(model.subtree_preorder(root))
    doc = model.to_doc()
    keep = set(element_ids)
    doc = {"resources": [{"uri": SM_RESOURCE, "roots": list(res.roots)}],
           "elements": [e for e in doc["elements"] if e["id"] in keep]}
    return model_from_doc(doc, case_metamodels())


def run_case(model: Model, report: Optional[list[str]] = None) -> tuple[Model, list[str]]:
    """Run the full case history over a java model; returns (statemachine, report)."""
    sink = report if report is not None else []
    migrated = migrate([model], build_case_history(), report=sink)[0]
    return extract_statemachine(migrated), sink
