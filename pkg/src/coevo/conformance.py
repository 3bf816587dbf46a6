"""Conformance checking of models against a metamodel set."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

from .errors import MetamodelFormatError, ResolveError
from .metamodel import ATTRIBUTE_TYPES, Class, Enumeration, MetamodelSet

if TYPE_CHECKING:
    from .model import Model

UNKNOWN_CLASS = "unknown-class"
ABSTRACT_INSTANTIATION = "abstract-instantiation"
MISSING_SLOT_TYPE = "missing-slot-type"
MULTIPLICITY_LOWER = "multiplicity-lower"
MULTIPLICITY_UPPER = "multiplicity-upper"
DANGLING_REFERENCE = "dangling-reference"
CONTAINMENT_VIOLATION = "containment-violation"

# Rules the transaction mechanism may suspend while a coupled operation runs.
SOFTENED_RULES = frozenset(
    {MULTIPLICITY_LOWER, DANGLING_REFERENCE, ABSTRACT_INSTANTIATION})


@dataclass(frozen=True)
class ConformanceViolation:
    element: str
    rule: str
    message: str
    feature: Optional[str] = None  # fully qualified feature name when applicable


def _attribute_value_ok(value, value_type: str, metamodels: MetamodelSet) -> bool:
    if value_type == "string":
        return isinstance(value, str)
    if value_type == "boolean":
        return isinstance(value, bool)
    if value_type == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    enum = metamodels.find(value_type)
    return isinstance(enum, Enumeration) and value in enum.literals


def check_conformance(model: "Model",
                      metamodels: MetamodelSet | None = None) -> list[ConformanceViolation]:
    """Return every conformance violation of ``model``; empty list means conforming.

    The containment forest and slot typing are recomputed from the raw
    element table so the checker stays independent of the model's
    incrementally maintained navigation structures.
    """
    mms = metamodels if metamodels is not None else model.metamodels
    out: list[ConformanceViolation] = []

    for el in model.elements.values():
        try:
            info = mms.info(el.class_fqn)
        except (ResolveError, MetamodelFormatError):
            out.append(ConformanceViolation(
                el.id, UNKNOWN_CLASS, f"element {el.id} has unknown class {el.class_fqn}"))
            continue
        if info.cls.abstract:
            out.append(ConformanceViolation(
                el.id, ABSTRACT_INSTANTIATION,
                f"element {el.id} instantiates abstract class {el.class_fqn}"))
        for name, value in el.slots.items():
            feat = info.all_features.get(name)
            if feat is None:
                out.append(ConformanceViolation(
                    el.id, MISSING_SLOT_TYPE,
                    f"element {el.id} has slot for unknown feature "
                    f"{el.class_fqn}.{name}"))
                continue
            if feat.kind == "attribute":
                if isinstance(value, list) or not _attribute_value_ok(
                        value, feat.value_type, mms):
                    out.append(ConformanceViolation(
                        el.id, MISSING_SLOT_TYPE,
                        f"slot {feat.fqn} of {el.id} holds {value!r}, "
                        f"expected {feat.value_type}", feat.fqn))
                continue
            if not isinstance(value, list):
                out.append(ConformanceViolation(
                    el.id, MISSING_SLOT_TYPE,
                    f"reference slot {feat.fqn} of {el.id} must hold an id list",
                    feat.fqn))
                continue
            for target_id in value:
                target = model.elements.get(target_id)
                if target is None:
                    out.append(ConformanceViolation(
                        el.id, DANGLING_REFERENCE,
                        f"slot {feat.fqn} of {el.id} references missing "
                        f"element {target_id}", feat.fqn))
                    continue
                try:
                    if not mms.specializes(target.class_fqn, feat.target):
                        out.append(ConformanceViolation(
                            el.id, MISSING_SLOT_TYPE,
                            f"slot {feat.fqn} of {el.id} references {target_id} "
                            f"of class {target.class_fqn}, expected {feat.target}",
                            feat.fqn))
                except (ResolveError, MetamodelFormatError):
                    pass  # target class errors reported on the target itself
        # multiplicities over all (also unset) features
        for feat in info.all_features.values():
            value = el.slots.get(feat.name)
            if feat.kind == "attribute":
                count = 0 if value is None else 1
            else:
                count = len(value) if isinstance(value, list) else 0
            if count < feat.lower:
                out.append(ConformanceViolation(
                    el.id, MULTIPLICITY_LOWER,
                    f"slot {feat.fqn} of {el.id} has {count} value(s), "
                    f"lower bound is {feat.lower}", feat.fqn))
            if feat.upper is not None and count > feat.upper:
                out.append(ConformanceViolation(
                    el.id, MULTIPLICITY_UPPER,
                    f"slot {feat.fqn} of {el.id} has {count} value(s), "
                    f"upper bound is {feat.upper}", feat.fqn))

    out.extend(_check_containment(model, mms))
    return out


def _check_containment(model: "Model", mms: MetamodelSet) -> list[ConformanceViolation]:
    out: list[ConformanceViolation] = []
    container: dict[str, str] = {}
    roots: set[str] = set()

    for res in model.resources:
        for rid in res.roots:
            if rid not in model.elements:
                out.append(ConformanceViolation(
                    rid, CONTAINMENT_VIOLATION,
                    f"resource {res.uri} lists unknown root {rid}"))
            elif rid in roots:
                out.append(ConformanceViolation(
                    rid, CONTAINMENT_VIOLATION, f"element {rid} is a root twice"))
            else:
                roots.add(rid)

    for el in model.elements.values():
        try:
            info = mms.info(el.class_fqn)
        except (ResolveError, MetamodelFormatError):
            continue
        for name, value in el.slots.items():
            feat = info.all_features.get(name)
            if feat is None or not feat.containment or not isinstance(value, list):
                continue
            for child in value:
                if child not in model.elements:
                    continue  # reported as dangling above
                if child in container or child in roots:
                    out.append(ConformanceViolation(
                        child, CONTAINMENT_VIOLATION,
                        f"element {child} has more than one container"))
                else:
                    container[child] = el.id

    for el in model.elements.values():
        if el.id not in container and el.id not in roots:
            out.append(ConformanceViolation(
                el.id, CONTAINMENT_VIOLATION,
                f"element {el.id} is neither a resource root nor contained"))

    # cycle detection over the recomputed parent map
    state: dict[str, int] = {}
    for start in container:
        if state.get(start):
            continue
        trail = []
        node: Optional[str] = start
        while node is not None and state.get(node, 0) == 0:
            state[node] = 1
            trail.append(node)
            node = container.get(node)
        if node is not None and state.get(node) == 1:
            out.append(ConformanceViolation(
                node, CONTAINMENT_VIOLATION,
                f"containment cycle through element {node}"))
        for n in trail:
            state[n] = 2

    return out
