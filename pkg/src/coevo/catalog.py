"""Reusable coupled operations: parameterized, constraint-guarded refactorings.

Each operation bundles a metamodel adaptation with the model migration that
restores instance conformance.  Applicability constraints are evaluated over
the current bindings before anything runs; a constraint whose parameters are
not bound yet is skipped, which is what lets an operation browser give live
feedback while the user is still filling in the form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .errors import EngineError, HistoryError
from .metamodel import (ATTRIBUTE_TYPES, Class, Enumeration, Feature,
                        MetamodelSet)
from .model import Model

CLASS_REF = "class-ref"
FEATURE_REF = "feature-ref"
ENUM_REF = "enum-ref"
ELEMENT_REF = "element-ref"  # class, enum or feature
STRING = "string"
BOOLEAN = "boolean"


@dataclass(frozen=True)
class Parameter:
    name: str
    type: str


@dataclass(frozen=True)
class Constraint:
    id: str
    message: str
    requires: tuple[str, ...]
    predicate: Callable[[dict, MetamodelSet, Sequence[Model]], bool]

    def evaluate(self, bindings: dict, mms: MetamodelSet,
                 models: Sequence[Model]) -> Optional[bool]:
        """True/False verdict, or None when required parameters are unbound."""
        if any(p not in bindings for p in self.requires):
            return None
        try:
            return bool(self.predicate(bindings, mms, models))
        except EngineError:
            return False


class CatalogOperation:
    def __init__(self, name: str, parameters: list[Parameter],
                 constraints: list[Constraint],
                 adapt: Callable[[MetamodelSet, dict], None],
                 migrate: Optional[Callable[[Sequence[Model], MetamodelSet, dict], None]] = None):
        self.name = name
        self.parameters = parameters
        self.constraints = constraints
        self.adapt = adapt
        self.migrate = migrate or (lambda models, mms, bindings: None)

    def parameter(self, name: str) -> Optional[Parameter]:
        for p in self.parameters:
            if p.name == name:
                return p
        return None

    def validate_bindings(self, bindings: dict, mms: MetamodelSet) -> None:
        """Type-check the provided bindings against the parameter signature."""
        for name, value in list(bindings.items()):
            param = self.parameter(name)
            if param is None:
                raise HistoryError(f"{self.name}: unknown parameter {name!r}")
            if param.type == BOOLEAN:
                if isinstance(value, str) and value.lower() in ("true", "false"):
                    bindings[name] = value.lower() == "true"
                elif not isinstance(value, bool):
                    raise HistoryError(
                        f"{self.name}: parameter {name!r} expects a boolean")
                continue
            if not isinstance(value, str):
                raise HistoryError(
                    f"{self.name}: parameter {name!r} expects a string value")
            if param.type in (CLASS_REF, FEATURE_REF, ENUM_REF, ELEMENT_REF):
                element = mms.resolve(value)
                expected = {CLASS_REF: Class, FEATURE_REF: Feature,
                            ENUM_REF: Enumeration,
                            ELEMENT_REF: (Class, Enumeration, Feature)}[param.type]
                if not isinstance(element, expected):
                    raise HistoryError(
                        f"{self.name}: parameter {name!r} must name a {param.type}")

    def require_complete(self, bindings: dict) -> None:
        missing = [p.name for p in self.parameters if p.name not in bindings]
        if missing:
            raise HistoryError(
                f"{self.name}: missing parameter(s) {', '.join(missing)}")

    def evaluate_constraints(self, bindings: dict, mms: MetamodelSet,
                             models: Sequence[Model]):
        return [(c, c.evaluate(bindings, mms, models)) for c in self.constraints]

    def failed_constraints(self, bindings: dict, mms: MetamodelSet,
                           models: Sequence[Model]) -> list[str]:
        return [c.message for c, ok
                in self.evaluate_constraints(bindings, mms, models) if ok is False]

    def descriptor(self) -> dict:
        return {"name": self.name,
                "parameters": [{"name": p.name, "type": p.type}
                               for p in self.parameters],
                "constraints": [{"id": c.id, "message": c.message}
                                for c in self.constraints]}


_OPERATIONS: dict[str, CatalogOperation] = {}


def register_operation(op: CatalogOperation) -> CatalogOperation:
    if op.name in _OPERATIONS:
        raise HistoryError(f"operation {op.name!r} already registered")
    _OPERATIONS[op.name] = op
    return op


def get_operation(name: str) -> CatalogOperation:
    op = _OPERATIONS.get(name)
    if op is None:
        raise HistoryError(f"unknown operation {name!r}")
    return op


def list_descriptors() -> list[dict]:
    return [op.descriptor() for op in _OPERATIONS.values()]


# -- shared helpers ------------------------------------------------------------


def _instances_exist(class_fqn: str, models: Sequence[Model],
                     mms: MetamodelSet) -> bool:
    for model in models:
        for el in model.elements.values():
            try:
                if mms.specializes(el.class_fqn, class_fqn):
                    return True
            except Exception:
                continue
    return False


def _feature_name_fresh(class_fqn: str, name: str, mms: MetamodelSet) -> bool:
    for fqn in mms._hierarchy_of(class_fqn):
        if name in mms.info(fqn).all_features:
            return False
    return True


def _parse_bound(value: str, what: str) -> Optional[int]:
    if value == "*":
        return None
    try:
        n = int(value)
    except ValueError:
        raise HistoryError(f"{what} bound must be an integer or '*', got {value!r}")
    return n


def _direct_subclasses(class_fqn: str, mms: MetamodelSet) -> list[Class]:
    return [c for c in mms.classes() if class_fqn in c.super_types]


def _enum_name_for(attribute_name: str) -> str:
    return attribute_name[:1].upper() + attribute_name[1:]


# -- rename ---------------------------------------------------------------------


def _rename_unique(b: dict, mms: MetamodelSet, models) -> bool:
    element = mms.resolve(b["element"])
    new_name = b["newName"]
    if isinstance(element, Feature):
        return _feature_name_fresh(element.owner, new_name, mms)
    return mms.package_of(element.fqn).classifier(new_name) is None


def _rename_adapt(mms: MetamodelSet, b: dict) -> None:
    mms.rename(b["element"], b["newName"])


def _rename_migrate(models, mms: MetamodelSet, b: dict) -> None:
    # runs after the adaptation, so the old FQN no longer resolves
    old_fqn = b["element"]
    parts = old_fqn.split(".")
    if len(parts) == 3:
        new_fqn = ".".join(parts[:2] + [b["newName"]])
        if not isinstance(mms.find(new_fqn), Class):
            return  # enumerations live in slots by literal value, nothing moves
        for model in models:
            for el in list(model.elements.values()):
                if el.class_fqn == old_fqn:
                    model.retype(el.id, new_fqn)
        return
    owner_fqn, old_name = old_fqn.rsplit(".", 1)
    new_name = b["newName"]
    for model in models:
        affected = []
        for el in model.elements.values():
            if old_name in el.slots and mms.find(el.class_fqn) is not None \
                    and mms.specializes(el.class_fqn, owner_fqn):
                affected.append((el, el.slots[old_name]))
        for el, _value in affected:
            del el.slots[old_name]
        model._touch_structure()
        for el, value in affected:
            model.set_slot(el.id, new_name, value)


rename_op = register_operation(CatalogOperation(
    "rename",
    [Parameter("element", ELEMENT_REF), Parameter("newName", STRING)],
    [Constraint("R1", "new name must be unique among siblings",
                ("element", "newName"), _rename_unique)],
    _rename_adapt, _rename_migrate))


# -- createClass ------------------------------------------------------------------


def _super_list(b: dict) -> list[str]:
    raw = b.get("superTypes", "")
    return [s.strip() for s in raw.split(",") if s.strip()]


def _cc_package(b, mms, models) -> bool:
    try:
        mms.package_of(b["package"])
        return True
    except EngineError:
        return False


def _cc_unique(b, mms, models) -> bool:
    try:
        pkg = mms.package_of(b["package"])
    except EngineError:
        return True  # reported by the package constraint
    return pkg.classifier(b["name"]) is None


def _cc_supers(b, mms, models) -> bool:
    return all(isinstance(mms.find(s), Class) for s in _super_list(b))


def _cc_adapt(mms: MetamodelSet, b: dict) -> None:
    mms.add_classifier(b["package"], Class(
        name=b["name"], abstract=bool(b["abstract"]), super_types=_super_list(b)))


register_operation(CatalogOperation(
    "createClass",
    [Parameter("package", STRING), Parameter("name", STRING),
     Parameter("abstract", BOOLEAN), Parameter("superTypes", STRING)],
    [Constraint("CC1", "package must exist", ("package",), _cc_package),
     Constraint("CC2", "classifier name must be unique in the package",
                ("package", "name"), _cc_unique),
     Constraint("CC3", "every supertype must name an existing class",
                ("superTypes",), _cc_supers)],
    _cc_adapt))


# -- createAttribute / createReference ------------------------------------------------


def _fresh_in_class(b, mms, models) -> bool:
    return _feature_name_fresh(b["class"], b["name"], mms)


def _lower_zero_when_populated(b, mms, models) -> bool:
    if b["lower"] == "0":
        return True
    return not _instances_exist(b["class"], models, mms)


def _ca_type(b, mms, models) -> bool:
    vt = b["valueType"]
    return vt in ATTRIBUTE_TYPES or isinstance(mms.find(vt), Enumeration)


def _ca_bounds(b, mms, models) -> bool:
    return b["lower"] in ("0", "1") and b["upper"] == "1"


def _ca_adapt(mms: MetamodelSet, b: dict) -> None:
    mms.add_feature(b["class"], Feature(
        name=b["name"], kind="attribute", value_type=b["valueType"],
        lower=int(b["lower"]), upper=1))


register_operation(CatalogOperation(
    "createAttribute",
    [Parameter("class", CLASS_REF), Parameter("name", STRING),
     Parameter("valueType", STRING), Parameter("lower", STRING),
     Parameter("upper", STRING)],
    [Constraint("CA1", "feature name must be unique in the class hierarchy",
                ("class", "name"), _fresh_in_class),
     Constraint("CA2", "value type must be string, boolean, integer or an enumeration",
                ("valueType",), _ca_type),
     Constraint("CA3", "attribute bounds must be 0..1 or 1..1",
                ("lower", "upper"), _ca_bounds),
     Constraint("CA4", "lower bound must be 0 while instances of the class exist",
                ("class", "lower"), _lower_zero_when_populated)],
    _ca_adapt))


def _cr_bounds(b, mms, models) -> bool:
    try:
        lower = _parse_bound(b["lower"], "lower")
        upper = _parse_bound(b["upper"], "upper")
    except HistoryError:
        return False
    if lower is None or lower < 0:
        return False
    return upper is None or (upper >= 1 and lower <= upper)


def _cr_adapt(mms: MetamodelSet, b: dict) -> None:
    mms.add_feature(b["class"], Feature(
        name=b["name"], kind="reference", target=b["target"],
        containment=bool(b["containment"]),
        lower=int(b["lower"]), upper=_parse_bound(b["upper"], "upper")))


register_operation(CatalogOperation(
    "createReference",
    [Parameter("class", CLASS_REF), Parameter("name", STRING),
     Parameter("target", CLASS_REF), Parameter("containment", BOOLEAN),
     Parameter("lower", STRING), Parameter("upper", STRING)],
    [Constraint("CR1", "feature name must be unique in the class hierarchy",
                ("class", "name"), _fresh_in_class),
     Constraint("CR2", "multiplicity bounds must form a valid range",
                ("lower", "upper"), _cr_bounds),
     Constraint("CR3", "lower bound must be 0 while instances of the class exist",
                ("class", "lower"), _lower_zero_when_populated)],
    _cr_adapt))


# -- deleteFeature ----------------------------------------------------------------


def _df_adapt(mms: MetamodelSet, b: dict) -> None:
    mms.remove_feature(b["feature"])


def _df_migrate(models, mms: MetamodelSet, b: dict) -> None:
    feature_fqn = b["feature"]
    owner_fqn, name = feature_fqn.rsplit(".", 1)
    for model in models:
        affected = [el.id for el in model.elements.values()
                    if name in el.slots
                    and mms.find(el.class_fqn) is not None
                    and mms.specializes(el.class_fqn, owner_fqn)]
        for eid in affected:
            if eid not in model.elements:
                continue  # removed with an earlier subtree
            el = model.elements[eid]
            value = el.slots.get(name)
            if isinstance(value, list):
                # deleting a containment feature deletes the contained subtrees
                for child in list(value):
                    if (child in model.elements
                            and model._container.get(child) == (eid, name)):
                        model.delete_element(child)
            if eid in model.elements:
                model.clear_slot(eid, name)


register_operation(CatalogOperation(
    "deleteFeature",
    [Parameter("feature", FEATURE_REF)],
    [],
    _df_adapt, _df_migrate))


# -- enumToSubclasses ----------------------------------------------------------------


def _e2s_feature(b: dict, mms: MetamodelSet) -> Feature:
    feat = mms.resolve(b["attribute"])
    if not isinstance(feat, Feature):
        raise HistoryError(f"{b['attribute']} is not a feature")
    return feat


def _e2s_enum_typed(b, mms, models) -> bool:
    feat = _e2s_feature(b, mms)
    return feat.kind == "attribute" and isinstance(
        mms.find(feat.value_type or ""), Enumeration)


def _e2s_belongs(b, mms, models) -> bool:
    return _e2s_feature(b, mms).owner == b["class"]


def _e2s_no_clash(b, mms, models) -> bool:
    feat = _e2s_feature(b, mms)
    enum = mms.find(feat.value_type or "")
    if not isinstance(enum, Enumeration):
        return True  # C1 reports the real problem
    pkg = mms.package_of(b["class"])
    return all(pkg.classifier(lit) is None for lit in enum.literals)


def _e2s_single_valued(b, mms, models) -> bool:
    feat = _e2s_feature(b, mms)
    return feat.lower == 1 and feat.upper == 1


def _e2s_adapt(mms: MetamodelSet, b: dict) -> None:
    class_fqn = b["class"]
    feat = _e2s_feature(b, mms)
    enum = mms.resolve(feat.value_type)
    package_fqn = mms.resolve(class_fqn).owner
    for literal in enum.literals:
        mms.add_classifier(package_fqn, Class(
            name=literal, abstract=False, super_types=[class_fqn]))
    mms.remove_feature(feat.fqn)
    mms.set_abstract(class_fqn, True)
    if not mms._references_to(enum.fqn):
        mms.remove_classifier(enum.fqn)


def _e2s_migrate(models, mms: MetamodelSet, b: dict) -> None:
    class_fqn = b["class"]
    attr_name = b["attribute"].rsplit(".", 1)[1]
    package_fqn = mms.resolve(class_fqn).owner
    for model in models:
        for el in list(model.elements.values()):
            if el.class_fqn == class_fqn:
                literal = el.slots.get(attr_name)
                if not isinstance(literal, str):
                    raise HistoryError(
                        f"instance {el.id} of {class_fqn} has no literal value "
                        f"for {attr_name!r}")
                model.clear_slot(el.id, attr_name)
                model.retype(el.id, f"{package_fqn}.{literal}")
            elif attr_name in el.slots and mms.find(el.class_fqn) is not None \
                    and mms.specializes(el.class_fqn, class_fqn):
                model.clear_slot(el.id, attr_name)


register_operation(CatalogOperation(
    "enumToSubclasses",
    [Parameter("class", CLASS_REF), Parameter("attribute", FEATURE_REF)],
    [Constraint("C1", "attribute must have an enumeration type",
                ("attribute",), _e2s_enum_typed),
     Constraint("C2", "attribute must belong to the class",
                ("class", "attribute"), _e2s_belongs),
     Constraint("C3", "a literal name clashes with an existing classifier",
                ("class", "attribute"), _e2s_no_clash),
     Constraint("C4", "attribute multiplicity must be 1..1",
                ("attribute",), _e2s_single_valued)],
    _e2s_adapt, _e2s_migrate))


# -- subClassesToEnumeration -----------------------------------------------------------


def _s2e_abstract(b, mms, models) -> bool:
    return mms.resolve(b["class"]).abstract


def _s2e_has_subclasses(b, mms, models) -> bool:
    return bool(_direct_subclasses(b["class"], mms))


def _s2e_subclasses_plain(b, mms, models) -> bool:
    for sub in _direct_subclasses(b["class"], mms):
        if sub.abstract or sub.features or _direct_subclasses(sub.fqn, mms):
            return False
    return True


def _s2e_fresh(b, mms, models) -> bool:
    name = b["attributeName"]
    if not _feature_name_fresh(b["class"], name, mms):
        return False
    return mms.package_of(b["class"]).classifier(_enum_name_for(name)) is None


def _s2e_unreferenced(b, mms, models) -> bool:
    subs = {sub.fqn for sub in _direct_subclasses(b["class"], mms)}
    for c in mms.classes():
        if c.fqn in subs:
            continue
        for f in c.features:
            if f.target in subs:
                return False
    return True


def _s2e_adapt(mms: MetamodelSet, b: dict) -> None:
    class_fqn = b["class"]
    attr_name = b["attributeName"]
    subclasses = _direct_subclasses(class_fqn, mms)
    names = [sub.name for sub in subclasses]
    if len(set(names)) != len(names):
        raise HistoryError(f"subclasses of {class_fqn} have duplicate names")
    package_fqn = mms.resolve(class_fqn).owner
    enum = Enumeration(name=_enum_name_for(attr_name), literals=names)
    mms.add_classifier(package_fqn, enum)
    for sub in subclasses:
        mms.remove_classifier(sub.fqn)
    mms.set_abstract(class_fqn, False)
    mms.add_feature(class_fqn, Feature(
        name=attr_name, kind="attribute", value_type=f"{package_fqn}.{enum.name}",
        lower=1, upper=1))


def _s2e_migrate(models, mms: MetamodelSet, b: dict) -> None:
    # the subclasses are deleted by now; instances are recognized by their
    # retired class FQN ending in a literal name
    class_fqn = b["class"]
    attr_name = b["attributeName"]
    attribute = mms.resolve(class_fqn).feature(attr_name)
    literals = set(mms.resolve(attribute.value_type).literals)
    for model in models:
        for el in list(model.elements.values()):
            name = el.class_fqn.rsplit(".", 1)[-1]
            if name in literals and mms.find(el.class_fqn) is None:
                model.retype(el.id, class_fqn)
                model.set_slot(el.id, attr_name, name)


register_operation(CatalogOperation(
    "subClassesToEnumeration",
    [Parameter("class", CLASS_REF), Parameter("attributeName", STRING)],
    [Constraint("S1", "class must be abstract", ("class",), _s2e_abstract),
     Constraint("S2", "class must have at least one subclass",
                ("class",), _s2e_has_subclasses),
     Constraint("S3", "every subclass must be concrete, featureless and a leaf",
                ("class",), _s2e_subclasses_plain),
     Constraint("S4", "attribute and enumeration names must be fresh",
                ("class", "attributeName"), _s2e_fresh),
     Constraint("S5", "subclasses must not be the target of other references",
                ("class",), _s2e_unreferenced)],
    _s2e_adapt, _s2e_migrate))
