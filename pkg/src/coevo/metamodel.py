"""Metamodel structures: packages of classes, enumerations and features.

All cross-references between metamodel elements (supertypes, reference
targets, enum-typed attributes) are stored as fully qualified names of the
form ``metamodel.package.Classifier``.  That keeps the structures value-like,
so snapshots and rollback reduce to document (de)serialization, at the cost
of a rewrite sweep when a classifier is renamed.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .errors import MetamodelFormatError, ResolveError

IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

ATTRIBUTE_TYPES = ("string", "boolean", "integer")

UNBOUNDED = None  # upper bound marker; serialized as "*"


@dataclass
class Feature:
    """An attribute or reference declared by a class.

    ``owner`` is the fully qualified name of the declaring class and is
    maintained by the :class:`MetamodelSet` mutation helpers; it never
    appears in serialized documents.
    """

    name: str
    kind: str  # "attribute" | "reference"
    value_type: Optional[str] = None  # attributes: string/boolean/integer or enum FQN
    target: Optional[str] = None  # references: class FQN
    containment: bool = False
    lower: int = 0
    upper: Optional[int] = 1  # None = unbounded
    owner: str = field(default="", compare=False)

    @property
    def fqn(self) -> str:
        return f"{self.owner}.{self.name}"

    @property
    def is_reference(self) -> bool:
        return self.kind == "reference"

    def to_doc(self) -> dict:
        doc: dict = {"kind": self.kind, "name": self.name, "lower": self.lower,
                     "upper": "*" if self.upper is None else self.upper}
        if self.kind == "attribute":
            doc["type"] = self.value_type
        else:
            doc["target"] = self.target
            doc["containment"] = self.containment
        return doc


@dataclass
class Class:
    name: str
    abstract: bool = False
    super_types: list[str] = field(default_factory=list)  # class FQNs
    features: list[Feature] = field(default_factory=list)
    owner: str = field(default="", compare=False)  # "metamodel.package"

    kind = "class"

    @property
    def fqn(self) -> str:
        return f"{self.owner}.{self.name}"

    def feature(self, name: str) -> Optional[Feature]:
        for f in self.features:
            if f.name == name:
                return f
        return None

    def to_doc(self) -> dict:
        return {"kind": "class", "name": self.name, "abstract": self.abstract,
                "super": list(self.super_types),
                "features": [f.to_doc() for f in self.features]}


@dataclass
class Enumeration:
    name: str
    literals: list[str] = field(default_factory=list)
    owner: str = field(default="", compare=False)

    kind = "enum"

    @property
    def fqn(self) -> str:
        return f"{self.owner}.{self.name}"

    def to_doc(self) -> dict:
        return {"kind": "enum", "name": self.name, "literals": list(self.literals)}


Classifier = Union[Class, Enumeration]


@dataclass
class Package:
    name: str
    classifiers: list[Classifier] = field(default_factory=list)

    def classifier(self, name: str) -> Optional[Classifier]:
        for c in self.classifiers:
            if c.name == name:
                return c
        return None


@dataclass
class Metamodel:
    name: str
    packages: list[Package] = field(default_factory=list)

    def package(self, name: str) -> Optional[Package]:
        for p in self.packages:
            if p.name == name:
                return p
        return None

    def to_doc(self) -> dict:
        return {"name": self.name,
                "packages": [{"name": p.name,
                              "classifiers": [c.to_doc() for c in p.classifiers]}
                             for p in self.packages]}


class ClassInfo:
    """Per-class lookup table derived from the supertype graph."""

    __slots__ = ("cls", "linearization", "ancestors", "all_features")

    def __init__(self, cls: Class, linearization: list[str],
                 all_features: dict[str, Feature]):
        self.cls = cls
        self.linearization = linearization  # supertypes first, self last
        self.ancestors = set(linearization[:-1])
        self.all_features = all_features  # name -> declaring Feature, in order


def _require_ident(name: str, what: str) -> None:
    if not isinstance(name, str) or not IDENT_RE.match(name):
        raise MetamodelFormatError(f"{what} name {name!r} is not a valid identifier")


class MetamodelSet:
    """An ordered set of metamodels sharing one FQN namespace.

    Every mutation goes through the helper methods below so the epoch
    counter advances; models key their derived caches off that counter.
    """

    def __init__(self, metamodels: list[Metamodel] = ()):  # type: ignore[assignment]
        self.metamodels: dict[str, Metamodel] = {}
        self.epoch = 0
        self._info_cache: dict[str, ClassInfo] = {}
        self._info_epoch = -1
        for mm in metamodels:
            self.add_metamodel(mm)

    # -- structure ---------------------------------------------------------

    def add_metamodel(self, mm: Metamodel) -> None:
        if mm.name in self.metamodels:
            raise MetamodelFormatError(f"duplicate metamodel name {mm.name!r}")
        self.metamodels[mm.name] = mm
        self._reattach(mm)
        self.touch()

    def names(self) -> list[str]:
        return list(self.metamodels)

    def touch(self) -> None:
        self.epoch += 1

    def _reattach(self, mm: Metamodel) -> None:
        # restore owner backrefs after deserialization or restore
        for pkg in mm.packages:
            owner = f"{mm.name}.{pkg.name}"
            for c in pkg.classifiers:
                c.owner = owner
                if isinstance(c, Class):
                    for f in c.features:
                        f.owner = c.fqn

    # -- resolution --------------------------------------------------------

    def resolve(self, fq_name: str):
        """Resolve ``mm.pkg.Classifier`` or ``mm.pkg.Classifier.feature``."""
        parts = fq_name.split(".")
        if len(parts) not in (3, 4):
            raise ResolveError(fq_name, fq_name)
        mm = self.metamodels.get(parts[0])
        if mm is None:
            raise ResolveError(fq_name, parts[0])
        pkg = mm.package(parts[1])
        if pkg is None:
            raise ResolveError(fq_name, parts[1])
        classifier = pkg.classifier(parts[2])
        if classifier is None:
            raise ResolveError(fq_name, parts[2])
        if len(parts) == 3:
            return classifier
        if not isinstance(classifier, Class):
            raise ResolveError(fq_name, parts[3])
        feat = self.info(classifier.fqn).all_features.get(parts[3])
        if feat is None:
            raise ResolveError(fq_name, parts[3])
        return feat

    def find(self, fq_name: str):
        try:
            return self.resolve(fq_name)
        except ResolveError:
            return None

    def classes(self) -> Iterator[Class]:
        for mm in self.metamodels.values():
            for pkg in mm.packages:
                for c in pkg.classifiers:
                    if isinstance(c, Class):
                        yield c

    def classifiers(self) -> Iterator[Classifier]:
        for mm in self.metamodels.values():
            for pkg in mm.packages:
                yield from pkg.classifiers

    def package_of(self, fqn: str) -> Package:
        parts = fqn.split(".")
        if len(parts) < 2:
            raise ResolveError(fqn, fqn)
        mm = self.metamodels.get(parts[0])
        pkg = mm.package(parts[1]) if mm else None
        if pkg is None:
            raise ResolveError(fqn, parts[1] if mm else parts[0])
        return pkg

    # -- derived info ------------------------------------------------------

    def info(self, class_fqn: str) -> ClassInfo:
        if self._info_epoch != self.epoch:
            self._info_cache.clear()
            self._info_epoch = self.epoch
        cached = self._info_cache.get(class_fqn)
        if cached is not None:
            return cached
        cls = self.resolve(class_fqn)
        if not isinstance(cls, Class):
            raise MetamodelFormatError(f"{class_fqn} is not a class")
        linearization: list[str] = []
        seen: set[str] = set()

        def walk(fqn: str, trail: tuple[str, ...]) -> None:
            if fqn in trail:
                raise MetamodelFormatError(f"supertype cycle through {fqn}")
            c = self.resolve(fqn)
            for sup in c.super_types:
                walk(sup, trail + (fqn,))
            if fqn not in seen:
                seen.add(fqn)
                linearization.append(fqn)

        walk(class_fqn, ())
        feats: dict[str, Feature] = {}
        for fqn in linearization:
            for f in self.resolve(fqn).features:
                feats[f.name] = f
        info = ClassInfo(cls, linearization, feats)
        self._info_cache[class_fqn] = info
        return info

    def specializes(self, class_fqn: str, base_fqn: str) -> bool:
        """True when class_fqn equals base_fqn or inherits from it."""
        if class_fqn == base_fqn:
            return True
        return base_fqn in self.info(class_fqn).ancestors

    # -- mutation helpers (all bump the epoch) ------------------------------

    def add_classifier(self, package_fqn: str, classifier: Classifier) -> None:
        pkg = self.package_of(package_fqn)
        _require_ident(classifier.name, "classifier")
        if pkg.classifier(classifier.name) is not None:
            raise MetamodelFormatError(
                f"classifier {package_fqn}.{classifier.name} already exists")
        classifier.owner = package_fqn
        if isinstance(classifier, Class):
            for f in classifier.features:
                f.owner = classifier.fqn
        pkg.classifiers.append(classifier)
        self.touch()
        try:
            self.validate()
        except MetamodelFormatError:
            pkg.classifiers.remove(classifier)
            self.touch()
            raise

    def remove_classifier(self, fqn: str) -> Classifier:
        classifier = self.resolve(fqn)
        refs = self._references_to(fqn)
        if refs:
            raise MetamodelFormatError(f"cannot delete {fqn}: referenced by {refs[0]}")
        pkg = self.package_of(fqn)
        pkg.classifiers.remove(classifier)
        self.touch()
        return classifier

    def add_feature(self, class_fqn: str, feat: Feature) -> None:
        cls = self.resolve(class_fqn)
        if not isinstance(cls, Class):
            raise MetamodelFormatError(f"{class_fqn} is not a class")
        _require_ident(feat.name, "feature")
        self._validate_feature_def(feat)
        for other_fqn in self._hierarchy_of(class_fqn):
            if feat.name in self.info(other_fqn).all_features:
                raise MetamodelFormatError(
                    f"feature name {feat.name!r} clashes in {other_fqn}")
        feat.owner = class_fqn
        cls.features.append(feat)
        self.touch()

    def remove_feature(self, feature_fqn: str) -> Feature:
        feat = self.resolve(feature_fqn)
        if not isinstance(feat, Feature):
            raise MetamodelFormatError(f"{feature_fqn} is not a feature")
        cls = self.resolve(feat.owner)
        cls.features.remove(feat)
        self.touch()
        return feat

    def rename(self, fqn: str, new_name: str) -> None:
        """Rename a classifier or feature, rewriting referring FQNs."""
        element = self.resolve(fqn)
        _require_ident(new_name, "new")
        if isinstance(element, Feature):
            for other_fqn in self._hierarchy_of(element.owner):
                if new_name in self.info(other_fqn).all_features:
                    raise MetamodelFormatError(
                        f"feature name {new_name!r} clashes in {other_fqn}")
            element.name = new_name
            self.touch()
            return
        pkg = self.package_of(fqn)
        if pkg.classifier(new_name) is not None:
            raise MetamodelFormatError(
                f"classifier {element.owner}.{new_name} already exists")
        old_fqn = element.fqn
        element.name = new_name
        new_fqn = element.fqn
        for c in self.classes():
            c.super_types = [new_fqn if s == old_fqn else s for s in c.super_types]
            for f in c.features:
                if f.target == old_fqn:
                    f.target = new_fqn
                if f.value_type == old_fqn:
                    f.value_type = new_fqn
                f.owner = c.fqn  # covers features of the renamed class itself
        self.touch()

    def set_feature_property(self, feature_fqn: str, prop: str, value) -> None:
        feat = self.resolve(feature_fqn)
        if not isinstance(feat, Feature):
            raise MetamodelFormatError(f"{feature_fqn} is not a feature")
        if prop == "lower":
            feat.lower = int(value)
        elif prop == "upper":
            feat.upper = None if value in ("*", None) else int(value)
        elif prop == "target":
            if not isinstance(self.resolve(value), Class):
                raise MetamodelFormatError(f"reference target {value} is not a class")
            feat.target = value
        else:
            raise MetamodelFormatError(f"unknown feature property {prop!r}")
        self._validate_feature_def(feat)
        self.touch()

    def set_abstract(self, class_fqn: str, value: bool) -> None:
        cls = self.resolve(class_fqn)
        if not isinstance(cls, Class):
            raise MetamodelFormatError(f"{class_fqn} is not a class")
        cls.abstract = bool(value)
        self.touch()

    def _hierarchy_of(self, class_fqn: str) -> list[str]:
        """The class, its ancestors and all transitive subclasses."""
        related = list(self.info(class_fqn).linearization)
        for c in self.classes():
            if class_fqn in self.info(c.fqn).ancestors:
                related.append(c.fqn)
        return related

    def _references_to(self, fqn: str) -> list[str]:
        refs = []
        for c in self.classes():
            if fqn in c.super_types:
                refs.append(c.fqn)
            for f in c.features:
                if f.target == fqn or f.value_type == fqn:
                    refs.append(f.fqn)
        return refs

    def _validate_feature_def(self, feat: Feature) -> None:
        if feat.kind not in ("attribute", "reference"):
            raise MetamodelFormatError(f"feature {feat.name!r}: bad kind {feat.kind!r}")
        if feat.lower < 0:
            raise MetamodelFormatError(f"feature {feat.name!r}: negative lower bound")
        if feat.upper is not None and (feat.upper < 1 or feat.lower > feat.upper):
            raise MetamodelFormatError(
                f"feature {feat.name!r}: bounds {feat.lower}..{feat.upper} invalid")
        if feat.kind == "attribute":
            if feat.upper != 1:
                raise MetamodelFormatError(
                    f"attribute {feat.name!r}: upper bound must be 1")
            if feat.value_type not in ATTRIBUTE_TYPES:
                enum = self.find(feat.value_type or "")
                if not isinstance(enum, Enumeration):
                    raise MetamodelFormatError(
                        f"attribute {feat.name!r}: unknown type {feat.value_type!r}")
        else:
            target = self.find(feat.target or "")
            if not isinstance(target, Class):
                raise MetamodelFormatError(
                    f"reference {feat.name!r}: unknown target {feat.target!r}")

    # -- validation ---------------------------------------------------------

    def validate(self) -> None:
        """Check all metamodel invariants; raises on the first violation."""
        seen: set[str] = set()
        for mm in self.metamodels.values():
            _require_ident(mm.name, "metamodel")
            for pkg in mm.packages:
                _require_ident(pkg.name, "package")
                for c in pkg.classifiers:
                    _require_ident(c.name, "classifier")
                    if c.fqn in seen:
                        raise MetamodelFormatError(f"duplicate classifier {c.fqn}")
                    seen.add(c.fqn)
        for c in self.classes():
            for sup in c.super_types:
                sup_el = self.find(sup)
                if not isinstance(sup_el, Class):
                    raise MetamodelFormatError(
                        f"{c.fqn}: unknown supertype {sup}")
            info = self.info(c.fqn)  # raises on supertype cycles
            own = set()
            for f in c.features:
                _require_ident(f.name, "feature")
                if f.name in own:
                    raise MetamodelFormatError(f"duplicate feature {c.fqn}.{f.name}")
                own.add(f.name)
                for ancestor_fqn in info.linearization[:-1]:
                    ancestor = self.resolve(ancestor_fqn)
                    if ancestor.feature(f.name) is not None:
                        raise MetamodelFormatError(
                            f"feature {c.fqn}.{f.name} hides "
                            f"{ancestor_fqn}.{f.name}")
                self._validate_feature_def(f)

    # -- serialization -------------------------------------------------------

    def docs(self) -> dict[str, dict]:
        return {name: mm.to_doc() for name, mm in self.metamodels.items()}

    def restore_from(self, docs: dict[str, dict]) -> None:
        self.metamodels = {}
        for doc in docs.values():
            mm = metamodel_from_doc(doc)
            self.metamodels[mm.name] = mm
            self._reattach(mm)
        self.touch()


# -- document parsing --------------------------------------------------------


def _feature_from_doc(doc: dict) -> Feature:
    kind = doc.get("kind")
    upper = doc.get("upper", 1)
    feat = Feature(
        name=doc.get("name", ""),
        kind=kind,
        value_type=doc.get("type") if kind == "attribute" else None,
        target=doc.get("target") if kind == "reference" else None,
        containment=bool(doc.get("containment", False)) if kind == "reference" else False,
        lower=int(doc.get("lower", 0)),
        upper=None if upper == "*" else int(upper),
    )
    return feat


def _classifier_from_doc(doc: dict) -> Classifier:
    kind = doc.get("kind")
    if kind == "class":
        return Class(name=doc.get("name", ""),
                     abstract=bool(doc.get("abstract", False)),
                     super_types=list(doc.get("super", [])),
                     features=[_feature_from_doc(f) for f in doc.get("features", [])])
    if kind == "enum":
        literals = list(doc.get("literals", []))
        for lit in literals:
            _require_ident(lit, "enum literal")
        return Enumeration(name=doc.get("name", ""), literals=literals)
    raise MetamodelFormatError(f"unknown classifier kind {kind!r}")


def metamodel_from_doc(doc: dict) -> Metamodel:
    if not isinstance(doc, dict):
        raise MetamodelFormatError("metamodel document must be an object")
    packages = [Package(name=p.get("name", ""),
                        classifiers=[_classifier_from_doc(c)
                                     for c in p.get("classifiers", [])])
                for p in doc.get("packages", [])]
    return Metamodel(name=doc.get("name", ""), packages=packages)


def load_metamodel(text: str | dict) -> Metamodel:
    """Parse and validate one metamodel document (JSON text or dict)."""
    if isinstance(text, str):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MetamodelFormatError(
                f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    else:
        doc = text
    mm = metamodel_from_doc(doc)
    MetamodelSet([mm]).validate()
    return mm


def save_metamodel(mm: Metamodel) -> str:
    return json.dumps(mm.to_doc(), sort_keys=True, indent=2) + "\n"


def metamodels_equivalent(a: MetamodelSet, b: MetamodelSet) -> bool:
    """Field-by-field equality, forgiving classifier order inside packages."""

    def canon(ms: MetamodelSet) -> str:
        docs = {}
        for name, mm in ms.metamodels.items():
            doc = mm.to_doc()
            for pkg in doc["packages"]:
                pkg["classifiers"].sort(key=lambda c: c["name"])
            docs[name] = doc
        return json.dumps(docs, sort_keys=True)

    return canon(a) == canon(b)
