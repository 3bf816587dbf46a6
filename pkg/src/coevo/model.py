"""Models: typed element graphs over a metamodel set.

Elements live in resources; containment forms a forest rooted at resource
roots.  The model maintains, incrementally under every slot mutation, an
inverse reference index mapping (target element, reference feature) to the
set of referring elements, so backward navigation costs the same as forward
navigation.  Results are returned in document order: the depth-first
containment traversal of the resources in declaration order.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .errors import MetamodelFormatError, ModelEditError, ModelFormatError, ResolveError
from .metamodel import Class, Enumeration, Feature, MetamodelSet

_ID_RE = re.compile(r"^e(\d+)$")
_ORPHAN_RANK = 1 << 60


@dataclass
class Resource:
    uri: str
    roots: list[str] = field(default_factory=list)


@dataclass
class Element:
    id: str
    class_fqn: str
    slots: dict = field(default_factory=dict)  # feature name -> scalar | list[str]


FeatureLike = Union[str, Feature]
ClassLike = Union[str, Class]


class Model:
    def __init__(self, metamodels: MetamodelSet):
        self.metamodels = metamodels
        self.resources: list[Resource] = []
        self.elements: dict[str, Element] = {}
        self._container: dict[str, tuple[str, str]] = {}  # child -> (parent, feature)
        self._root_resource: dict[str, str] = {}  # root id -> resource uri
        # inverse index: target id -> (declaring class FQN, feature name) -> referrers
        self._inverse: dict[str, dict[tuple[str, str], set[str]]] = {}
        self._next_id = 1
        self._softened = False
        self._structure_epoch = 0
        self._ranks: dict[str, int] = {}
        self._ranks_epoch = -1
        self._mm_epoch = metamodels.epoch

    # -- resources -----------------------------------------------------------

    def add_resource(self, uri: str) -> Resource:
        if self.resource(uri) is not None:
            raise ModelEditError(f"resource {uri!r} already exists")
        res = Resource(uri)
        self.resources.append(res)
        self._touch_structure()
        return res

    def resource(self, uri: str) -> Optional[Resource]:
        for res in self.resources:
            if res.uri == uri:
                return res
        return None

    # -- element lifecycle -----------------------------------------------------

    def create_element(self, resource_uri: str, clazz: ClassLike) -> str:
        self._sync_metamodel()
        res = self.resource(resource_uri)
        if res is None:
            raise ModelEditError(f"unknown resource {resource_uri!r}")
        cls = self._resolve_class(clazz)
        if cls.abstract and not self._softened:
            raise ModelEditError(f"cannot instantiate abstract class {cls.fqn}")
        eid = self._fresh_id()
        self.elements[eid] = Element(eid, cls.fqn)
        res.roots.append(eid)
        self._root_resource[eid] = res.uri
        self._touch_structure()
        return eid

    def delete_element(self, element_id: str) -> None:
        self._sync_metamodel()
        self._element(element_id)
        subtree = self._subtree(element_id)
        # drop incoming cross references from surviving referrers
        for did in subtree:
            for (_owner, fname), sources in self._inverse.get(did, {}).items():
                for src in list(sources):
                    if src in subtree:
                        continue
                    slot = self.elements[src].slots.get(fname)
                    if isinstance(slot, list):
                        remaining = [t for t in slot if t != did]
                        if remaining:
                            self.elements[src].slots[fname] = remaining
                        else:
                            del self.elements[src].slots[fname]
        for did in subtree:
            self._remove_outgoing(self.elements[did])
        self._detach(element_id)
        for did in subtree:
            self._inverse.pop(did, None)
            self._container.pop(did, None)
            del self.elements[did]
        self._touch_structure()

    def retype(self, element_id: str, clazz: ClassLike) -> None:
        """Change an element's class in place, keeping id, slots and containment."""
        self._sync_metamodel()
        el = self._element(element_id)
        cls = self._resolve_class(clazz)
        if cls.abstract and not self._softened:
            raise ModelEditError(f"cannot retype {element_id} to abstract {cls.fqn}")
        self._remove_outgoing(el)
        el.class_fqn = cls.fqn
        self._add_outgoing(el)
        self._touch_structure()

    # -- slots -----------------------------------------------------------------

    def get_slot(self, element_id: str, feature: FeatureLike):
        el = self._element(element_id)
        name = feature.name if isinstance(feature, Feature) else feature.rsplit(".", 1)[-1]
        value = el.slots.get(name)
        return list(value) if isinstance(value, list) else value

    def set_slot(self, element_id: str, feature: FeatureLike, value) -> None:
        self._sync_metamodel()
        el = self._element(element_id)
        feat = self._applicable_feature(el, feature)
        if feat.kind == "attribute":
            if value is None:
                el.slots.pop(feat.name, None)
                return
            self._check_attribute_value(feat, value)
            el.slots[feat.name] = value
            return

        targets = self._normalize_targets(value)
        if not self._softened:
            for t in targets:
                if t not in self.elements:
                    raise ModelEditError(
                        f"slot {feat.fqn}: unknown element id {t!r}")
        old = el.slots.get(feat.name)
        old_targets = list(old) if isinstance(old, list) else []
        if feat.containment:
            self._set_containment(el, feat, old_targets, targets)
        self._reindex(el.id, (feat.owner, feat.name), old_targets, targets)
        if targets:
            el.slots[feat.name] = targets
        else:
            el.slots.pop(feat.name, None)

    def clear_slot(self, element_id: str, name: str) -> None:
        """Drop a slot even when its feature no longer exists in the metamodel."""
        self._sync_metamodel()
        el = self._element(element_id)
        value = el.slots.pop(name, None)
        if not isinstance(value, list):
            return
        for t in value:
            if self._container.get(t) == (el.id, name):
                del self._container[t]
        key = self._declared_key(el, name)
        if key is not None:
            self._reindex(el.id, key, value, [])
        self._touch_structure()

    # -- navigation --------------------------------------------------------------

    def get_inverse(self, element_id: str, reference: FeatureLike) -> list[str]:
        """All elements whose ``reference`` slot holds the element, document order."""
        if self._mm_epoch != self.metamodels.epoch:
            self._sync_metamodel()
        if element_id not in self.elements:
            raise ModelEditError(f"unknown element id {element_id!r}")
        feat = reference if isinstance(reference, Feature) \
            else self.metamodels.resolve(reference)
        if not isinstance(feat, Feature) or feat.kind != "reference":
            raise ModelEditError(f"{getattr(feat, 'fqn', reference)} is not a reference")
        by_feature = self._inverse.get(element_id)
        sources = by_feature.get((feat.owner, feat.name)) if by_feature else None
        if not sources:
            return []
        if len(sources) == 1:
            return list(sources)
        ranks = self._ranks if self._ranks_epoch == self._structure_epoch \
            else self._document_ranks()
        if len(sources) == 2:
            a, b = sources
            ra = ranks.get(a, _ORPHAN_RANK)
            rb = ranks.get(b, _ORPHAN_RANK)
            return [a, b] if (ra, a) <= (rb, b) else [b, a]
        return sorted(sources, key=lambda s: (ranks.get(s, _ORPHAN_RANK), s))

    def get_container_of_type(self, element_id: str, clazz: ClassLike) -> Optional[str]:
        """Nearest self-or-ancestor along containment whose class matches ``clazz``."""
        self._element(element_id)
        cls = self._resolve_class(clazz)
        node: Optional[str] = element_id
        while node is not None:
            el = self.elements[node]
            try:
                if self.metamodels.specializes(el.class_fqn, cls.fqn):
                    return node
            except (ResolveError, MetamodelFormatError):
                pass
            parent = self._container.get(node)
            node = parent[0] if parent else None
        return None

    def container_of(self, element_id: str) -> Optional[str]:
        parent = self._container.get(element_id)
        return parent[0] if parent else None

    def document_order(self) -> list[str]:
        """Element ids in depth-first containment order, orphans excluded."""
        ranks = self._document_ranks()
        return sorted(ranks, key=ranks.__getitem__)

    def subtree_preorder(self, element_id: str) -> list[str]:
        """Document-order traversal of the containment subtree of an element."""
        self._element(element_id)
        out: list[str] = []
        seen: set[str] = set()
        stack = [element_id]
        while stack:
            eid = stack.pop()
            if eid in seen:
                continue
            seen.add(eid)
            out.append(eid)
            el = self.elements[eid]
            try:
                info = self.metamodels.info(el.class_fqn)
            except (ResolveError, MetamodelFormatError):
                continue
            children: list[str] = []
            for feat in info.all_features.values():
                if feat.containment:
                    value = el.slots.get(feat.name)
                    if isinstance(value, list):
                        children.extend(c for c in value if c in self.elements)
            stack.extend(reversed(children))
        return out

    # -- internal helpers ----------------------------------------------------

    def _element(self, element_id: str) -> Element:
        el = self.elements.get(element_id)
        if el is None:
            raise ModelEditError(f"unknown element id {element_id!r}")
        return el

    def _resolve_class(self, clazz: ClassLike) -> Class:
        cls = self.metamodels.resolve(clazz) if isinstance(clazz, str) else clazz
        if not isinstance(cls, Class):
            raise ModelEditError(f"{clazz} is not a class")
        return cls

    def _applicable_feature(self, el: Element, feature: FeatureLike) -> Feature:
        name = feature.name if isinstance(feature, Feature) else feature.rsplit(".", 1)[-1]
        try:
            feat = self.metamodels.info(el.class_fqn).all_features.get(name)
        except (ResolveError, MetamodelFormatError):
            feat = None
        if feat is None:
            raise ModelEditError(
                f"feature {name!r} is not applicable to {el.class_fqn}")
        return feat

    def _check_attribute_value(self, feat: Feature, value) -> None:
        ok = False
        if feat.value_type == "string":
            ok = isinstance(value, str)
        elif feat.value_type == "boolean":
            ok = isinstance(value, bool)
        elif feat.value_type == "integer":
            ok = isinstance(value, int) and not isinstance(value, bool)
        else:
            enum = self.metamodels.find(feat.value_type or "")
            ok = isinstance(enum, Enumeration) and value in enum.literals
        if not ok:
            raise ModelEditError(
                f"slot {feat.fqn}: value {value!r} does not match {feat.value_type}")

    @staticmethod
    def _normalize_targets(value) -> list[str]:
        if value is None:
            return []
        if isinstance(value, str):
            return [value]
        if isinstance(value, (list, tuple)):
            out = []
            for v in value:
                if not isinstance(v, str):
                    raise ModelEditError(f"reference slots hold element ids, got {v!r}")
                out.append(v)
            return out
        raise ModelEditError(f"reference slots hold element ids, got {value!r}")

    def _set_containment(self, el: Element, feat: Feature,
                         old: list[str], new: list[str]) -> None:
        if len(set(new)) != len(new):
            raise ModelEditError(
                f"containment slot {feat.fqn} lists an element twice")
        added = [t for t in new if self._container.get(t) != (el.id, feat.name)]
        for child in added:
            if child == el.id or self._is_containment_ancestor(child, el.id):
                raise ModelEditError(
                    f"containment cycle: {child} would contain its own container")
        for child in set(old) - set(new):
            if self._container.get(child) == (el.id, feat.name):
                del self._container[child]
        for child in added:
            if child in self.elements:
                self._detach(child)
                self._container[child] = (el.id, feat.name)
        self._touch_structure()

    def _is_containment_ancestor(self, candidate: str, of: str) -> bool:
        node: Optional[str] = of
        while node is not None:
            if node == candidate:
                return True
            parent = self._container.get(node)
            node = parent[0] if parent else None
        return False

    def _detach(self, element_id: str) -> None:
        """Unhook an element from its current root slot or container."""
        uri = self._root_resource.pop(element_id, None)
        if uri is not None:
            self.resource(uri).roots.remove(element_id)
            return
        parent = self._container.pop(element_id, None)
        if parent is None:
            return
        pid, fname = parent
        pel = self.elements.get(pid)
        if pel is None:
            return
        slot = pel.slots.get(fname)
        if isinstance(slot, list):
            remaining = [t for t in slot if t != element_id]
            key = self._declared_key(pel, fname)
            if key is not None:
                self._reindex(pid, key, slot, remaining)
            if remaining:
                pel.slots[fname] = remaining
            else:
                del pel.slots[fname]

    def _declared_key(self, el: Element, name: str) -> Optional[tuple[str, str]]:
        try:
            feat = self.metamodels.info(el.class_fqn).all_features.get(name)
        except (ResolveError, MetamodelFormatError):
            return None
        if feat is None or feat.kind != "reference":
            return None
        return (feat.owner, feat.name)

    def _reindex(self, source_id: str, key: tuple[str, str],
                 old: Iterable[str], new: Iterable[str]) -> None:
        old_set, new_set = set(old), set(new)
        for t in old_set - new_set:
            by_feature = self._inverse.get(t)
            if by_feature:
                sources = by_feature.get(key)
                if sources:
                    sources.discard(source_id)
                    if not sources:
                        del by_feature[key]
                if not by_feature:
                    del self._inverse[t]
        for t in new_set - old_set:
            self._inverse.setdefault(t, {}).setdefault(key, set()).add(source_id)

    def _remove_outgoing(self, el: Element) -> None:
        for name, value in el.slots.items():
            if not isinstance(value, list):
                continue
            key = self._declared_key(el, name)
            if key is not None:
                self._reindex(el.id, key, value, [])

    def _add_outgoing(self, el: Element) -> None:
        for name, value in el.slots.items():
            if not isinstance(value, list):
                continue
            key = self._declared_key(el, name)
            if key is not None:
                self._reindex(el.id, key, [], value)

    def _subtree(self, element_id: str) -> set[str]:
        children: dict[str, list[str]] = {}
        for child, (parent, _f) in self._container.items():
            children.setdefault(parent, []).append(child)
        seen: set[str] = set()
        stack = [element_id]
        while stack:
            eid = stack.pop()
            if eid in seen or eid not in self.elements:
                continue
            seen.add(eid)
            stack.extend(children.get(eid, ()))
        return seen

    def _fresh_id(self) -> str:
        while True:
            eid = f"e{self._next_id}"
            self._next_id += 1
            if eid not in self.elements:
                return eid

    def _touch_structure(self) -> None:
        self._structure_epoch += 1

    def _sync_metamodel(self) -> None:
        """Rebuild caches when the metamodel set changed (feature FQNs move)."""
        if self._mm_epoch == self.metamodels.epoch:
            return
        self._mm_epoch = self.metamodels.epoch
        self._inverse = {}
        for el in self.elements.values():
            self._add_outgoing(el)
        self._touch_structure()

    def _document_ranks(self) -> dict[str, int]:
        if self._ranks_epoch == self._structure_epoch:
            return self._ranks
        ranks: dict[str, int] = {}
        counter = 0
        for res in self.resources:
            for root in res.roots:
                if root not in self.elements:
                    continue
                stack = [root]
                while stack:
                    eid = stack.pop()
                    if eid in ranks:
                        continue
                    ranks[eid] = counter
                    counter += 1
                    el = self.elements[eid]
                    children: list[str] = []
                    try:
                        info = self.metamodels.info(el.class_fqn)
                    except (ResolveError, MetamodelFormatError):
                        continue
                    for feat in info.all_features.values():
                        if feat.containment:
                            value = el.slots.get(feat.name)
                            if isinstance(value, list):
                                children.extend(
                                    c for c in value if c in self.elements)
                    stack.extend(reversed(children))
        self._ranks = ranks
        self._ranks_epoch = self._structure_epoch
        return ranks

    # -- serialization -------------------------------------------------------

    def to_doc(self) -> dict:
        order = self.document_order()
        emitted = set(order)
        leftovers = [eid for eid in self.elements if eid not in emitted]
        elements = []
        for eid in order + leftovers:
            el = self.elements[eid]
            slots = {}
            for name, value in el.slots.items():
                slots[name] = list(value) if isinstance(value, list) else value
            elements.append({"id": eid, "class": el.class_fqn, "slots": slots})
        return {"resources": [{"uri": r.uri, "roots": list(r.roots)}
                              for r in self.resources],
                "elements": elements}

    def copy(self) -> "Model":
        return model_from_doc(self.to_doc(), self.metamodels)

    def restore_from(self, doc: dict) -> None:
        """Reset this model in place to a previously captured document."""
        fresh = model_from_doc(doc, self.metamodels)
        self.resources = fresh.resources
        self.elements = fresh.elements
        self._container = fresh._container
        self._root_resource = fresh._root_resource
        self._inverse = fresh._inverse
        self._next_id = fresh._next_id
        self._softened = False
        self._mm_epoch = self.metamodels.epoch
        self._touch_structure()


def model_from_doc(doc: dict, metamodels: MetamodelSet) -> Model:
    """Build a model from a document; tolerant of conformance violations.

    Structural problems a checker should report (unknown classes, dangling
    references, double containment) are preserved rather than rejected, so
    `check_conformance` stays usable on loaded files.  Only unreadable
    documents and duplicate ids are errors.
    """
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be an object")
    model = Model(metamodels)
    for rdoc in doc.get("resources", []):
        res = Resource(str(rdoc.get("uri", "")), [str(r) for r in rdoc.get("roots", [])])
        if model.resource(res.uri) is not None:
            raise ModelFormatError(f"duplicate resource uri {res.uri!r}")
        model.resources.append(res)
    max_id = 0
    for edoc in doc.get("elements", []):
        eid = str(edoc.get("id", ""))
        if not eid:
            raise ModelFormatError("element without id")
        if eid in model.elements:
            raise ModelFormatError(f"duplicate element id {eid!r}")
        slots = {}
        for name, value in dict(edoc.get("slots", {})).items():
            slots[name] = [str(v) for v in value] if isinstance(value, list) else value
        model.elements[eid] = Element(eid, str(edoc.get("class", "")), slots)
        m = _ID_RE.match(eid)
        if m:
            max_id = max(max_id, int(m.group(1)))
    model._next_id = max_id + 1
    for res in model.resources:
        for root in res.roots:
            if root in model.elements and root not in model._root_resource:
                model._root_resource[root] = res.uri
    for el in model.elements.values():
        try:
            info = metamodels.info(el.class_fqn)
        except (ResolveError, MetamodelFormatError):
            continue
        for name, value in el.slots.items():
            feat = info.all_features.get(name)
            if feat is None or feat.kind != "reference" or not isinstance(value, list):
                continue
            model._reindex(el.id, (feat.owner, feat.name), [], value)
            if feat.containment:
                for child in value:
                    if (child in model.elements
                            and child not in model._container
                            and child not in model._root_resource):
                        model._container[child] = (el.id, name)
    model._touch_structure()
    return model


def load_model(text: str | dict, metamodels: MetamodelSet) -> Model:
    if isinstance(text, str):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(
                f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    else:
        doc = text
    return model_from_doc(doc, metamodels)


def save_model(model: Model) -> str:
    return json.dumps(model.to_doc(), sort_keys=True, indent=2) + "\n"


def canonical_doc(model: Model) -> dict:
    """The model document with ids renamed to document-order positions.

    Two models are isomorphic exactly when their canonical documents are
    equal, so this doubles as the model comparison relation.
    """
    order = model.document_order()
    rename: dict[str, str] = {}
    for eid in order:
        rename[eid] = f"c{len(rename)}"
    for eid in model.elements:
        if eid not in rename:
            rename[eid] = f"c{len(rename)}"
    elements = []
    ordered = set(order)
    for eid in order + [e for e in model.elements if e not in ordered]:
        el = model.elements[eid]
        slots = {}
        for name, value in el.slots.items():
            if isinstance(value, list):
                slots[name] = [rename.get(t, f"!{t}") for t in value]
            else:
                slots[name] = value
        elements.append({"id": rename[eid], "class": el.class_fqn, "slots": slots})
    return {"resources": [{"uri": r.uri,
                           "roots": [rename.get(x, f"!{x}") for x in r.roots]}
                          for r in model.resources],
            "elements": elements}


def canonical_json(model: Model) -> str:
    return json.dumps(canonical_doc(model), sort_keys=True, indent=2) + "\n"


def models_isomorphic(a: Model, b: Model) -> bool:
    return canonical_doc(a) == canonical_doc(b)
