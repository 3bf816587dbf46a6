"""Deterministic test-model generation for the reengineering case."""

from __future__ import annotations

import random
from typing import Optional, Sequence

from ..metamodel import MetamodelSet
from ..model import Model
from .metamodels import case_metamodels

# trigger/action verb pairs cycled by the generator; suffixed for uniqueness
_VERBS = [("start", "started"), ("stop", "stopped"), ("pause", "paused"),
          ("resume", "resumed"), ("load", "loaded"), ("save", "saved"),
          ("open", "opened"), ("close", "closed"), ("attach", "attached"),
          ("detach", "detached")]

_STATE_NAMES = ["Idle", "Active", "Done"]


class JavaModelBuilder:
    """Convenience construction of program syntax graphs for tests and fixtures.

    Top-level classes are buffered and attached to the root in one slot write
    when the model is read, which keeps large padded fixtures linear.
    """

    def __init__(self, metamodels: Optional[MetamodelSet] = None,
                 resource_uri: str = "java"):
        self.metamodels = metamodels or case_metamodels()
        self._model = Model(self.metamodels)
        self._model.add_resource(resource_uri)
        self.resource_uri = resource_uri
        self.root = self._model.create_element(resource_uri, "java.java.Model")
        self._classes: list[str] = []
        self._flushed = 0

    @property
    def model(self) -> Model:
        if self._flushed != len(self._classes):
            self._model.set_slot(self.root, "classes", list(self._classes))
            self._flushed = len(self._classes)
        return self._model

    def _new(self, class_fqn: str) -> str:
        return self._model.create_element(self.resource_uri, class_fqn)

    def _append(self, parent: str, feature: str, child: str) -> None:
        current = self._model.get_slot(parent, feature) or []
        self._model.set_slot(parent, feature, current + [child])

    def clazz(self, name: str, abstract: bool = False,
              super_class: Optional[str] = None) -> str:
        cid = self._new("java.java.Class")
        self._model.set_slot(cid, "name", name)
        self._model.set_slot(cid, "abstract", abstract)
        if super_class is not None:
            self._model.set_slot(cid, "superClass", [super_class])
        self._classes.append(cid)
        return cid

    def method(self, class_id: str, name: str) -> str:
        mid = self._new("java.java.Method")
        self._model.set_slot(mid, "name", name)
        self._append(class_id, "methods", mid)
        return mid

    def literal(self, value: str) -> str:
        lid = self._new("java.java.StringLiteral")
        self._model.set_slot(lid, "value", value)
        return lid

    def ref(self, class_id: str) -> str:
        rid = self._new("java.java.ElementReference")
        self._model.set_slot(rid, "target", [class_id])
        return rid

    def call(self, method_name: str, *arguments: str) -> str:
        cid = self._new("java.java.MethodCall")
        self._model.set_slot(cid, "methodName", method_name)
        if arguments:
            self._model.set_slot(cid, "arguments", list(arguments))
        return cid

    def expr_stmt(self, expression: str) -> str:
        sid = self._new("java.java.ExpressionStatement")
        self._model.set_slot(sid, "expression", [expression])
        return sid

    def if_stmt(self, condition: str, then: Sequence[str] = (),
                orelse: Sequence[str] = ()) -> str:
        sid = self._new("java.java.IfStatement")
        self._model.set_slot(sid, "condition", [condition])
        if then:
            self._model.set_slot(sid, "then", list(then))
        if orelse:
            self._model.set_slot(sid, "else", list(orelse))
        return sid

    def statement(self, method_id: str, statement_id: str) -> str:
        self._append(method_id, "statements", statement_id)
        return statement_id


def _state_name(i: int) -> str:
    return _STATE_NAMES[i] if i < len(_STATE_NAMES) else f"State{i + 1}"


def _verb_pair(k: int) -> tuple[str, str]:
    trigger, action = _VERBS[k % len(_VERBS)]
    if k >= len(_VERBS):
        suffix = str(k // len(_VERBS))
        return trigger + suffix, action + suffix
    return trigger, action


def gen_fixture(n_states: int, transitions_per_state: int,
                pad_classes: int, seed: int) -> Model:
    """A seeded java model realizing a known statemachine plus padding.

    The first ``n_states`` concrete subclasses of the abstract ``State``
    class form a chain: state ``i`` activates the next ``transitions_per_state``
    states, each guarded by an ``equals`` check on the trigger and paired
    with a ``send`` of the action.  Padding classes carry element references
    to state classes but never inside ``activate`` calls, so the extracted
    statemachine is independent of ``pad_classes``.
    """
    if n_states < 1:
        raise ValueError("n_states must be at least 1")
    rng = random.Random(seed)
    b = JavaModelBuilder()
    base = b.clazz("State", abstract=True)
    states = [b.clazz(_state_name(i), super_class=base) for i in range(n_states)]

    k = 0
    for i, source in enumerate(states):
        method = b.method(source, "handle")
        for j in range(1, transitions_per_state + 1):
            if i + j >= n_states:
                break
            trigger, action = _verb_pair(k)
            k += 1
            b.statement(method, b.if_stmt(
                b.call("equals", b.literal(trigger)),
                then=[b.expr_stmt(b.call("send", b.literal(action))),
                      b.expr_stmt(b.call("activate", b.ref(states[i + j])))]))

    for p in range(pad_classes):
        helper = b.clazz(f"Helper{p}")
        method = b.method(helper, "assist")
        observed = states[rng.randrange(n_states)]
        b.statement(method, b.expr_stmt(
            b.call("log", b.literal(f"note{p}"), b.ref(observed))))

    return b.model
