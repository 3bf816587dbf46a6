"""Custom migrations of the reengineering case.

Each step reads the program syntax graph through inverse navigation and the
trace associations left by the preceding steps:

* ExtractStates finds the abstract base class named ``State``, walks the
  inheritance hierarchy backwards and creates one state per concrete subclass.
* ExtractTransitions finds, for every target state, the element references
  pointing at its class, keeps those sitting inside a call to ``activate``
  and connects the enclosing class's state to the target state.
* ExtractTriggers / ExtractActions read the guarding condition respectively
  the surrounding statements for ``equals``/``send`` calls on string literals.
* PrintTime reports the elapsed milliseconds of the preceding steps.
"""

from __future__ import annotations

from typing import Optional

from ..errors import MigrationError
from ..history import MigrationContext, MigrationRegistry
from ..model import Model

CASE_REGISTRY = MigrationRegistry()

JAVA_CLASS = "java.java.Class"
SUPER_CLASS_REF = "java.java.Class.superClass"
ER_TARGET_REF = "java.java.ElementReference.target"
STATE_TRACE_REF = "sm.sm.State.class"
SM_RESOURCE = "statemachine"


def _the_statemachine(model: Model) -> str:
    machines = [el.id for el in model.elements.values()
                if el.class_fqn == "sm.sm.StateMachine"]
    if len(machines) != 1:
        raise MigrationError(f"expected one statemachine, found {len(machines)}")
    return machines[0]


def _first_literal_of_call(model: Model, root: str, method_name: str) -> Optional[str]:
    """First string literal argument of the first matching call in the subtree."""
    for eid in model.subtree_preorder(root):
        el = model.elements[eid]
        if el.class_fqn != "java.java.MethodCall":
            continue
        if model.get_slot(eid, "methodName") != method_name:
            continue
        for arg in model.get_slot(eid, "arguments") or []:
            if model.elements[arg].class_fqn == "java.java.StringLiteral":
                return model.get_slot(arg, "value")
    return None


@CASE_REGISTRY.register("ExtractStates")
def extract_states(ctx: MigrationContext) -> None:
    model = ctx.model
    super_ref = ctx.resolve(SUPER_CLASS_REF)
    bases = [el.id for el in model.elements.values()
             if el.class_fqn == JAVA_CLASS
             and el.slots.get("name") == "State"
             and el.slots.get("abstract") is True]
    if len(bases) != 1:
        raise MigrationError(
            f"expected exactly one abstract class named 'State', found {len(bases)}")

    model.add_resource(SM_RESOURCE)
    machine = model.create_element(SM_RESOURCE, "sm.sm.StateMachine")

    states: list[str] = []
    queue = [bases[0]]
    seen = set(queue)
    while queue:
        class_id = queue.pop(0)
        for sub in model.get_inverse(class_id, super_ref):
            if sub in seen:
                continue
            seen.add(sub)
            queue.append(sub)
            if model.get_slot(sub, "abstract") is True:
                continue
            state = model.create_element(SM_RESOURCE, "sm.sm.State")
            model.set_slot(state, "name", model.get_slot(sub, "name"))
            model.set_slot(state, "class", [sub])
            states.append(state)
    model.set_slot(machine, "states", states)


@CASE_REGISTRY.register("ExtractTransitions")
def extract_transitions(ctx: MigrationContext) -> None:
    model = ctx.model
    er_target = ctx.resolve(ER_TARGET_REF)
    state_trace = ctx.resolve(STATE_TRACE_REF)
    machine = _the_statemachine(model)

    transitions: list[str] = []
    for target_state in model.get_slot(machine, "states") or []:
        target_class = (model.get_slot(target_state, "class") or [None])[0]
        if target_class is None:
            continue
        for reference in model.get_inverse(target_class, er_target):
            call = model.get_container_of_type(reference, "java.java.MethodCall")
            if call is None or model.get_slot(call, "methodName") != "activate":
                continue
            source_class = model.get_container_of_type(reference, JAVA_CLASS)
            if source_class is None:
                continue
            source_states = model.get_inverse(source_class, state_trace)
            if not source_states:
                continue
            transition = model.create_element(SM_RESOURCE, "sm.sm.Transition")
            model.set_slot(transition, "source", [source_states[0]])
            model.set_slot(transition, "target", [target_state])
            model.set_slot(transition, "reference", [reference])
            transitions.append(transition)
    model.set_slot(machine, "transitions", transitions)


@CASE_REGISTRY.register("ExtractTriggers")
def extract_triggers(ctx: MigrationContext) -> None:
    model = ctx.model
    machine = _the_statemachine(model)
    for transition in model.get_slot(machine, "transitions") or []:
        reference = (model.get_slot(transition, "reference") or [None])[0]
        if reference is None:
            continue
        guard = model.get_container_of_type(reference, "java.java.IfStatement")
        if guard is None:
            continue
        condition = (model.get_slot(guard, "condition") or [None])[0]
        if condition is None:
            continue
        literal = _first_literal_of_call(model, condition, "equals")
        if literal is not None:
            model.set_slot(transition, "trigger", literal)


@CASE_REGISTRY.register("ExtractActions")
def extract_actions(ctx: MigrationContext) -> None:
    model = ctx.model
    machine = _the_statemachine(model)
    for transition in model.get_slot(machine, "transitions") or []:
        reference = (model.get_slot(transition, "reference") or [None])[0]
        if reference is None:
            continue
        scope = model.get_container_of_type(reference, "java.java.IfStatement")
        if scope is None:
            scope = model.get_container_of_type(reference, "java.java.Method")
        if scope is None:
            continue
        literal = _first_literal_of_call(model, scope, "send")
        if literal is not None:
            model.set_slot(transition, "action", literal)


@CASE_REGISTRY.register("PrintTime")
def print_time(ctx: MigrationContext) -> None:
    for name, millis in ctx.step_times:
        ctx.report.append(f"step {name} {round(millis)}")
    ctx.report.append(f"total {round(ctx.elapsed_ms())}")
