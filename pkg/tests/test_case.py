"""The reengineering pipeline: extraction steps, fixtures, golden comparison."""

import pytest

from coevo.case import (CASE_REGISTRY, JavaModelBuilder, build_case_history,
                        case_metamodels, extract_statemachine, gen_fixture,
                        run_case)
from coevo.conformance import check_conformance
from coevo.errors import MigrationError
from coevo.history import (apply_operation, create_history, migrate,
                           record_custom)
from coevo.model import Model, load_model, models_isomorphic, save_model


def expected_f1_statemachine() -> Model:
    """The hand-traced golden statemachine of fixture F1."""
    model = Model(case_metamodels())
    model.add_resource("statemachine")
    machine = model.create_element("statemachine", "sm.sm.StateMachine")
    states = {}
    for name in ("Idle", "Active", "Done"):
        sid = model.create_element("statemachine", "sm.sm.State")
        model.set_slot(sid, "name", name)
        states[name] = sid
    transitions = []
    for source, target, trigger, action in (
            ("Idle", "Active", "start", "started"),
            ("Active", "Done", "stop", "stopped")):
        tid = model.create_element("statemachine", "sm.sm.Transition")
        model.set_slot(tid, "source", [states[source]])
        model.set_slot(tid, "target", [states[target]])
        model.set_slot(tid, "trigger", trigger)
        model.set_slot(tid, "action", action)
        transitions.append(tid)
    model.set_slot(machine, "states",
                   [states[n] for n in ("Idle", "Active", "Done")])
    model.set_slot(machine, "transitions", transitions)
    return model


def partial_pipeline_history(*steps: str):
    """The case history up to (including) the named extraction steps,
    with the trace features still in place."""
    history = create_history(case_metamodels(), CASE_REGISTRY)
    apply_operation(history, [], "createReference", {
        "class": "sm.sm.State", "name": "class", "target": "java.java.Class",
        "containment": False, "lower": "0", "upper": "1"})
    apply_operation(history, [], "createReference", {
        "class": "sm.sm.Transition", "name": "reference",
        "target": "java.java.ElementReference",
        "containment": False, "lower": "0", "upper": "1"})
    for step in steps:
        record_custom(history, [], migration_id=step)
    return history


def run_steps(model: Model, *steps: str) -> Model:
    return migrate([model], partial_pipeline_history(*steps))[0]


class TestBuildCaseHistory:
    def test_record_sequence(self):
        history = build_case_history()
        records = history.sealed[0]
        assert len(records) == 9
        assert history.open == []
        kinds = [(r.kind, r.op_name or r.migration_id) for r in records]
        assert kinds == [
            ("operation", "createReference"),
            ("custom", "ExtractStates"),
            ("operation", "createReference"),
            ("custom", "ExtractTransitions"),
            ("custom", "ExtractTriggers"),
            ("custom", "ExtractActions"),
            ("custom", "PrintTime"),
            ("operation", "deleteFeature"),
            ("operation", "deleteFeature"),
        ]

    def test_history_leaves_metamodels_at_initial_state(self):
        # traces are added and deleted again, so the final metamodel equals
        # the snapshot
        history = build_case_history()
        assert history.metamodels.docs() == history.initial_snapshots


class TestExtractStates:
    def test_f1_states(self):
        model = run_steps(gen_fixture(3, 1, 0, 42), "ExtractStates")
        names = [model.get_slot(s, "name")
                 for s in machine_slot(model, "states")]
        assert names == ["Idle", "Active", "Done"]

    def test_abstract_intermediates_are_skipped(self):
        b = JavaModelBuilder()
        base = b.clazz("State", abstract=True)
        mid = b.clazz("Mid", abstract=True, super_class=base)
        b.clazz("Leaf", super_class=mid)
        b.clazz("Free")  # unrelated concrete class
        model = run_steps(b.model, "ExtractStates")
        names = [model.get_slot(s, "name") for s in machine_slot(model, "states")]
        assert names == ["Leaf"]

    def test_no_subclasses_gives_empty_machine(self):
        b = JavaModelBuilder()
        b.clazz("State", abstract=True)
        model = run_steps(b.model, "ExtractStates")
        assert machine_slot(model, "states") == []

    def test_missing_base_class_fails_and_rolls_back(self):
        b = JavaModelBuilder()
        b.clazz("Whatever")
        before = save_model(b.model)
        with pytest.raises(MigrationError, match="abstract class named 'State'"):
            run_steps(b.model, "ExtractStates")
        assert save_model(b.model) == before

    def test_ambiguous_base_class_fails(self):
        b = JavaModelBuilder()
        b.clazz("State", abstract=True)
        b.clazz("State", abstract=True)
        with pytest.raises(MigrationError, match="found 2"):
            run_steps(b.model, "ExtractStates")


def machine_slot(model: Model, feature: str):
    machines = [e.id for e in model.elements.values()
                if e.class_fqn == "sm.sm.StateMachine"]
    assert len(machines) == 1
    return model.get_slot(machines[0], feature) or []


class TestExtractTransitions:
    def test_f1_transitions(self):
        model = run_steps(gen_fixture(3, 1, 0, 42),
                          "ExtractStates", "ExtractTransitions")
        pairs = []
        for t in machine_slot(model, "transitions"):
            source = model.get_slot(t, "source")[0]
            target = model.get_slot(t, "target")[0]
            pairs.append((model.get_slot(source, "name"),
                          model.get_slot(target, "name")))
        assert pairs == [("Idle", "Active"), ("Active", "Done")]

    def test_reference_in_other_call_ignored(self):
        b = JavaModelBuilder()
        base = b.clazz("State", abstract=True)
        a = b.clazz("A", super_class=base)
        c = b.clazz("C", super_class=base)
        method = b.method(a, "handle")
        b.statement(method, b.expr_stmt(b.call("log", b.ref(c))))
        model = run_steps(b.model, "ExtractStates", "ExtractTransitions")
        assert machine_slot(model, "transitions") == []

    def test_duplicate_activations_make_parallel_transitions(self):
        b = JavaModelBuilder()
        base = b.clazz("State", abstract=True)
        a = b.clazz("A", super_class=base)
        c = b.clazz("C", super_class=base)
        method = b.method(a, "handle")
        b.statement(method, b.expr_stmt(b.call("activate", b.ref(c))))
        b.statement(method, b.expr_stmt(b.call("activate", b.ref(c))))
        model = run_steps(b.model, "ExtractStates", "ExtractTransitions")
        assert len(machine_slot(model, "transitions")) == 2

    def test_nested_call_uses_nearest_ancestor(self):
        b = JavaModelBuilder()
        base = b.clazz("State", abstract=True)
        a = b.clazz("A", super_class=base)
        c = b.clazz("C", super_class=base)
        method = b.method(a, "handle")
        # activate(wrap(ref)): nearest call around the reference is `wrap`
        b.statement(method, b.expr_stmt(
            b.call("activate", b.call("wrap", b.ref(c)))))
        model = run_steps(b.model, "ExtractStates", "ExtractTransitions")
        assert machine_slot(model, "transitions") == []


class TestExtractTriggers:
    def test_f1_triggers(self):
        model = run_steps(gen_fixture(3, 1, 0, 42), "ExtractStates",
                          "ExtractTransitions", "ExtractTriggers")
        triggers = [model.get_slot(t, "trigger")
                    for t in machine_slot(model, "transitions")]
        assert triggers == ["start", "stop"]

    def test_unguarded_activation_has_no_trigger(self):
        b = JavaModelBuilder()
        base = b.clazz("State", abstract=True)
        a = b.clazz("A", super_class=base)
        c = b.clazz("C", super_class=base)
        method = b.method(a, "handle")
        b.statement(method, b.expr_stmt(b.call("activate", b.ref(c))))
        model = run_steps(b.model, "ExtractStates", "ExtractTransitions",
                          "ExtractTriggers")
        (t,) = machine_slot(model, "transitions")
        assert model.get_slot(t, "trigger") is None

    def test_first_equals_literal_in_document_order_wins(self):
        b = JavaModelBuilder()
        base = b.clazz("State", abstract=True)
        a = b.clazz("A", super_class=base)
        c = b.clazz("C", super_class=base)
        method = b.method(a, "handle")
        condition = b.call("and",
                           b.call("equals", b.literal("first")),
                           b.call("equals", b.literal("second")))
        b.statement(method, b.if_stmt(condition, then=[
            b.expr_stmt(b.call("activate", b.ref(c)))]))
        model = run_steps(b.model, "ExtractStates", "ExtractTransitions",
                          "ExtractTriggers")
        (t,) = machine_slot(model, "transitions")
        assert model.get_slot(t, "trigger") == "first"


class TestExtractActions:
    def test_f1_actions(self):
        model = run_steps(gen_fixture(3, 1, 0, 42), "ExtractStates",
                          "ExtractTransitions", "ExtractTriggers",
                          "ExtractActions")
        actions = [model.get_slot(t, "action")
                   for t in machine_slot(model, "transitions")]
        assert actions == ["started", "stopped"]

    def test_no_send_in_scope_leaves_action_absent(self):
        b = JavaModelBuilder()
        base = b.clazz("State", abstract=True)
        a = b.clazz("A", super_class=base)
        c = b.clazz("C", super_class=base)
        method = b.method(a, "handle")
        b.statement(method, b.if_stmt(
            b.call("equals", b.literal("go")),
            then=[b.expr_stmt(b.call("activate", b.ref(c)))]))
        model = run_steps(b.model, "ExtractStates", "ExtractTransitions",
                          "ExtractActions")
        (t,) = machine_slot(model, "transitions")
        assert model.get_slot(t, "action") is None

    def test_send_in_sibling_if_is_out_of_scope(self):
        b = JavaModelBuilder()
        base = b.clazz("State", abstract=True)
        a = b.clazz("A", super_class=base)
        c = b.clazz("C", super_class=base)
        method = b.method(a, "handle")
        b.statement(method, b.if_stmt(
            b.call("equals", b.literal("go")),
            then=[b.expr_stmt(b.call("activate", b.ref(c)))]))
        b.statement(method, b.if_stmt(
            b.call("equals", b.literal("other")),
            then=[b.expr_stmt(b.call("send", b.literal("nope")))]))
        model = run_steps(b.model, "ExtractStates", "ExtractTransitions",
                          "ExtractActions")
        (t,) = machine_slot(model, "transitions")
        assert model.get_slot(t, "action") is None

    def test_unguarded_activation_scans_method_body(self):
        b = JavaModelBuilder()
        base = b.clazz("State", abstract=True)
        a = b.clazz("A", super_class=base)
        c = b.clazz("C", super_class=base)
        method = b.method(a, "handle")
        b.statement(method, b.expr_stmt(b.call("send", b.literal("boom"))))
        b.statement(method, b.expr_stmt(b.call("activate", b.ref(c))))
        model = run_steps(b.model, "ExtractStates", "ExtractTransitions",
                          "ExtractActions")
        (t,) = machine_slot(model, "transitions")
        assert model.get_slot(t, "action") == "boom"


class TestPrintTime:
    def test_full_pipeline_report_shape(self):
        report: list[str] = []
        migrate([gen_fixture(3, 1, 0, 42)], build_case_history(), report=report)
        assert len(report) == 5
        steps = [line for line in report if line.startswith("step ")]
        assert [line.split()[1] for line in steps] == [
            "ExtractStates", "ExtractTransitions", "ExtractTriggers",
            "ExtractActions"]
        total = int(report[-1].split()[1])
        assert report[-1].startswith("total ")
        assert all(total >= int(line.split()[2]) for line in steps)

    def test_no_model_mutation(self):
        history = create_history(case_metamodels(), CASE_REGISTRY)
        record_custom(history, [], migration_id="PrintTime")
        model = gen_fixture(2, 1, 0, 1)
        out = migrate([model], history)[0]
        assert models_isomorphic(out, model)


class TestEndToEnd:
    def test_golden_extraction(self):
        statemachine, report = run_case(gen_fixture(3, 1, 0, 42))
        assert models_isomorphic(statemachine, expected_f1_statemachine())
        golden = load_model(open("fixtures/f1.sm.golden.json").read(),
                            case_metamodels())
        assert models_isomorphic(statemachine, golden)
        assert len(report) == 5

    def test_trace_erasure(self):
        model = migrate([gen_fixture(3, 1, 0, 42)], build_case_history())[0]
        for el in model.elements.values():
            if el.class_fqn.startswith("sm."):
                assert "class" not in el.slots
                assert "reference" not in el.slots
        assert check_conformance(model) == []

    def test_padding_invariance_small(self):
        plain, _ = run_case(gen_fixture(3, 1, 0, 42))
        padded, _ = run_case(gen_fixture(3, 1, 37, 42))
        assert models_isomorphic(plain, padded)

    def test_soundness_by_brute_force(self):
        # partial pipeline so the trace associations are still present
        model = run_steps(gen_fixture(4, 2, 6, 13), "ExtractStates",
                          "ExtractTransitions", "ExtractTriggers",
                          "ExtractActions")
        parents = {}
        for el in model.elements.values():
            info = model.metamodels.info(el.class_fqn)
            for name, value in el.slots.items():
                feat = info.all_features.get(name)
                if feat is not None and feat.containment:
                    for child in value:
                        parents[child] = el.id

        def ancestors(eid):
            while eid is not None:
                yield eid
                eid = parents.get(eid)

        base = [el.id for el in model.elements.values()
                if el.class_fqn == "java.java.Class"
                and el.slots.get("name") == "State"][0]

        def is_concrete_state_class(cid):
            el = model.elements[cid]
            if el.class_fqn != "java.java.Class" or el.slots.get("abstract"):
                return False
            node = cid
            while node is not None:
                sup = model.elements[node].slots.get("superClass")
                node = sup[0] if sup else None
                if node == base:
                    return True
            return False

        for state in machine_slot(model, "states"):
            (implementing,) = model.get_slot(state, "class")
            assert is_concrete_state_class(implementing)
        for transition in machine_slot(model, "transitions"):
            (reference,) = model.get_slot(transition, "reference")
            enclosing_calls = [
                e for e in ancestors(parents.get(reference))
                if model.elements[e].class_fqn == "java.java.MethodCall"]
            assert enclosing_calls, "transition reference outside any call"
            assert model.get_slot(enclosing_calls[0], "methodName") == "activate"
            # source and target states sit in the same machine
            machine = machine_slot(model, "states")
            assert model.get_slot(transition, "source")[0] in machine
            assert model.get_slot(transition, "target")[0] in machine

    def test_extract_statemachine_requires_resource(self):
        model = Model(case_metamodels())
        model.add_resource("java")
        with pytest.raises(MigrationError, match="statemachine resource"):
            extract_statemachine(model)
