"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import random

import pytest

from coevo.errors import ModelEditError
from coevo.metamodel import MetamodelSet, metamodel_from_doc
from coevo.model import Model

# a small metamodel exercising containment, cross references and inheritance
LIB_METAMODEL_DOC = {
    "name": "lib",
    "packages": [{
        "name": "p",
        "classifiers": [
            {"kind": "class", "name": "Item", "abstract": False, "super": [],
             "features": [
                 {"kind": "attribute", "name": "name", "type": "string",
                  "lower": 0, "upper": 1},
                 {"kind": "reference", "name": "refs", "target": "lib.p.Item",
                  "containment": False, "lower": 0, "upper": "*"},
                 {"kind": "reference", "name": "kids", "target": "lib.p.Item",
                  "containment": True, "lower": 0, "upper": "*"},
             ]},
            {"kind": "class", "name": "Special", "abstract": False,
             "super": ["lib.p.Item"],
             "features": [
                 {"kind": "reference", "name": "peer", "target": "lib.p.Item",
                  "containment": False, "lower": 0, "upper": 1},
             ]},
        ],
    }],
}


@pytest.fixture
def lib_mms() -> MetamodelSet:
    return MetamodelSet([metamodel_from_doc(LIB_METAMODEL_DOC)])


def make_lib_mms() -> MetamodelSet:
    return MetamodelSet([metamodel_from_doc(LIB_METAMODEL_DOC)])


# -- independent oracles ------------------------------------------------------


def document_order_oracle(model: Model, mms: MetamodelSet) -> list[str]:
    """Recursive depth-first containment traversal, independent of the model's
    own rank cache."""
    order: list[str] = []

    def visit(eid: str) -> None:
        order.append(eid)
        el = model.elements[eid]
        info = mms.info(el.class_fqn)
        for feat in info.all_features.values():
            if not feat.containment:
                continue
            value = el.slots.get(feat.name)
            if isinstance(value, list):
                for child in value:
                    if child in model.elements:
                        visit(child)

    for res in model.resources:
        for root in res.roots:
            if root in model.elements:
                visit(root)
    return order


def inverse_oracle(model: Model, mms: MetamodelSet) -> dict:
    """Brute-force scan: (target id, (owner, feature)) -> referrers in document
    order.  One full pass over every slot of every element."""
    position = {eid: i for i, eid in enumerate(document_order_oracle(model, mms))}
    fallback = len(position)
    out: dict = {}
    for el in model.elements.values():
        info = mms.info(el.class_fqn)
        for name, value in el.slots.items():
            feat = info.all_features.get(name)
            if feat is None or feat.kind != "reference" or not isinstance(value, list):
                continue
            key = (feat.owner, feat.name)
            for target in set(value):
                out.setdefault((target, key), []).append(el.id)
    for sources in out.values():
        sources.sort(key=lambda s: (position.get(s, fallback), s))
    return out


def assert_inverse_matches_brute_force(model: Model, mms: MetamodelSet) -> int:
    """Compare get_inverse against the brute-force oracle for all pairs."""
    oracle = inverse_oracle(model, mms)
    checked = 0
    features = [f for c in mms.classes() for f in c.features if f.kind == "reference"]
    for eid in model.elements:
        for feat in features:
            expected = oracle.get((eid, (feat.owner, feat.name)), [])
            assert model.get_inverse(eid, feat) == expected, \
                f"inverse mismatch for ({eid}, {feat.fqn})"
            checked += 1
    return checked


# -- random model construction -------------------------------------------------


def random_lib_model(rng: random.Random, mms: MetamodelSet,
                     max_elements: int = 200, mutate_rounds: int = 0) -> Model:
    """A seeded model over the lib metamodel: random forest, references and
    (optionally) extra mutation rounds including deletions."""
    model = Model(mms)
    uris = ["r0"] if rng.random() < 0.5 else ["r0", "r1"]
    for uri in uris:
        model.add_resource(uri)
    n = rng.randint(1, max_elements)
    ids = []
    for i in range(n):
        cls = "lib.p.Special" if rng.random() < 0.3 else "lib.p.Item"
        eid = model.create_element(rng.choice(uris), cls)
        if rng.random() < 0.5:
            model.set_slot(eid, "name", f"item{i}")
        ids.append(eid)

    def mutate(rounds: int) -> None:
        for _ in range(rounds):
            action = rng.random()
            live = list(model.elements)
            if not live:
                return
            if action < 0.45:  # rewire references
                eid = rng.choice(live)
                count = rng.randint(0, min(3, len(live)))
                model.set_slot(eid, "refs", [rng.choice(live) for _ in range(count)])
            elif action < 0.75:  # containment moves (cycles are rejected)
                parent, child = rng.choice(live), rng.choice(live)
                current = model.get_slot(parent, "kids") or []
                try:
                    model.set_slot(parent, "kids", current + [child])
                except ModelEditError:
                    pass
            elif action < 0.9 and len(live) > 1:
                model.delete_element(rng.choice(live))
            else:
                eid = rng.choice(live)
                if model.elements[eid].class_fqn == "lib.p.Special":
                    model.set_slot(eid, "peer", [rng.choice(live)])

    mutate(n)  # initial wiring
    mutate(mutate_rounds)
    return model


# -- acceptance reporting ---------------------------------------------------------


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in report.nodeid:
                name = report.nodeid.split("::")[-1]
                lines.append((name, outcome.upper()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, outcome in sorted(lines):
            terminalreporter.write_line(f"{outcome:4}  {name}")
