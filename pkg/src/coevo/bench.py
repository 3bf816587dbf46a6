"""Micro-benchmark comparing forward slot reads with inverse navigation."""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass

from .metamodel import MetamodelSet, metamodel_from_doc
from .model import Model

_BENCH_METAMODEL = {
    "name": "bench",
    "packages": [{
        "name": "bench",
        "classifiers": [{
            "kind": "class", "name": "Node", "abstract": False, "super": [],
            "features": [
                {"kind": "attribute", "name": "name", "type": "string",
                 "lower": 1, "upper": 1},
                {"kind": "reference", "name": "children", "target": "bench.bench.Node",
                 "containment": True, "lower": 0, "upper": "*"},
                {"kind": "reference", "name": "links", "target": "bench.bench.Node",
                 "containment": False, "lower": 0, "upper": "*"},
            ],
        }],
    }],
}


@dataclass
class BenchReport:
    model_size: int
    queries: int
    forward_ns_median: float
    inverse_ns_median: float

    def lines(self) -> list[str]:
        if self.queries == 0:
            return []
        return [f"forward {self.forward_ns_median:.0f}",
                f"inverse {self.inverse_ns_median:.0f}"]


def build_bench_model(model_size: int, seed: int) -> Model:
    """A seeded containment tree with ~2 random cross links per node."""
    mms = MetamodelSet([metamodel_from_doc(_BENCH_METAMODEL)])
    rng = random.Random(seed)
    model = Model(mms)
    model.add_resource("bench")
    ids = []
    children: dict[str, list[str]] = {}
    for i in range(model_size):
        eid = model.create_element("bench", "bench.bench.Node")
        model.set_slot(eid, "name", f"n{i}")
        if ids:
            parent = ids[rng.randrange(len(ids))]
            children.setdefault(parent, []).append(eid)
        ids.append(eid)
    for parent, kids in children.items():
        model.set_slot(parent, "children", kids)
    for eid in ids:
        targets = [ids[rng.randrange(len(ids))] for _ in range(2)]
        model.set_slot(eid, "links", targets)
    return model


def bench_inverse(model_size: int, queries: int, seed: int) -> BenchReport:
    """Median per-query nanoseconds of forward reads vs get_inverse calls.

    The workload (model and query sequence) is fully determined by the seed;
    only the measured timings vary between runs.
    """
    model = build_bench_model(model_size, seed)
    rng = random.Random(seed + 1)
    ids = list(model.elements)
    links = model.metamodels.resolve("bench.bench.Node.links")
    forward_targets = [ids[rng.randrange(len(ids))] for _ in range(queries)]
    inverse_targets = [ids[rng.randrange(len(ids))] for _ in range(queries)]
    if queries == 0:
        return BenchReport(model_size, 0, 0.0, 0.0)

    model.get_inverse(inverse_targets[0], links)  # warm the rank cache
    get_slot, get_inverse = model.get_slot, model.get_inverse
    clock = time.perf_counter_ns
    forward_ns = [0] * queries
    inverse_ns = [0] * queries

    # interleaved so ambient noise (GC, frequency scaling) hits both alike
    import gc
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for i in range(queries):
            eid = forward_targets[i]
            t0 = clock()
            get_slot(eid, links)
            forward_ns[i] = clock() - t0
            eid = inverse_targets[i]
            t0 = clock()
            get_inverse(eid, links)
            inverse_ns[i] = clock() - t0
    finally:
        if gc_was_enabled:
            gc.enable()

    return BenchReport(model_size, queries,
                       statistics.median(forward_ns),
                       statistics.median(inverse_ns))
