"""Benchmark workload determinism (timings vary, the workload must not)."""

from coevo.bench import build_bench_model, bench_inverse
from coevo.conformance import check_conformance
from coevo.model import save_model


def test_same_seed_same_workload():
    a = build_bench_model(120, seed=4)
    b = build_bench_model(120, seed=4)
    assert save_model(a) == save_model(b)


def test_bench_model_conforms():
    model = build_bench_model(80, seed=2)
    assert len(model.elements) == 80
    assert check_conformance(model) == []


def test_zero_queries_report_is_empty():
    report = bench_inverse(30, 0, seed=1)
    assert report.lines() == []
    assert report.queries == 0
