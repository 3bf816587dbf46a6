"""The flagship pipeline: extracting a statemachine from a program syntax graph."""

from .fixtures import JavaModelBuilder, gen_fixture
from .metamodels import case_metamodels, JAVA_METAMODEL_DOC, SM_METAMODEL_DOC
from .migrations import CASE_REGISTRY
from .pipeline import build_case_history, extract_statemachine, run_case

__all__ = [
    "JavaModelBuilder",
    "gen_fixture",
    "case_metamodels",
    "JAVA_METAMODEL_DOC",
    "SM_METAMODEL_DOC",
    "CASE_REGISTRY",
    "build_case_history",
    "extract_statemachine",
    "run_case",
]
