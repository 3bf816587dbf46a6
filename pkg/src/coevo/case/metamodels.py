"""The two metamodels of the reengineering case.

``java`` is a reduced program-syntax metamodel (domain data describing the
subject programs, not an implementation language); ``sm`` is the target
statemachine metamodel.  Both are defined as documents so the shipped fixture
files are bit-identical to what the builders produce.
"""

from __future__ import annotations

from ..metamodel import MetamodelSet, metamodel_from_doc


def _cls(name, features=(), abstract=False, super_types=()):
    return {"kind": "class", "name": name, "abstract": abstract,
            "super": list(super_types), "features": list(features)}


def _attr(name, value_type, lower=1):
    return {"kind": "attribute", "name": name, "type": value_type,
            "lower": lower, "upper": 1}


def _ref(name, target, containment=False, lower=0, upper="*"):
    return {"kind": "reference", "name": name, "target": target,
            "containment": containment, "lower": lower, "upper": upper}


JAVA_METAMODEL_DOC = {
    "name": "java",
    "packages": [{
        "name": "java",
        "classifiers": [
            _cls("Model", [_ref("classes", "java.java.Class", containment=True)]),
            _cls("Class", [
                _attr("name", "string"),
                _attr("abstract", "boolean"),
                _ref("superClass", "java.java.Class", upper=1),
                _ref("methods", "java.java.Method", containment=True),
            ]),
            _cls("Method", [
                _attr("name", "string"),
                _ref("statements", "java.java.Statement", containment=True),
            ]),
            _cls("Statement", abstract=True),
            _cls("ExpressionStatement",
                 [_ref("expression", "java.java.Expression",
                       containment=True, lower=1, upper=1)],
                 super_types=["java.java.Statement"]),
            _cls("IfStatement", [
                _ref("condition", "java.java.Expression",
                     containment=True, lower=1, upper=1),
                _ref("then", "java.java.Statement", containment=True),
                _ref("else", "java.java.Statement", containment=True),
            ], super_types=["java.java.Statement"]),
            _cls("Expression", abstract=True),
            _cls("MethodCall", [
                _attr("methodName", "string"),
                _ref("arguments", "java.java.Expression", containment=True),
            ], super_types=["java.java.Expression"]),
            _cls("ElementReference",
                 [_ref("target", "java.java.Class", lower=1, upper=1)],
                 super_types=["java.java.Expression"]),
            _cls("StringLiteral", [_attr("value", "string")],
                 super_types=["java.java.Expression"]),
        ],
    }],
}

SM_METAMODEL_DOC = {
    "name": "sm",
    "packages": [{
        "name": "sm",
        "classifiers": [
            _cls("StateMachine", [
                _ref("states", "sm.sm.State", containment=True),
                _ref("transitions", "sm.sm.Transition", containment=True),
            ]),
            _cls("State", [_attr("name", "string")]),
            _cls("Transition", [
                _ref("source", "sm.sm.State", lower=1, upper=1),
                _ref("target", "sm.sm.State", lower=1, upper=1),
                _attr("trigger", "string", lower=0),
                _attr("action", "string", lower=0),
            ]),
        ],
    }],
}


def case_metamodels() -> MetamodelSet:
    """A fresh, mutable metamodel set holding the java and sm metamodels."""
    mms = MetamodelSet([metamodel_from_doc(JAVA_METAMODEL_DOC),
                        metamodel_from_doc(SM_METAMODEL_DOC)])
    mms.validate()
    return mms
