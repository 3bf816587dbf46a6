"""The explicit history model: recorded coupled operations, releases, replay.

A history starts from a snapshot of its metamodels and accumulates change
records in an open release; sealing a release publishes a metamodel version.
Replaying the records over the snapshot reproduces the current metamodels,
and replaying them over a model set migrates the models between releases.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import (ConstraintViolation, HistoryError, MetamodelFormatError,
                     ResolveError)
from .metamodel import (MetamodelSet, metamodel_from_doc,
                        _classifier_from_doc, _feature_from_doc)
from .model import Model, model_from_doc
from .transactions import execute_transaction

# -- primitive metamodel changes ----------------------------------------------

CREATE_CLASSIFIER = "create-classifier"
DELETE_CLASSIFIER = "delete-classifier"
CREATE_FEATURE = "create-feature"
DELETE_FEATURE = "delete-feature"
SET_PROPERTY = "set-property"

_SETTABLE_PROPS = ("name", "abstract", "lower", "upper", "target")


@dataclass(frozen=True)
class PrimitiveChange:
    """One invertible metamodel edit; ``old`` values are captured on apply."""

    kind: str
    args: tuple  # sorted (key, value) pairs, values JSON-shaped

    def get(self, key: str, default=None):
        for k, v in self.args:
            if k == key:
                return v
        return default

    def to_doc(self) -> dict:
        doc = {"kind": self.kind}
        doc.update({k: _thaw(v) for k, v in self.args})
        return doc

    @staticmethod
    def from_doc(doc: dict) -> "PrimitiveChange":
        kind = doc.get("kind")
        if kind not in (CREATE_CLASSIFIER, DELETE_CLASSIFIER, CREATE_FEATURE,
                        DELETE_FEATURE, SET_PROPERTY):
            raise HistoryError(f"unknown primitive kind {kind!r}")
        return _prim(kind, **{k: v for k, v in doc.items() if k != "kind"})


def _freeze(value):
    if isinstance(value, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in value.items()))
    if isinstance(value, list):
        return ("__list__",) + tuple(_freeze(v) for v in value)
    return value


def _thaw(value):
    if isinstance(value, tuple):
        if value and value[0] == "__list__":
            return [_thaw(v) for v in value[1:]]
        return {k: _thaw(v) for k, v in value}
    return value


def _prim(kind: str, **kwargs) -> PrimitiveChange:
    return PrimitiveChange(kind, tuple(sorted((k, _freeze(v)) for k, v in kwargs.items())))


def create_classifier(package: str, classifier: dict) -> PrimitiveChange:
    return _prim(CREATE_CLASSIFIER, package=package, classifier=classifier)


def delete_classifier(fqn: str) -> PrimitiveChange:
    return _prim(DELETE_CLASSIFIER, fqn=fqn)


def create_feature(class_fqn: str, feature: dict) -> PrimitiveChange:
    return _prim(CREATE_FEATURE, **{"class": class_fqn, "feature": feature})


def delete_feature(feature_fqn: str) -> PrimitiveChange:
    return _prim(DELETE_FEATURE, feature=feature_fqn)


def set_property(target_fqn: str, prop: str, new) -> PrimitiveChange:
    if prop not in _SETTABLE_PROPS:
        raise HistoryError(f"unknown settable property {prop!r}")
    return _prim(SET_PROPERTY, target=target_fqn, property=prop, new=new)


def apply_primitive(metamodels: MetamodelSet, prim: PrimitiveChange) -> PrimitiveChange:
    """Apply one primitive; returns it enriched with captured old values."""
    try:
        if prim.kind == CREATE_CLASSIFIER:
            classifier = _classifier_from_doc(_thaw(prim.get("classifier")))
            metamodels.add_classifier(prim.get("package"), classifier)
            return prim
        if prim.kind == DELETE_CLASSIFIER:
            fqn = prim.get("fqn")
            element = metamodels.resolve(fqn)
            old = element.to_doc()
            package = element.owner
            metamodels.remove_classifier(fqn)
            return _prim(DELETE_CLASSIFIER, fqn=fqn, package=package, old=old)
        if prim.kind == CREATE_FEATURE:
            feature = _feature_from_doc(_thaw(prim.get("feature")))
            metamodels.add_feature(prim.get("class"), feature)
            return prim
        if prim.kind == DELETE_FEATURE:
            fqn = prim.get("feature")
            old = metamodels.resolve(fqn).to_doc()
            metamodels.remove_feature(fqn)
            return _prim(DELETE_FEATURE, feature=fqn, old=old)
        if prim.kind == SET_PROPERTY:
            target, prop, new = prim.get("target"), prim.get("property"), prim.get("new")
            element = metamodels.resolve(target)
            if prop == "name":
                old = element.name
                metamodels.rename(target, new)
            elif prop == "abstract":
                old = element.abstract
                metamodels.set_abstract(target, new)
            else:
                old = getattr(element, prop)
                if prop == "upper" and old is None:
                    old = "*"
                metamodels.set_feature_property(target, prop, new)
            return _prim(SET_PROPERTY, target=target, property=prop, new=new, old=old)
    except (MetamodelFormatError, ResolveError) as exc:
        raise HistoryError(f"invalid primitive {prim.kind}: {exc}") from exc
    raise HistoryError(f"unknown primitive kind {prim.kind!r}")


# -- change records -------------------------------------------------------------


@dataclass(frozen=True)
class ChangeRecord:
    kind: str  # "operation" | "custom"
    op_name: Optional[str] = None
    bindings: tuple = ()  # sorted (param, value) pairs
    primitives: tuple = ()  # PrimitiveChange sequence
    migration_id: Optional[str] = None

    def binding_dict(self) -> dict:
        return dict(self.bindings)

    def to_doc(self) -> dict:
        if self.kind == "operation":
            return {"kind": "operation",
                    "operation": {"opName": self.op_name,
                                  "bindings": dict(self.bindings)}}
        custom: dict = {"primitives": [p.to_doc() for p in self.primitives]}
        if self.migration_id is not None:
            custom["migrationId"] = self.migration_id
        return {"kind": "custom", "custom": custom}

    @staticmethod
    def from_doc(doc: dict) -> "ChangeRecord":
        kind = doc.get("kind")
        if kind == "operation":
            op = doc.get("operation", {})
            return ChangeRecord(
                "operation", op_name=op.get("opName"),
                bindings=tuple(sorted(op.get("bindings", {}).items())))
        if kind == "custom":
            custom = doc.get("custom", {})
            return ChangeRecord(
                "custom",
                primitives=tuple(PrimitiveChange.from_doc(p)
                                 for p in custom.get("primitives", [])),
                migration_id=custom.get("migrationId"))
        raise HistoryError(f"unknown record kind {kind!r}")


# -- migration registry -----------------------------------------------------------


class MigrationContext:
    """What a custom migration sees: the model set plus metamodel access."""

    def __init__(self, models: Sequence[Model], metamodels: MetamodelSet,
                 report: Optional[list[str]] = None):
        self.models = list(models)
        self.metamodels = metamodels
        self.report = report if report is not None else []
        self.step_times: list[tuple[str, float]] = []  # (migration id, millis)
        self.started = time.perf_counter()

    @property
    def model(self) -> Model:
        return self.models[0]

    def resolve(self, fq_name: str):
        return self.metamodels.resolve(fq_name)

    def elapsed_ms(self) -> float:
        return (time.perf_counter() - self.started) * 1000.0


Migration = Callable[[MigrationContext], None]


class MigrationRegistry:
    def __init__(self):
        self._migrations: dict[str, Migration] = {}

    def register(self, migration_id: str, fn: Optional[Migration] = None):
        if migration_id in self._migrations:
            raise HistoryError(f"migration id {migration_id!r} already registered")

        def add(f: Migration) -> Migration:
            self._migrations[migration_id] = f
            return f

        return add(fn) if fn is not None else add

    def get(self, migration_id: str) -> Migration:
        fn = self._migrations.get(migration_id)
        if fn is None:
            raise HistoryError(f"unknown migration id {migration_id!r}")
        return fn

    def __contains__(self, migration_id: str) -> bool:
        return migration_id in self._migrations


# -- the history itself ----------------------------------------------------------


class History:
    def __init__(self, metamodels: MetamodelSet, registry: MigrationRegistry,
                 initial_snapshots: dict[str, dict]):
        self.metamodels = metamodels  # live set, mutated by recorded changes
        self.registry = registry
        self.initial_snapshots = initial_snapshots
        self.sealed: list[list[ChangeRecord]] = []
        self.open: list[ChangeRecord] = []

    @property
    def metamodel_names(self) -> list[str]:
        return list(self.initial_snapshots)

    def all_records(self) -> list[ChangeRecord]:
        return [r for release in self.sealed for r in release] + list(self.open)

    def to_doc(self) -> dict:
        return {"metamodels": self.metamodel_names,
                "initialSnapshots": {n: dict(d) for n, d in self.initial_snapshots.items()},
                "releases": [[r.to_doc() for r in release]
                             for release in self.sealed + [self.open]]}


def create_history(metamodels: MetamodelSet,
                   registry: Optional[MigrationRegistry] = None) -> History:
    """Snapshot the metamodels and start recording into one open release."""
    if not metamodels.names():
        raise HistoryError("cannot create a history over an empty metamodel set")
    metamodels.validate()
    snapshots = {name: mm.to_doc() for name, mm in metamodels.metamodels.items()}
    return History(metamodels, registry or MigrationRegistry(), snapshots)


def release(history: History, force: bool = False) -> None:
    if not history.open and not force:
        raise HistoryError("refusing to release an empty change set (use force)")
    history.sealed.append(history.open)
    history.open = []


def record_custom(history: History, primitives: Sequence[PrimitiveChange],
                  migration_id: Optional[str] = None,
                  models: Sequence[Model] = ()) -> ChangeRecord:
    """Apply primitive metamodel changes and append a custom record.

    The attached migration runs right away only when models are present in
    the session; otherwise it runs when the history is replayed over models.
    """
    if migration_id is not None and migration_id not in history.registry:
        raise HistoryError(f"unknown migration id {migration_id!r}")
    enriched: list[PrimitiveChange] = []
    if models:
        migration = history.registry.get(migration_id) if migration_id else None

        def body() -> None:
            for prim in primitives:
                enriched.append(apply_primitive(history.metamodels, prim))
            if migration is not None:
                migration(MigrationContext(models, history.metamodels))

        execute_transaction(models, history.metamodels, body)
    else:
        snapshot = history.metamodels.docs()
        try:
            for prim in primitives:
                enriched.append(apply_primitive(history.metamodels, prim))
        except Exception:
            history.metamodels.restore_from(snapshot)
            raise
    record = ChangeRecord("custom", primitives=tuple(enriched),
                          migration_id=migration_id)
    history.open.append(record)
    return record


def apply_operation(history: History, models: Sequence[Model], op_name: str,
                    bindings: dict) -> ChangeRecord:
    """Execute a reusable coupled operation and record its application."""
    from .catalog import get_operation

    op = get_operation(op_name)
    op.validate_bindings(bindings, history.metamodels)
    messages = op.failed_constraints(bindings, history.metamodels, models)
    if messages:
        raise ConstraintViolation(messages)
    op.require_complete(bindings)

    def body() -> None:
        op.adapt(history.metamodels, bindings)
        op.migrate(models, history.metamodels, bindings)

    execute_transaction(models, history.metamodels, body)
    record = ChangeRecord("operation", op_name=op_name,
                          bindings=tuple(sorted(bindings.items())))
    history.open.append(record)
    return record


# -- replay ------------------------------------------------------------------------


def _apply_record_metamodel_only(metamodels: MetamodelSet, record: ChangeRecord) -> None:
    if record.kind == "operation":
        from .catalog import get_operation
        op = get_operation(record.op_name)
        op.adapt(metamodels, record.binding_dict())
    else:
        for prim in record.primitives:
            apply_primitive(metamodels, prim)


def reconstruct_metamodels(history: History,
                           to_release: Optional[int] = None) -> MetamodelSet:
    """Replay records over the initial snapshot; None replays everything."""
    mms = MetamodelSet([metamodel_from_doc(d)
                        for d in history.initial_snapshots.values()])
    spans = history.sealed if to_release is None else history.sealed[:to_release]
    for release_records in spans:
        for record in release_records:
            _apply_record_metamodel_only(mms, record)
    if to_release is None:
        for record in history.open:
            _apply_record_metamodel_only(mms, record)
    return mms


def migrate(models: Sequence[Model], history: History,
            from_release: int = 0, to_release: Optional[int] = None,
            report: Optional[list[str]] = None) -> list[Model]:
    """Replay the history over copies of ``models``; inputs stay untouched.

    ``from_release``/``to_release`` index sealed releases; the defaults span
    the whole history (including the open release).
    """
    n_sealed = len(history.sealed)
    if not 0 <= from_release <= n_sealed:
        raise HistoryError(f"fromRelease {from_release} out of range 0..{n_sealed}")
    if to_release is not None and not from_release <= to_release <= n_sealed:
        raise HistoryError(f"toRelease {to_release} out of range")

    mms = reconstruct_metamodels(history, from_release)
    copies = [model_from_doc(m.to_doc(), mms) for m in models]
    spans = history.sealed[from_release:] if to_release is None \
        else history.sealed[from_release:to_release]
    records = [r for release_records in spans for r in release_records]
    if to_release is None:
        records.extend(history.open)

    ctx = MigrationContext(copies, mms, report)
    first = True
    for record in records:
        if record.kind == "operation":
            from .catalog import get_operation
            op = get_operation(record.op_name)
            bindings = record.binding_dict()
            op.validate_bindings(bindings, mms)
            messages = op.failed_constraints(bindings, mms, copies)
            if messages:
                raise ConstraintViolation(messages)

            def body(op=op, bindings=bindings) -> None:
                op.adapt(mms, bindings)
                op.migrate(copies, mms, bindings)
        else:
            migration = history.registry.get(record.migration_id) \
                if record.migration_id else None

            def body(record=record, migration=migration) -> None:
                for prim in record.primitives:
                    apply_primitive(mms, prim)
                if migration is not None:
                    migration(ctx)

        started = time.perf_counter()
        execute_transaction(copies, mms, body, check_entry=first)
        first = False
        if record.kind == "custom" and record.migration_id:
            ctx.step_times.append(
                (record.migration_id, (time.perf_counter() - started) * 1000.0))
    return copies


# -- persistence ---------------------------------------------------------------------


def save_history(history: History) -> str:
    return json.dumps(history.to_doc(), sort_keys=True, indent=2) + "\n"


def load_history(text: str | dict,
                 registry: Optional[MigrationRegistry] = None) -> History:
    if isinstance(text, str):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise HistoryError(
                f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    else:
        doc = text
    registry = registry or MigrationRegistry()
    snapshots = {str(k): v for k, v in doc.get("initialSnapshots", {}).items()}
    names = [str(n) for n in doc.get("metamodels", list(snapshots))]
    if sorted(names) != sorted(snapshots):
        raise HistoryError("metamodel name list does not match initial snapshots")
    snapshots = {n: snapshots[n] for n in names}
    releases = [[ChangeRecord.from_doc(r) for r in release_records]
                for release_records in doc.get("releases", [[]])]
    if not releases:
        releases = [[]]
    from .catalog import get_operation
    for release_records in releases:
        for record in release_records:
            if record.kind == "operation":
                get_operation(record.op_name)  # raises on unknown operations
            elif record.migration_id is not None and record.migration_id not in registry:
                raise HistoryError(f"unknown migration id {record.migration_id!r}")
    history = History(MetamodelSet([metamodel_from_doc(d) for d in snapshots.values()]),
                      registry, snapshots)
    history.sealed = releases[:-1]
    history.open = releases[-1]
    # bring the live metamodels up to date with the recorded changes
    history.metamodels = reconstruct_metamodels(history)
    return history
