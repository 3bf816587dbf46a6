"""HTTP/JSON facade for the operation browser.

Sessions are in-memory: each holds a live metamodel set, the open history
and optionally attached models.  Mutations are serialized per session and
guarded by an optimistic revision token; a rejected request never advances
the revision.  The service adds no semantics of its own — every endpoint is
a thin wrapper around the corresponding engine call.
"""

from __future__ import annotations

import threading
import uuid
from pathlib import Path
from typing import Optional, Sequence

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from ..case import CASE_REGISTRY
from ..catalog import (CLASS_REF, ELEMENT_REF, ENUM_REF, FEATURE_REF,
                       _OPERATIONS)
from ..errors import (ConstraintViolation, EngineError, ResolveError,
                      TransactionError)
from ..history import (History, apply_operation, create_history, load_history,
                       migrate, release, save_history)
from ..metamodel import (Class, Enumeration, Feature, MetamodelSet,
                         load_metamodel, save_metamodel)
from ..model import Model, model_from_doc, save_model
from .schemas import (ApplyRequest, ApplyResponse, CreateSessionRequest,
                      ErrorBody, HistoryResponse, MetamodelsResponse,
                      MigrateRequest, MigrateResponse, OperationsResponse,
                      OperationView, ParameterView, RecordView,
                      ReleaseRequest, RevisionResponse, SaveRequest,
                      SaveResponse, SessionCreated)


class Session:
    def __init__(self, session_id: str, history: History, models: list[Model]):
        self.id = session_id
        self.history = history
        self.models = models
        self.revision = 0
        self.lock = threading.Lock()

    @property
    def metamodels(self) -> MetamodelSet:
        return self.history.metamodels


class ServiceError(Exception):
    def __init__(self, status: int, code: str, messages: Sequence[str]):
        super().__init__("; ".join(messages))
        self.status = status
        self.code = code
        self.messages = list(messages)


def _error(status: int, code: str, messages: Sequence[str]) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content=ErrorBody(code=code, messages=list(messages)).model_dump())


def _record_view(record) -> RecordView:
    if record.kind == "operation":
        bindings = record.binding_dict()
        rendered = ", ".join(f"{k}={v}" for k, v in bindings.items())
        return RecordView(kind="operation", label=f"{record.op_name}({rendered})",
                          opName=record.op_name, bindings=bindings)
    label = record.migration_id or f"{len(record.primitives)} metamodel change(s)"
    return RecordView(kind="custom", label=label, migrationId=record.migration_id,
                      primitiveCount=len(record.primitives))


def _compatible(param_type: str, element) -> bool:
    if param_type == CLASS_REF:
        return isinstance(element, Class)
    if param_type == FEATURE_REF:
        return isinstance(element, Feature)
    if param_type == ENUM_REF:
        return isinstance(element, Enumeration)
    if param_type == ELEMENT_REF:
        return isinstance(element, (Class, Enumeration, Feature))
    return False


def _prefill(op, selection: list[str], metamodels: MetamodelSet) -> dict:
    """First selected FQN fills the first type-compatible parameter."""
    bindings: dict = {}
    for fqn in selection:
        element = metamodels.resolve(fqn)
        for param in op.parameters:
            if param.name in bindings:
                continue
            if _compatible(param.type, element):
                bindings[param.name] = fqn
                break
    return bindings


def create_app() -> FastAPI:
    app = FastAPI(title="coevo operation browser service")
    sessions: dict[str, Session] = {}

    def _session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise ServiceError(404, "unknown-session",
                               [f"no session {session_id!r}"])
        return session

    def _check_revision(session: Session, revision: Optional[int]) -> None:
        if revision is None or revision != session.revision:
            raise ServiceError(409, "conflict",
                               [f"revision {revision} is stale; "
                                f"current revision is {session.revision}"])

    @app.exception_handler(ServiceError)
    async def _service_error(_request, exc: ServiceError):
        return _error(exc.status, exc.code, exc.messages)

    @app.exception_handler(EngineError)
    async def _engine_error(_request, exc: EngineError):
        if isinstance(exc, ConstraintViolation):
            return _error(422, "constraint-violation", exc.messages)
        if isinstance(exc, TransactionError):
            return _error(422, "transaction-failed",
                          [v.message for v in exc.violations] or [str(exc)])
        if isinstance(exc, ResolveError):
            return _error(400, "unknown-element", [str(exc)])
        return _error(400, "engine-error", [str(exc)])

    @app.post("/sessions", response_model=SessionCreated)
    def create_session(body: CreateSessionRequest):
        if body.history is not None:
            history = load_history(body.history, CASE_REGISTRY)
        else:
            if not body.metamodels:
                raise ServiceError(400, "engine-error",
                                   ["a session needs metamodel documents or a history"])
            metamodels = MetamodelSet([load_metamodel(doc)
                                       for doc in body.metamodels])
            history = create_history(metamodels, CASE_REGISTRY)
        models = [model_from_doc(doc, history.metamodels) for doc in body.models]
        session = Session(uuid.uuid4().hex[:12], history, models)
        sessions[session.id] = session
        return SessionCreated(id=session.id, revision=session.revision)

    @app.get("/sessions/{session_id}/metamodels", response_model=MetamodelsResponse)
    def get_metamodels(session_id: str):
        session = _session(session_id)
        with session.lock:
            return MetamodelsResponse(metamodels=session.metamodels.docs(),
                                      revision=session.revision)

    @app.get("/sessions/{session_id}/operations", response_model=OperationsResponse)
    def list_operations(session_id: str, selection: str = ""):
        session = _session(session_id)
        selected = [s for s in selection.split(",") if s]
        with session.lock:
            views = []
            for op in _OPERATIONS.values():
                prefilled = _prefill(op, selected, session.metamodels)
                results = op.evaluate_constraints(prefilled, session.metamodels,
                                                  session.models)
                messages = [c.message for c, ok in results if ok is False]
                views.append(OperationView(
                    name=op.name,
                    parameters=[ParameterView(name=p.name, type=p.type)
                                for p in op.parameters],
                    prefilled=prefilled,
                    applicable=not messages,
                    messages=messages))
            return OperationsResponse(operations=views, revision=session.revision)

    @app.post("/sessions/{session_id}/operations/{op_name}",
              response_model=ApplyResponse)
    def apply_op(session_id: str, op_name: str, body: ApplyRequest):
        session = _session(session_id)
        with session.lock:
            _check_revision(session, body.revision)
            record = apply_operation(session.history, session.models,
                                     op_name, dict(body.bindings))
            session.revision += 1
            return ApplyResponse(record=record.to_doc(), revision=session.revision)

    @app.post("/sessions/{session_id}/release", response_model=RevisionResponse)
    def release_session(session_id: str, body: ReleaseRequest):
        session = _session(session_id)
        with session.lock:
            _check_revision(session, body.revision)
            release(session.history, force=body.force)
            session.revision += 1
            return RevisionResponse(revision=session.revision)

    @app.get("/sessions/{session_id}/history", response_model=HistoryResponse)
    def get_history(session_id: str):
        session = _session(session_id)
        with session.lock:
            return HistoryResponse(
                releases=[[_record_view(r) for r in rel]
                          for rel in session.history.sealed],
                open=[_record_view(r) for r in session.history.open],
                revision=session.revision)

    @app.post("/sessions/{session_id}/migrate", response_model=MigrateResponse)
    def run_migration(session_id: str, body: MigrateRequest):
        session = _session(session_id)
        with session.lock:
            report: list[str] = []
            if body.model is not None:
                source = model_from_doc(body.model, session.metamodels)
                migrated = migrate([source], session.history, report=report)[0]
                return MigrateResponse(report=report, model=migrated.to_doc(),
                                       revision=session.revision)
            if body.uri is None:
                raise ServiceError(400, "engine-error",
                                   ["migrate needs a model document or a uri"])
            _check_revision(session, body.revision)
            index = next((i for i, m in enumerate(session.models)
                          if m.resource(body.uri) is not None), None)
            if index is None:
                raise ServiceError(404, "unknown-model",
                                   [f"no attached model has resource {body.uri!r}"])
            migrated = migrate([session.models[index]], session.history,
                               report=report)[0]
            session.models[index] = migrated
            session.revision += 1
            return MigrateResponse(report=report, model=migrated.to_doc(),
                                   revision=session.revision)

    @app.post("/sessions/{session_id}/save", response_model=SaveResponse)
    def save_session(session_id: str, body: SaveRequest):
        session = _session(session_id)
        with session.lock:
            target = Path(body.path)
            target.mkdir(parents=True, exist_ok=True)
            files = []

            def write(name: str, text: str) -> None:
                (target / name).write_text(text, encoding="utf-8")
                files.append(name)

            write("history.json", save_history(session.history))
            for name, mm in session.metamodels.metamodels.items():
                write(f"{name}.mm.json", save_metamodel(mm))
            for i, model in enumerate(session.models):
                write(f"model-{i}.json", save_model(model))
            return SaveResponse(files=files, revision=session.revision)

    return app


app = create_app()
