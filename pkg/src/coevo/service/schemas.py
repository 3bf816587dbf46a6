"""Request/response bodies of the operation browser service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    metamodels: list[dict] = Field(default_factory=list)
    models: list[dict] = Field(default_factory=list)
    history: Optional[dict] = None


class SessionCreated(BaseModel):
    id: str
    revision: int


class MetamodelsResponse(BaseModel):
    metamodels: dict[str, dict]
    revision: int


class ParameterView(BaseModel):
    name: str
    type: str


class OperationView(BaseModel):
    name: str
    parameters: list[ParameterView]
    prefilled: dict[str, Any]
    applicable: bool
    messages: list[str]


class OperationsResponse(BaseModel):
    operations: list[OperationView]
    revision: int


class ApplyRequest(BaseModel):
    bindings: dict[str, Any] = Field(default_factory=dict)
    revision: int


class ApplyResponse(BaseModel):
    record: dict
    revision: int


class ReleaseRequest(BaseModel):
    revision: int
    force: bool = False


class RevisionResponse(BaseModel):
    revision: int


class RecordView(BaseModel):
    kind: str
    label: str
    opName: Optional[str] = None
    bindings: Optional[dict[str, Any]] = None
    migrationId: Optional[str] = None
    primitiveCount: int = 0


class HistoryResponse(BaseModel):
    releases: list[list[RecordView]]
    open: list[RecordView]
    revision: int


class MigrateRequest(BaseModel):
    uri: Optional[str] = None
    model: Optional[dict] = None
    revision: Optional[int] = None


class MigrateResponse(BaseModel):
    report: list[str]
    model: Optional[dict] = None
    revision: int


class SaveRequest(BaseModel):
    path: str
    revision: Optional[int] = None


class SaveResponse(BaseModel):
    files: list[str]
    revision: int


class ErrorBody(BaseModel):
    code: str
    messages: list[str]
