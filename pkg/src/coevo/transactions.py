"""Transactional execution of coupled operations.

While a coupled operation runs, the conformance rules multiplicity-lower,
dangling-reference and abstract-instantiation are suspended so metamodel
adaptation and model migration can be written as plain in-place edits.  At
the transaction boundary the full conformance check must come back empty;
otherwise models and metamodels are restored from the entry snapshot.
"""

from __future__ import annotations

from typing import Callable, Sequence

from .conformance import check_conformance
from .errors import TransactionError
from .metamodel import MetamodelSet
from .model import Model


def execute_transaction(models: Sequence[Model], metamodels: MetamodelSet,
                        body: Callable[[], None], *, check_entry: bool = True) -> None:
    """Run ``body`` atomically over ``models`` and ``metamodels``.

    On any failure (body exception or boundary violations) the inputs are
    restored bit-identically from the entry snapshot; boundary violations
    raise :class:`TransactionError` carrying the violation list, body
    exceptions propagate unchanged after the rollback.
    """
    if check_entry:
        for m in models:
            violations = check_conformance(m, metamodels)
            if violations:
                raise TransactionError("entry", violations)
    mm_snapshot = metamodels.docs()
    model_snapshots = [m.to_doc() for m in models]

    def rollback() -> None:
        metamodels.restore_from(mm_snapshot)
        for m, snap in zip(models, model_snapshots):
            m.restore_from(snap)

    for m in models:
        m._softened = True
    try:
        body()
    except Exception:
        rollback()
        raise
    finally:
        for m in models:
            m._softened = False

    violations = [v for m in models for v in check_conformance(m, metamodels)]
    if violations:
        rollback()
        raise TransactionError("boundary", violations)
