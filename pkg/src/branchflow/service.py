"""HTTP service exposing parse and run over a small JSON API.

Domain failures (bad documents, width over the cap) come back as 200 responses
with ``ok: false`` and a structured error, so clients can map them onto the
same exit-code semantics as the in-process path; transport-level failures keep
their HTTP status codes.
"""
from __future__ import annotations

from typing import Literal, Optional

from fastapi import FastAPI
from pydantic import BaseModel

from .documents import parse, render
from .errors import BranchflowError, ParseError
from .runner import emit, orchestrate

__version__ = "0.1.0"

app = FastAPI(
    title="branchflow",
    version=__version__,
    description="Reversible-network, ensemble, and Heisenberg-descriptor runs",
)


class ErrorInfo(BaseModel):
    message: str
    line: Optional[int] = None
    column: Optional[int] = None


class ParseRequest(BaseModel):
    document: str


class ParseResponse(BaseModel):
    ok: bool
    canonical: Optional[str] = None
    error: Optional[ErrorInfo] = None


class RunRequest(BaseModel):
    document: str
    emit: Literal["csv", "dot", "json"] = "json"
    tolerance: Optional[float] = None
    max_qubits: Optional[int] = None


class RunResponse(BaseModel):
    ok: bool
    passed: Optional[bool] = None
    output: Optional[str] = None
    error: Optional[ErrorInfo] = None


def _error_info(exc: BranchflowError) -> ErrorInfo:
    if isinstance(exc, ParseError):
        return ErrorInfo(message=str(exc), line=exc.line, column=exc.column)
    return ErrorInfo(message=str(exc))


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/parse", response_model=ParseResponse)
def parse_document(req: ParseRequest) -> ParseResponse:
    try:
        doc = parse(req.document)
    except BranchflowError as exc:
        return ParseResponse(ok=False, error=_error_info(exc))
    return ParseResponse(ok=True, canonical=render(doc))


@app.post("/run", response_model=RunResponse)
def run_document(req: RunRequest) -> RunResponse:
    try:
        doc = parse(req.document)
        result = orchestrate(doc, tolerance=req.tolerance, max_qubits=req.max_qubits)
        output = emit(result, req.emit)
    except BranchflowError as exc:
        return RunResponse(ok=False, error=_error_info(exc))
    return RunResponse(ok=True, passed=result.passed, output=output)
