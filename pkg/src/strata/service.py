"""Local HTTP service backing the audit workbench.

Single-session: one evaluation set, one schema, one audit log per process.
All endpoints speak JSON; errors are {error, detail} with an appropriate
status code. Tag mutations funnel through one lock so the event log never
interleaves, and computed reports are cached keyed by the event count.

This is a localhost review tool: no authentication, not safe to expose on a
network.
"""

from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .audit import AuditState, audit_snapshot, build_error_queue, merged_set
from .cluster import detect_hidden_strata, kernels
from .errors import AuditError, ClusterError, StrataError
from .io import load_evaluation_set, load_schema
from .model import EvaluationSet, Schema, validate_against_schema

__all__ = ["SessionConfig", "Session", "create_app"]

_QUEUE_KIND_ALIASES = {"fn": "false_negative", "fp": "false_positive"}


@dataclass(frozen=True)
class SessionConfig:
    data: Path
    schema: Path
    embeddings: Path | None = None
    audit_log: Path | None = None
    threshold: float = 0.5
    alpha: float = 0.05
    bootstrap_b: int = 1000
    seed: int = 0
    ks: tuple[int, ...] = (2, 3, 4, 5)
    min_size: int = 100
    max_iter: int = 300
    tol: float = 1e-6
    normalize: bool = False
    ui_dir: Path | None = None


@dataclass
class _Caches:
    report: tuple[int, dict] | None = None
    finding: tuple[int, dict] | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class Session:
    """Loaded data plus serialized audit state for one service process."""

    def __init__(self, config: SessionConfig) -> None:
        self.config = config
        self.evalset: EvaluationSet = load_evaluation_set(
            config.data, embeddings=config.embeddings
        )
        self.schema: Schema = load_schema(config.schema)
        validation = validate_against_schema(self.evalset, self.schema)
        if validation.unknown_tags:
            rid, tag = validation.unknown_tags[0]
            raise StrataError(
                f"data carries {len(validation.unknown_tags)} tag(s) unknown to the "
                f"schema (first: {tag!r} on record {rid!r}); fix the schema or data"
            )
        if config.audit_log is not None and config.audit_log.exists():
            self.state = AuditState.load(config.audit_log, self.evalset)
        else:
            self.state = AuditState(self.evalset)
        self._write_lock = threading.Lock()
        self._caches = _Caches()
        self._known_tags = set(self.schema.tag_names())

    # -- reads --

    def config_echo(self) -> dict:
        c = self.config
        return {
            "data": str(c.data),
            "schema": str(c.schema),
            "audit_log": str(c.audit_log) if c.audit_log else None,
            "threshold": c.threshold,
            "alpha": c.alpha,
            "bootstrap_b": c.bootstrap_b,
            "seed": c.seed,
            "ks": list(c.ks),
            "min_size": c.min_size,
            "events": self.state.event_count,
        }

    def report_json(self) -> dict:
        with self._caches.lock:
            cached = self._caches.report
            if cached is not None and cached[0] == self.state.event_count:
                return cached[1]
        report = audit_snapshot(
            self.evalset,
            self.state,
            self.schema,
            threshold=self.config.threshold,
            alpha=self.config.alpha,
            b=self.config.bootstrap_b,
            seed=self.config.seed,
        ).to_json_dict()
        with self._caches.lock:
            self._caches.report = (self.state.event_count, report)
        return report

    def finding_json(self) -> dict:
        with self._caches.lock:
            cached = self._caches.finding
            if cached is not None and cached[0] == self.state.event_count:
                return cached[1]
        finding = detect_hidden_strata(
            merged_set(self.evalset, self.state),
            self.schema,
            ks=self.config.ks,
            min_size=self.config.min_size,
            threshold=self.config.threshold,
            seed=self.config.seed,
            max_iter=self.config.max_iter,
            tol=self.config.tol,
            normalize=self.config.normalize,
        ).to_json_dict()
        with self._caches.lock:
            self._caches.finding = (self.state.event_count, finding)
        return finding

    def queue_json(self, kind: str, order: str, seed: int) -> list[dict]:
        entries = build_error_queue(
            merged_set(self.evalset, self.state),
            threshold=self.config.threshold,
            kind=_QUEUE_KIND_ALIASES.get(kind, kind),
            order=order,
            seed=seed,
        )
        return [e.to_json_dict() for e in entries]

    def records_json(self, filter_text: str | None) -> list[dict]:
        out = []
        for record in self.evalset.records:
            tags = self.state.current_tags(record.id)
            if filter_text and filter_text not in record.id and filter_text not in tags:
                continue
            out.append(
                {
                    "id": record.id,
                    "y_true": bool(record.y_true),
                    "score": record.score,
                    "tags": sorted(tags),
                    "meta": dict(record.meta),
                    "has_embedding": record.embedding is not None,
                }
            )
        return out

    # -- writes --

    def apply_tag(self, record_id: str, tag: str, action: str, author: str) -> dict:
        if record_id not in self.evalset:
            raise _HttpError(404, "unknown_record", f"unknown record id {record_id!r}")
        if tag not in self._known_tags:
            raise _HttpError(400, "unknown_tag", f"tag {tag!r} is not in the schema")
        with self._write_lock:
            with warnings.catch_warnings(record=True) as captured:
                warnings.simplefilter("always")
                try:
                    event = self.state.apply(record_id, tag, action, author)
                except AuditError as exc:
                    raise _HttpError(409, "invalid_edit", str(exc)) from None
            if event is not None and self.config.audit_log is not None:
                self.state.append_to_log(self.config.audit_log, event)
            response = {
                "id": record_id,
                "tags": sorted(self.state.current_tags(record_id)),
                "events": self.state.event_count,
            }
            if captured:
                response["warning"] = str(captured[0].message)
            return response


class _HttpError(Exception):
    def __init__(self, status: int, error: str, detail: str) -> None:
        super().__init__(detail)
        self.status = status
        self.error = error
        self.detail = detail


def create_app(session: Session) -> FastAPI:
    app = FastAPI(title="strata audit service", version="0.1.0")

    @app.exception_handler(_HttpError)
    async def _http_error(_req: Request, exc: _HttpError) -> JSONResponse:
        return JSONResponse({"error": exc.error, "detail": exc.detail}, status_code=exc.status)

    @app.exception_handler(StrataError)
    async def _strata_error(_req: Request, exc: StrataError) -> JSONResponse:
        return JSONResponse(
            {"error": type(exc).__name__, "detail": str(exc)}, status_code=422
        )

    @app.get("/api/health")
    def health() -> dict:
        return {
            "status": "ok",
            "set": session.evalset.name,
            "records": len(session.evalset),
            "kernel_backend": kernels.backend_name(),
            "config": session.config_echo(),
        }

    @app.get("/api/schema")
    def schema() -> dict:
        s = session.schema
        return {
            "schema": {
                "superclass": s.superclass,
                "axes": [
                    {
                        "name": axis.name,
                        "exclusive": axis.exclusive,
                        "tags": [
                            {"name": t.name, "description": t.description}
                            for t in axis.tags
                        ],
                    }
                    for axis in s.axes
                ],
            },
            "config": session.config_echo(),
        }

    @app.get("/api/records")
    def records(filter: str | None = Query(default=None)) -> dict:
        return {"records": session.records_json(filter), "config": session.config_echo()}

    @app.get("/api/queue")
    def queue(
        kind: str = Query(default="fn"),
        order: str = Query(default="score_asc"),
        seed: int = Query(default=0),
    ) -> dict:
        try:
            entries = session.queue_json(kind, order, seed)
        except AuditError as exc:
            raise _HttpError(400, "bad_request", str(exc)) from None
        return {
            "entries": entries,
            "kind": _QUEUE_KIND_ALIASES.get(kind, kind),
            "order": order,
            "config": session.config_echo(),
        }

    @app.post("/api/tags")
    async def tags(request: Request) -> dict:
        body = await request.json()
        if not isinstance(body, dict):
            raise _HttpError(400, "bad_request", "expected a JSON object")
        missing = [k for k in ("id", "tag", "action") if not isinstance(body.get(k), str)]
        if missing:
            raise _HttpError(400, "bad_request", f"missing string field(s) {missing}")
        return session.apply_tag(
            body["id"], body["tag"], body["action"], str(body.get("author", ""))
        )

    @app.get("/api/report")
    def report() -> dict:
        return session.report_json()

    @app.get("/api/strata")
    def strata() -> dict:
        try:
            return session.finding_json()
        except ClusterError as exc:
            raise _HttpError(422, "no_embeddings", str(exc)) from None

    ui_dir = session.config.ui_dir
    if ui_dir is not None and ui_dir.is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
