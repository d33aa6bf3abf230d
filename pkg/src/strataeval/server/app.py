"""FastAPI application wrapping one study.

All mutations (judgments, phase advances) are funneled through a single
lock and the study file is rewritten atomically after each one, so a
crash loses at most the in-flight request.  Reads see the latest
committed state.
"""

from __future__ import annotations

import threading
from dataclasses import replace
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..corpus import STRATUM_CLASSES, PosClass, context_window, frequency_table, load_corpus, pos_class
from ..errors import DataError, PhaseError, StrataEvalError, UnknownItemError
from ..estimation import WeightMode, build_report
from ..study import StudyPhase, StudyState, load_study, save_study
from .schemas import (
    ContextToken,
    FrequencyRow,
    FrequencyView,
    ItemView,
    JudgmentRequest,
    JudgmentResponse,
    NextItemResponse,
    StratumProgress,
    StudyView,
)


class StudyService:
    """Serialized access to one study and its on-disk file."""

    def __init__(self, study: StudyState, study_path: Path):
        self.study = study
        self.study_path = study_path
        self._lock = threading.Lock()

    def read(self):
        with self._lock:
            return self.study

    def mutate(self, fn):
        """Apply a mutation and persist before releasing the writer lock."""
        with self._lock:
            result = fn(self.study)
            save_study(self.study, self.study_path)
            return result


def _progress(study: StudyState) -> dict[str, StratumProgress]:
    out = {}
    for cls in STRATUM_CLASSES:
        drawn = study.drawn_by_class(cls)
        judged = sum(1 for i in drawn if i in study.judgments)
        out[cls.value] = StratumProgress(
            population=len(study.corpus.strata[cls]),
            drawn=len(drawn),
            judged=judged,
            remaining=len(drawn) - judged,
        )
    return out


def _study_view(study: StudyState) -> StudyView:
    return StudyView(
        phase=study.phase.value,
        config=study.config.to_dict(),
        corpus_digest=study.corpus_digest,
        total_tokens=study.corpus.total_tokens,
        population_size=study.corpus.population_size,
        progress=_progress(study),
        plan=study.plan.to_dict() if study.plan else None,
    )


def _item_view(study: StudyState, index: int) -> ItemView:
    corpus = study.corpus
    if not 0 <= index < corpus.total_tokens:
        raise UnknownItemError(f"no token with index {index}")
    if not study.is_drawn(index):
        raise UnknownItemError(f"item {index} is not part of any draw")
    record = corpus.records[index]
    window = context_window(corpus, index, study.config.context_radius)
    cls = pos_class(record.tag)
    progress = _progress(study)[cls.value]
    return ItemView(
        item_index=index,
        surface=record.surface,
        tag=record.tag,
        pos_class=cls.value,
        system_lemma=record.system_lemma,
        context=[
            ContextToken(surface=tok.surface, is_center=(off == window.center))
            for off, tok in enumerate(window.tokens)
        ],
        stratum_progress=progress,
    )


def create_app(study_path, corpus_path, ui_dir=None) -> FastAPI:
    """Build the service for one study file bound to its corpus."""
    study_path = Path(study_path)
    corpus = load_corpus(corpus_path)
    service = StudyService(load_study(study_path, corpus), study_path)

    app = FastAPI(title="strataeval review service")
    app.state.service = service

    @app.exception_handler(StrataEvalError)
    def domain_error(_request: Request, exc: StrataEvalError):
        if isinstance(exc, UnknownItemError):
            status = 404
        elif isinstance(exc, DataError):
            status = 400
        else:
            status = 409
        return JSONResponse(
            status_code=status,
            content={"code": exc.code, "message": exc.message, "details": exc.details},
        )

    @app.exception_handler(RequestValidationError)
    def validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={
                "code": "validation_error",
                "message": "request body or parameters failed validation",
                "details": {"errors": exc.errors()},
            },
        )

    def parse_class(value: str) -> PosClass:
        try:
            cls = PosClass(value.lower())
        except ValueError:
            raise DataError(f"unknown POS class {value!r}")
        if cls not in STRATUM_CLASSES:
            raise DataError(f"{value!r} is not a stratum class")
        return cls

    @app.get("/api/study", response_model=StudyView)
    def get_study():
        return _study_view(service.read())

    @app.post("/api/phase/advance", response_model=StudyView)
    def advance_phase():
        service.mutate(lambda study: study.advance_phase())
        return _study_view(service.read())

    @app.get("/api/items/next", response_model=NextItemResponse)
    def next_item(stratum: str | None = None):
        study = service.read()
        cls = parse_class(stratum) if stratum else None
        index = study.next_unjudged(cls)
        if index is None:
            return NextItemResponse(item=None)
        return NextItemResponse(item=_item_view(study, index))

    @app.get("/api/items/{index}", response_model=ItemView)
    def get_item(index: int):
        return _item_view(service.read(), index)

    @app.post("/api/items/{index}/judgment", response_model=JudgmentResponse)
    def post_judgment(index: int, body: JudgmentRequest):
        service.mutate(
            lambda study: study.record_judgment(index, body.verdict, body.judge_id)
        )
        study = service.read()
        return JudgmentResponse(
            item_index=index,
            verdict=body.verdict,
            phase=study.phase.value,
            progress=_progress(study),
        )

    @app.get("/api/report")
    def get_report(mode: str | None = None):
        study = service.read()
        if study.phase is not StudyPhase.REPORTED:
            raise PhaseError(
                "report is available only once the study is Reported",
                {"phase": study.phase.value},
            )
        report = build_report(study)
        if mode:
            try:
                report = replace(report, weight_mode=WeightMode(mode.lower()))
            except ValueError:
                raise DataError(f"unknown weight mode {mode!r}")
        return JSONResponse(content=report.to_dict())

    @app.get("/api/frequency/{value}", response_model=FrequencyView)
    def get_frequency(value: str):
        study = service.read()
        cls = parse_class(value)
        table = frequency_table(study.corpus, cls)
        return FrequencyView(
            pos_class=cls.value,
            total=table.total,
            rows=[FrequencyRow(tag=t, count=c) for t, c in table.rows()],
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(study_path, corpus_path, host: str = "127.0.0.1", port: int = 8765, ui_dir=None):
    """Run the review service until interrupted."""
    import uvicorn

    app = create_app(study_path, corpus_path, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
