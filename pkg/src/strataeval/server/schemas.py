"""Pydantic request/response models for the review API."""

from typing import Literal, Optional

from pydantic import BaseModel


class StratumProgress(BaseModel):
    population: int
    drawn: int
    judged: int
    remaining: int


class StudyView(BaseModel):
    phase: str
    config: dict
    corpus_digest: str
    total_tokens: int
    population_size: int
    progress: dict[str, StratumProgress]
    plan: Optional[dict] = None


class ContextToken(BaseModel):
    surface: str
    is_center: bool


class ItemView(BaseModel):
    item_index: int
    surface: str
    tag: str
    pos_class: str
    system_lemma: Optional[str] = None
    context: list[ContextToken]
    stratum_progress: StratumProgress


class NextItemResponse(BaseModel):
    item: Optional[ItemView] = None


class JudgmentRequest(BaseModel):
    verdict: Literal["correct", "wrong", "no_output"]
    judge_id: str


class JudgmentResponse(BaseModel):
    item_index: int
    verdict: str
    phase: str
    progress: dict[str, StratumProgress]


class FrequencyRow(BaseModel):
    tag: str
    count: int


class FrequencyView(BaseModel):
    pos_class: str
    total: int
    rows: list[FrequencyRow]


class ErrorBody(BaseModel):
    code: str
    message: str
    details: dict = {}
