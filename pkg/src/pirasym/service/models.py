"""Request and response models for the retrieval-toolkit service."""

from __future__ import annotations

from typing import Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field


class CornerModel(BaseModel):
    M: int
    N: int
    n: List[int]
    tau: List[str]
    rate: str
    rate_float: float
    t: List[int]
    L: int


class CornersRequest(BaseModel):
    m: int = Field(ge=1)
    n: int = Field(ge=1)


class CornersResponse(BaseModel):
    corners: List[CornerModel]


class BoundRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    m: int = Field(ge=1)
    tau: Optional[Union[str, List[str]]] = None
    ratios: Optional[Union[str, List[str]]] = Field(default=None,
                                                    alias="lambda")
    exhaustive: bool = False
    branches: bool = False


class BoundResponse(BaseModel):
    value: str
    value_float: float
    argmin: List[int]
    branches: Optional[Dict[str, str]] = None


class TermModel(BaseModel):
    m: int
    i: int


class PlanModel(BaseModel):
    M: int
    N: int
    p: int
    spec: Optional[List[int]]
    source: str
    seed: int
    L: int
    databases: List[List[List[TermModel]]]


class QueryRefModel(BaseModel):
    db: int
    position: int


class DecodeEntryModel(BaseModel):
    symbol: int
    query: QueryRefModel
    side_info: List[QueryRefModel]


class DecodeModel(BaseModel):
    desired: int
    entries: List[DecodeEntryModel]


class SynthRequest(BaseModel):
    spec: List[int]
    n: Optional[int] = Field(default=None, ge=1)
    desired: int = Field(default=1, ge=1)
    p: int = 2
    seed: int = 0


class SynthResponse(BaseModel):
    plan: PlanModel
    decode: DecodeModel
    table: str
    downloads: List[int]
    rate: str
    rate_float: float


class RunRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    m: int = Field(ge=1)
    n: Optional[int] = Field(default=None, ge=1)
    spec: Optional[List[int]] = None
    tau: Optional[Union[str, List[str]]] = None
    ratios: Optional[Union[str, List[str]]] = Field(default=None,
                                                    alias="lambda")
    p: int = 2
    trials: int = Field(default=100, ge=1)
    seed: int = 0
    parallel: bool = False


class RunResponse(BaseModel):
    source: str
    trials: int
    failures: List[dict]
    tau_expected: List[str]
    tau_measured: List[str]
    rate_expected: str
    rate_measured: Optional[str]
    per_db_traffic: List[int]
    ok: bool


class VerifyRequest(BaseModel):
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    spec: Optional[List[int]] = None
    checks: List[str] = Field(
        default_factory=lambda: ["shape", "view", "oracle", "capacity"])
    samples: int = 0
    threshold: float = 0.05
    p: int = 2
    seed: int = 0


class VerifyResponse(BaseModel):
    records: List[dict]
    ok: bool


class SweepRequest(BaseModel):
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    grid: int = Field(default=51, ge=2)


class SweepResponse(BaseModel):
    csv: str
    points: int
