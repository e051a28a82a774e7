"""Request/response schemas for the certnorms HTTP service.

All endpoints are POST with JSON bodies; numeric results always come with
the information needed to re-check them (certificate weights, witness
vectors, exactness flags).
"""

from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class PolynomialModel(BaseModel):
    n: int
    terms: List[Dict] = Field(default_factory=list)  # {"alpha": [...], "c": float}


class PartitionModel(BaseModel):
    n: int
    parts: List[List[int]]


class IntervalModel(BaseModel):
    lower: float
    upper: float


class NormsRequest(BaseModel):
    poly: Dict
    partition: Optional[Dict] = None
    cap_enum: int = 24
    seed: int = 0


class NormValue(BaseModel):
    value: float
    exact: bool
    note: str = ""


class NormsResponse(BaseModel):
    norm_inf: NormValue
    norm_one: NormValue
    inf_to_one: Optional[float] = None  # bilinear view, exact sign enumeration
    cb: Optional[IntervalModel] = None  # bilinear view, certified SDP interval


class DualNormsRequest(BaseModel):
    poly: Dict
    partition: Dict
    certificate: Optional[Dict] = None  # CbCertificate JSON for the cb,* upper bound
    tol: float = 1e-5
    seed: int = 0


class DualNormsResponse(BaseModel):
    inf_dual: IntervalModel
    cbdual: Optional[IntervalModel] = None
    cbdual_upper_source: str = ""


class QueryErrorRequest(BaseModel):
    matrix: Optional[List[List[float]]] = None
    poly: Optional[Dict] = None
    partition: Optional[Dict] = None
    tol: float = 5e-3
    seed: int = 0


class QueryErrorResponse(BaseModel):
    eps: IntervalModel
    gap: float
    converged: bool
    almost_gt_upper: float  # ||p||_inf (1 - 1/UB(cb)), the theorem bound


class KgBoundsRequest(BaseModel):
    k: int = 2
    samples: int = 20
    seed: int = 0


class WitnessRequest(BaseModel):
    n_list: List[int]
    dump_cert_n: Optional[int] = None  # include the extended certificate for this n


class WitnessRow(BaseModel):
    n: int
    q_norm2_sq: int
    squarefree_count: int
    q_norm_inf: float
    exact: bool
    cbdual_upper: float
    infdual_lower: float
    ratio: float
    eps_lower: float
    r_norm_1: Optional[float] = None


class WitnessResponse(BaseModel):
    rows: List[WitnessRow]
    certificate: Optional[Dict] = None


class ProbeRequest(BaseModel):
    samples: int = 10
    k: int = 2
    seed: int = 0
    tol: float = 5e-3
    include_fixtures: bool = True


class ProbeRow(BaseModel):
    index: int
    eps_lower: float
    eps_upper: float
    almost_gt_lower: float
    almost_gt_upper: float
    gap_to_bound: float


class ProbeResponse(BaseModel):
    rows: List[ProbeRow]


class VerifySdp2Request(BaseModel):
    instance: Dict
    partition: Dict
    poly: Dict
    tol: float = 1e-8


class VerifySdp2Response(BaseModel):
    ok: bool
    value: Optional[float] = None
    violations: List[str] = Field(default_factory=list)


class ErrorResponse(BaseModel):
    error: str
    kind: str
    exit_code: int
