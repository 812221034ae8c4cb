import enum
from fractions import Fraction
from typing import Annotated, Optional, Tuple

from pydantic import BaseModel, Field, PlainSerializer, PlainValidator

from app.schemas.flowshop import FlowshopInstance
from app.schemas.graphs import WeightMatrix
from app.schemas.solvers import ApproxRun


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ValueError("rationals must be given exactly, e.g. '1/2'")
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {value!r}") from exc


Rational = Annotated[
    Fraction,
    PlainValidator(_to_fraction),
    PlainSerializer(lambda value: str(value), return_type=str),
]


# ==================== FLOWSHOP -> ATSP ====================

class NwfsAtspTrace(BaseModel):
    """Dummy-job reduction; vertex j + 1 is job j"""

    instance: FlowshopInstance
    dummy: int = 0

    class Config:
        frozen = True


# ==================== ATSP TRANSFORMS ====================

class NormalizationTrace(BaseModel):
    epsilon: Rational
    certificate: int  # R, value of a tour of the source instance
    log_factor: int   # ceil(log2 n)
    phi: Rational
    source_max_weight: int
    source: WeightMatrix
    normalized: WeightMatrix

    class Config:
        frozen = True
        arbitrary_types_allowed = True

    @property
    def n(self) -> int:
        return self.source.n


class ReplicationTrace(BaseModel):
    copies: int = Field(..., ge=1)
    anchor: int
    supervertex: int = 0
    # copy_vertices[c][x]: index of base vertex x inside copy c (anchor -> supervertex)
    copy_vertices: Tuple[Tuple[int, ...], ...]
    base: WeightMatrix
    replicated: WeightMatrix

    class Config:
        frozen = True


class SplitTrace(BaseModel):
    vertex: int
    v_out: int
    v_in: int
    padding: int  # 2W, weight of every arc the split does not inherit
    base: WeightMatrix
    split: WeightMatrix

    class Config:
        frozen = True


# ==================== ATSP -> FLOWSHOP ====================

class HardnessTrace(BaseModel):
    """Every stage of the ATSP -> no-wait flowshop construction"""

    epsilon: Rational
    original: WeightMatrix
    normalization: NormalizationTrace
    replication: ReplicationTrace
    split: SplitTrace
    scale: int             # ceil(1/epsilon)
    scaled: WeightMatrix   # G', the scaled ATSPP instance
    n_prime: int
    w_prime: int
    copies: int            # N
    block_scale: int       # D = 2W' + 1
    gadget_half_size: int  # k
    gadget_patterns: Tuple[Tuple[int, ...], ...]
    job_length: int
    job_copy: Tuple[int, ...]
    job_vertex: Tuple[int, ...]

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class HardnessInstance(BaseModel):
    flowshop: FlowshopInstance
    trace: HardnessTrace

    class Config:
        frozen = True


# ==================== TRACE DOCUMENT ====================

class TraceKind(str, enum.Enum):
    nwfs_to_atsp = "nwfs-to-atsp"
    atsp_to_nwfs = "atsp-to-nwfs"
    approx_run = "approx-run"


class TraceDocument(BaseModel):
    kind: TraceKind
    version: str = "1"
    nwfs_to_atsp: Optional[NwfsAtspTrace] = None
    hardness: Optional[HardnessTrace] = None
    approx_run: Optional[ApproxRun] = None
