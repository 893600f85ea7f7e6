"""
File format schemas.

Potential and suspension files are validated here before the library objects
are built from them; result records pass through their model before they are
written. The SFT text format is parsed in ``src.utils.io``.
"""
from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator


class PotentialEntry(BaseModel):
    word: List[int] = Field(..., min_length=1)
    value: float


class PotentialFile(BaseModel):
    kind: Literal["one_sided", "two_sided"]
    depth_or_radius: int = Field(..., ge=0)
    entries: List[PotentialEntry]

    @field_validator("entries")
    @classmethod
    def _unique_words(cls, v: List[PotentialEntry]) -> List[PotentialEntry]:
        seen = set()
        for e in v:
            key = tuple(e.word)
            if key in seen:
                raise ValueError(f"duplicate entry for word {e.word}")
            seen.add(key)
        return v


class InlineSFT(BaseModel):
    n: int = Field(..., ge=1)
    rows: List[str]


class SuspensionFile(BaseModel):
    sft: InlineSFT
    roof: PotentialFile


class CertificateOut(BaseModel):
    word: List[int] = Field(..., min_length=1)
    period: int = Field(..., ge=1)


class ResultFile(BaseModel):
    """Written by map-optimize and flow-optimize."""
    value: float
    certificate: CertificateOut
    residual: float = Field(..., ge=0)
    method: str
    command: str
    seed: int
    reduced_potential: Optional[str] = None


class CheckOut(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class ValidationReport(BaseModel):
    passed: bool
    checks: List[CheckOut]
    min_alpha_prime: float
    roof_comparability: Optional[dict[str, float]] = None
    seed: int


class SelftestRecord(BaseModel):
    name: str
    passed: bool
    detail: str = ""
