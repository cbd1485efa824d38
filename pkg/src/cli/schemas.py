"""Pydantic schemas for command line configuration and output documents"""
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.schemas import QParams

Command = Literal["measure", "classify", "moments", "density", "typeb", "verify", "sweep"]
SCHEMA_VERSION = "aqfock/1"
PARAMETER_COMMANDS = {"measure", "classify", "moments", "density", "typeb"}


class RunConfig(BaseModel):
    """One command line invocation"""

    model_config = ConfigDict(frozen=True)

    command: Command
    alpha: Optional[float] = Field(None, gt=-1.0, lt=1.0, description="alpha in (-1, 1)")
    q: Optional[float] = Field(None, gt=-1.0, lt=1.0, description="q in (-1, 1)")
    t: Optional[float] = Field(None, ge=1.0, description="t-deformation parameter, t >= 1")
    kmax: int = Field(default=12, ge=0, le=40, description="Highest moment index")
    dim: int = Field(default=24, ge=3, le=64, description="Truncated one-mode dimension")
    n: int = Field(default=3, ge=1, le=5, description="Type-B rank")
    quad_order: Optional[int] = Field(None, ge=8, le=4000, description="Gauss-Legendre order")
    tol: Optional[float] = Field(None, gt=0.0, lt=1e-3, description="Truncation tolerance")
    format: Optional[Literal["json", "csv"]] = None
    output: Optional[Path] = None
    force: bool = False
    suite: str = "all"
    grid: int = Field(default=41, ge=1, le=401, description="Points per axis")
    eps: Optional[float] = Field(None, ge=0.0, description="alpha = q comparison epsilon")
    verbose: bool = False

    @field_validator("suite")
    @classmethod
    def _known_suite(cls, value: str) -> str:
        if value not in {"qcalc", "radial", "density", "fock1", "typeb", "all"}:
            raise ValueError(f"unknown suite {value!r}")
        return value

    @model_validator(mode="after")
    def _parameters_present(self) -> "RunConfig":
        if self.command in PARAMETER_COMMANDS and (self.alpha is None or self.q is None):
            raise ValueError(f"`{self.command}` needs both --alpha and --q")
        return self

    @property
    def params(self) -> QParams:
        return QParams(alpha=self.alpha, q=self.q)

    def output_format(self, default: str) -> str:
        """--format if given, else the command's own default"""
        return self.format or default


class VerdictDocument(BaseModel):
    """JSON form of a classify answer"""

    model_config = ConfigDict(populate_by_name=True)

    schema_: str = Field(default=SCHEMA_VERSION, alias="schema")
    alpha: float
    q: float
    exists: bool
    branch: str
    reason: str


class TableDocument(BaseModel):
    """JSON form of a tabular command result"""

    model_config = ConfigDict(populate_by_name=True)

    schema_: str = Field(default=SCHEMA_VERSION, alias="schema")
    command: str
    alpha: Optional[float] = None
    q: Optional[float] = None
    columns: List[str]
    rows: List[Dict[str, Any]]
