# schemas.py
"""
Pydantic models for the QDP lab.

Defines every record that crosses an I/O boundary: field descriptors, noise
specs, code records, experiment configs, verification checks and CSV rows.
"""

import io
import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

CSV_SCHEMA_PATH = Path(__file__).with_name("csv_schema.json")
CSV_FLOAT_FORMAT = "%.12g"


class FieldDescriptor(BaseModel):
    """Finite field F_{p^s}."""

    p: int = Field(ge=2, description="Field characteristic (prime)")
    s: int = Field(default=1, ge=1, description="Extension degree")


class BernoulliNoiseSpec(BaseModel):
    """q-ary symmetric noise with crossover probability p."""

    kind: Literal["bernoulli"] = "bernoulli"
    p: float = Field(ge=0.0, lt=1.0, description="Crossover probability")


class TableNoiseSpec(BaseModel):
    """User table of symbol amplitudes g (real and imaginary parts)."""

    kind: Literal["table"] = "table"
    re: list[float] = Field(default_factory=list, description="Real parts of g")
    im: list[float] = Field(default_factory=list, description="Imaginary parts of g (optional)")
    uniform: bool = Field(default=False, description="Use the flat table instead of re/im")


class GibbsNoiseSpec(BaseModel):
    """Weight-induced distribution on the dual side."""

    model_config = ConfigDict(populate_by_name=True)

    kind: Literal["gibbs"] = "gibbs"
    weights: Optional[list[float]] = Field(
        default=None, description="Symbol weights |a|; Hamming weight when omitted"
    )
    lam: Optional[float] = Field(default=None, alias="lambda", gt=0, description="Rate lambda")
    mode: Literal["gibbs", "unit-sum"] = Field(
        default="gibbs", description="Normalization by F(lambda) or by solving F(lambda) = 1"
    )


class RankNoiseSpec(BaseModel):
    """Rank-metric noise f_t on a x b matrices."""

    kind: Literal["rank"] = "rank"
    a: int = Field(ge=1, description="Rows of the matrix view")
    b: int = Field(ge=1, description="Columns of the matrix view")
    t: int = Field(ge=0, description="Target rank")


NoiseSpec = Annotated[
    Union[BernoulliNoiseSpec, TableNoiseSpec, GibbsNoiseSpec, RankNoiseSpec],
    Field(discriminator="kind"),
]


class CodeRecord(BaseModel):
    """JSON record of a generator matrix."""

    q: int = Field(ge=2, description="Field order")
    p: int = Field(ge=2, description="Field characteristic")
    s: int = Field(ge=1, description="Extension degree")
    n: int = Field(ge=1, description="Code length")
    k: int = Field(ge=0, description="Generator rows")
    G: list[list[int]] = Field(description="Generator matrix, row-major")
    seed: Optional[int] = Field(default=None, description="Seed that drew G")


class CheckRecord(BaseModel):
    """Single invariant check with both sides of the comparison."""

    model_config = ConfigDict(populate_by_name=True)

    name: str = Field(description="Check name")
    instance: str = Field(description="Instance parameters")
    lhs: float = Field(description="Measured side")
    rhs: float = Field(description="Reference side")
    tolerance: float = Field(ge=0, description="Allowed slack")
    passed: bool = Field(alias="pass", description="Whether the check held")


class VerificationReport(BaseModel):
    """Aggregates check results of the invariant suites."""

    suites: list[str] = Field(default_factory=list)
    checks: list[CheckRecord] = Field(default_factory=list)

    @property
    def failures(self) -> list[CheckRecord]:
        """
        Checks that did not hold.

        Returns:
            Failed CheckRecords in run order.
        """
        return [c for c in self.checks if not c.passed]

    @property
    def total_failures(self) -> int:
        return len(self.failures)

    @property
    def passed(self) -> bool:
        return not self.failures

    def add_check(
        self,
        name: str,
        instance: str,
        lhs: float,
        rhs: float,
        tolerance: float,
        passed: bool,
    ) -> CheckRecord:
        """
        Record one check.

        Args:
            name: Check name.
            instance: Instance description.
            lhs: Measured value.
            rhs: Reference value.
            tolerance: Allowed slack.
            passed: Outcome.

        Returns:
            The stored CheckRecord.
        """
        record = CheckRecord(
            name=name,
            instance=instance,
            lhs=float(lhs),
            rhs=float(rhs),
            tolerance=float(tolerance),
            passed=bool(passed),
        )
        self.checks.append(record)
        return record

    def to_json(self) -> dict:
        """JSON-ready summary with every check."""
        return {
            "suites": self.suites,
            "passed": self.passed,
            "total_checks": len(self.checks),
            "total_failures": self.total_failures,
            "checks": [c.model_dump(by_alias=True) for c in self.checks],
        }


class ExperimentConfig(BaseModel):
    """Validated CLI configuration; mirrors the command-line flags."""

    subcommand: Literal["capacity", "pgm-sweep", "sample-dual", "rank-lab", "verify"]
    field: FieldDescriptor = Field(default_factory=lambda: FieldDescriptor(p=2, s=1))
    n: Optional[int] = Field(default=None, ge=1, description="Code length")
    k: Optional[int] = Field(default=None, ge=1, description="Generator rows")
    rate: Optional[float] = Field(default=None, gt=0.0, lt=1.0, description="Rate R, k = floor(R n)")
    noise: NoiseSpec = Field(default_factory=lambda: BernoulliNoiseSpec(p=0.1))
    eps: float = Field(default=0.1, gt=0.0, description="Typicality slack epsilon")
    trials: int = Field(default=100, ge=1, description="Random codes per point / seeds")
    samples: int = Field(default=1000, ge=1, description="Samples per seed")
    seed: int = Field(default=0, ge=0, description="Master seed")
    out: Optional[str] = Field(default=None, description="Output path (stdout when omitted)")
    format: Literal["csv", "json"] = "csv"
    svg: Optional[str] = Field(default=None, description="SVG plot path")
    workers: int = Field(default=1, ge=1, description="Concurrent trial workers")
    suite: Optional[str] = Field(default=None, description="Verification suite filter")

    @model_validator(mode="after")
    def check_dimensions(self) -> "ExperimentConfig":
        if self.k is not None and self.rate is not None:
            raise ValueError("give either k or rate, not both")
        if self.n is not None and self.k is not None and self.k >= self.n:
            raise ValueError(f"need k < n, got k={self.k}, n={self.n}")
        if self.subcommand == "sample-dual" and self.n is None:
            raise ValueError("sample-dual needs --n")
        if self.subcommand == "pgm-sweep" and self.n is None:
            raise ValueError("pgm-sweep needs --n")
        return self

    def resolved_k(self) -> int:
        """
        Generator rows for commands that need one.

        Returns:
            k, or floor(rate * n) clamped to 1..n-1.
        """
        if self.k is not None:
            return self.k
        if self.rate is not None and self.n is not None:
            return min(max(int(self.rate * self.n), 1), self.n - 1)
        raise ValueError("command needs --k or --rate")


# CSV rows


class SweepRow(BaseModel):
    """One k of a PGM sweep."""

    q: int
    n: int
    k: int
    noise_kind: str
    noise_param: str
    seed: int
    trials: int
    P_PGM_mean: float
    P_PGM_std: float


class SampleRow(BaseModel):
    """One seed of a dual-sampling experiment."""

    seed: int
    n: int
    k: int
    noise: str
    d_min: Optional[float]
    expected_weight: Optional[float]
    frac_within_margin: Optional[float]
    success_floor: Optional[float]
    p_zero_branch: Optional[float]
    exact_within_margin: Optional[float]
    typical_mass: Optional[float]
    status: Literal["ok", "zero_dual_mass"]


CSV_ROW_MODELS: dict[str, type[BaseModel]] = {"sweep": SweepRow, "samples": SampleRow}


def load_csv_schema() -> dict:
    """Column documentation shipped with the repository."""
    with open(CSV_SCHEMA_PATH, encoding="utf-8") as fh:
        return json.load(fh)


def csv_columns(kind: str) -> list[str]:
    """
    Documented column names of a CSV kind, checked against its row model.

    Args:
        kind: "sweep" or "samples".

    Returns:
        Column names in file order.
    """
    documented = [c["name"] for c in load_csv_schema()[kind]["columns"]]
    modeled = list(CSV_ROW_MODELS[kind].model_fields)
    if documented != modeled:
        raise ValueError(f"csv_schema.json columns for {kind!r} do not match {modeled}")
    return documented


def rows_to_csv(rows: list[BaseModel], kind: str) -> str:
    """
    Render rows as CSV text after schema validation.

    Args:
        rows: Row models of the given kind.
        kind: "sweep" or "samples".

    Returns:
        CSV text with a fixed float format.
    """
    columns = csv_columns(kind)
    model = CSV_ROW_MODELS[kind]
    records = [model.model_validate(r.model_dump()).model_dump() for r in rows]
    frame = pd.DataFrame.from_records(records, columns=columns)
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return buffer.getvalue()


class CapacityReport(BaseModel):
    """Capacity figures of a per-symbol noise or the rank entropies."""

    q: int
    noise_kind: str
    noise_param: str
    holevo_capacity: Optional[float] = None
    shannon_capacity: Optional[float] = None
    hirschman_sum: Optional[float] = None
    hirschman_holds: Optional[bool] = Field(default=None, description="sum >= 1")
    hirschman_upper_direction_holds: Optional[bool] = Field(
        default=None, description="sum <= 1, the reverse inequality"
    )
    rank_entropy_closed: Optional[float] = None
    rank_entropy_exact: Optional[float] = None


class RankLabReport(BaseModel):
    """Rank-metric tables and checks."""

    q: int
    a: int
    b: int
    t: int
    gaussian_binomials: list[int]
    sphere_sizes: list[int]
    Z: float
    Z_over_binomial: float
    shell_masses: list[float]
    duality_residual: Optional[float]
    duality_note: str
    entropy_closed: float
    entropy_exact: float
    rate: float
    gv_distance: int
