"""Benchmark domain models."""
from typing import List, Literal
from pydantic import BaseModel, ConfigDict, Field, model_validator

CSV_COLUMNS = ("protocol", "relays", "payload_bits", "reps", "mean_us", "min_us", "max_us")
CSV_HEADER = ",".join(CSV_COLUMNS)


class BenchRecord(BaseModel):
    """One CSV row of a benchmark sweep."""
    model_config = ConfigDict(frozen=True)

    protocol: Literal["transmit", "disclose"]
    relays: int = Field(ge=1)
    payload_bits: int = Field(ge=0)
    reps: int = Field(ge=1)
    mean_us: float
    min_us: float
    max_us: float
    evidence_count: int = Field(default=0, exclude=True)

    @model_validator(mode="after")
    def validate_bounds(self):
        # float rounding
        if not (self.min_us - 1e-6 <= self.mean_us <= self.max_us + 1e-6):
            raise ValueError("mean_us must lie within [min_us, max_us]")
        return self

    @classmethod
    def from_samples(cls, protocol: str, relays: int, payload_bits: int, samples_us: List[float],
                     evidence_count: int = 0) -> "BenchRecord":
        return cls(
            protocol=protocol,
            relays=relays,
            payload_bits=payload_bits,
            reps=len(samples_us),
            mean_us=sum(samples_us) / len(samples_us),
            min_us=min(samples_us),
            max_us=max(samples_us),
            evidence_count=evidence_count,
        )

    def csv_fields(self) -> List[str]:
        """Values in CSV_COLUMNS order, times rounded to 0.1 us."""
        return [self.protocol, str(self.relays), str(self.payload_bits), str(self.reps),
                f"{self.mean_us:.1f}", f"{self.min_us:.1f}", f"{self.max_us:.1f}"]

    def to_csv_row(self) -> str:
        return ",".join(self.csv_fields())
