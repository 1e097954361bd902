"""
Verification Reports
=====================

Every check produces `CaseRecord`s with one shape:

    {case, config_hash, seed, metric, value, threshold, passed}

A record passes when value <= threshold, so each metric is phrased as a
violation or an error (smaller is better). `SuiteReport` collects records,
keeps them sorted by case id and serializes to plain dicts for JSON.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any


def config_hash(params: dict[str, Any]) -> str:
    """Short stable hash of the parameters that define a case."""
    payload = json.dumps(params, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class CaseRecord:
    """One metric of one verification case."""

    case: str
    config_hash: str
    seed: int | None
    metric: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.threshold)

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self), "passed": self.passed}


def make_record(
    case: str,
    params: dict[str, Any],
    metric: str,
    value: float,
    threshold: float,
    seed: int | None = None,
) -> CaseRecord:
    return CaseRecord(
        case=case,
        config_hash=config_hash(params),
        seed=seed,
        metric=metric,
        value=float(value),
        threshold=float(threshold),
    )


@dataclass
class SuiteReport:
    """Records of one or more suites, sorted by case id."""

    name: str
    records: list[CaseRecord] = field(default_factory=list)

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: (r.case, r.metric))

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.records)

    @property
    def failures(self) -> list[CaseRecord]:
        return [record for record in self.records if not record.passed]

    def worst(self) -> dict[str, float]:
        """Largest value seen per metric."""
        worst: dict[str, float] = {}
        for record in self.records:
            worst[record.metric] = max(worst.get(record.metric, float("-inf")), record.value)
        return worst

    def merge(self, *others: "SuiteReport", name: str | None = None) -> "SuiteReport":
        records = list(self.records)
        for other in others:
            records.extend(other.records)
        return SuiteReport(name or self.name, records)

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.name,
            "passed": self.passed,
            "failures": len(self.failures),
            "worst": self.worst(),
            "records": [record.to_dict() for record in self.records],
        }
