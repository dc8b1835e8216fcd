"""Serializable run report."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

SCHEMA_VERSION = 1


@dataclass
class RunReport:
    plan: dict
    errors: dict
    bounds: list = field(default_factory=list)
    tally: dict = field(default_factory=dict)
    wall_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(b["pass"] for b in self.bounds)

    def failures(self) -> list[dict]:
        return [b for b in self.bounds if not b["pass"]]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "plan": self.plan,
            "errors": self.errors,
            "bounds": self.bounds,
            "tally": self.tally,
            "wall_ms": self.wall_ms,
        }

    def to_json(self, **kwargs) -> str:
        doc = self.to_dict()
        _check_finite(doc)
        return json.dumps(doc, indent=kwargs.pop("indent", 2), **kwargs)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunReport":
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")
        return cls(plan=doc["plan"], errors=doc["errors"], bounds=doc["bounds"],
                   tally=doc["tally"], wall_ms=doc["wall_ms"])

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))


def _check_finite(obj, path="$"):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ValueError(f"non-finite value at {path}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")
