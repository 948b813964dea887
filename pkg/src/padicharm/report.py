"""Machine-readable outcome of a single verification run."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass


@dataclass
class CheckReport:
    """Pass/fail verdict plus the evidence that produced it.

    passed is true exactly when every observed item satisfied its stated
    relation; on failure, witness carries the first offending instance.
    """

    claim_id: str
    parameters: dict
    observed: dict
    bound: object
    passed: bool
    seed: int | None = None
    witness: dict | None = None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, default=str)
