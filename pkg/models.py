import hashlib
import json
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

PASS = "Pass"
FAIL = "Fail"
INFEASIBLE = "Infeasible"

SUCCESS = "success"
NEGATIVE = "negative"
INFEASIBLE_RUN = "infeasible"

VERSION = "0.3.0"
TIMING_FIELDS = ("runtime", "wall_time")


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def content_digest(data: Any) -> str:
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


def record_digest(payload: Dict[str, Any]) -> str:
    return content_digest({k: v for k, v in payload.items() if k not in TIMING_FIELDS})


class Record(BaseModel):
    """
    Anything written to the store.

    The digest covers the canonical JSON minus the timing fields, so a
    replayed record has the digest of the original.
    """

    kind: str

    def payload(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")

    def canonical(self) -> str:
        return canonical_json(self.payload())

    @property
    def digest(self) -> str:
        return record_digest(self.payload())


class ClaimRecord(Record):
    kind: str = "claim"
    claim_id: str
    statement: str
    anchor: str = ""
    invocation: str
    expected: str
    actual: Optional[str] = None
    outcome: str
    reason: Optional[str] = None
    runtime: float = 0.0
    details: Dict[str, Any] = Field(default_factory=dict)


class InputRecord(Record):
    kind: str = "input"
    path: str
    text: str


class ArtifactRecord(Record):
    """Result of one dispatched command: a census, a report or a certificate."""

    kind: str = "artifact"
    command: str
    outcome: str
    payload_data: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[Dict[str, Any]] = None


class RunManifest(Record):
    kind: str = "manifest"
    command: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    input_digests: Dict[str, str] = Field(default_factory=dict)
    version: str = VERSION
    fields: List[str] = Field(default_factory=list)
    wall_time: float = 0.0
    outcome: str
    exit_code: int
    artifacts: List[str] = Field(default_factory=list)


class Job(BaseModel):
    """A validated command: parameters are JSON values, `objects` holds the parsed inputs."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    command: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    inputs: Dict[str, str] = Field(default_factory=dict)
    objects: Dict[str, Any] = Field(default_factory=dict, exclude=True)
