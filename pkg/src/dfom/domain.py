"""Shared domain types and the detection-job state machine.

All values are immutable after construction; state transitions return new
job values, so they are safe to share across threads by copy.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Optional, Sequence, Union

MAX_UPLOAD_BYTES = 512 * 1024 * 1024

#: Allowed file extensions per modality (lowercase).
VIDEO_EXTENSIONS = frozenset({"mp4", "bmp", "tif", "nef", "raf", "avi", "mov"})
IMAGE_EXTENSIONS = frozenset({"jpg", "png", "jpeg"})
AUDIO_EXTENSIONS = frozenset({"flac", "wav", "mp3"})


class DomainError(Exception):
    """Base class for domain-level failures."""


class IllegalTransition(DomainError):
    def __init__(self, state: "JobState", event: "JobEvent"):
        self.state = state
        self.event = event
        super().__init__(f"event {type(event).__name__} is illegal in state {state.value}")


class MediaModality(str, Enum):
    IMAGE = "image"
    VIDEO = "video"
    AUDIO = "audio"

    @property
    def extensions(self) -> frozenset:
        return _MODALITY_EXTENSIONS[self]


_MODALITY_EXTENSIONS = {
    MediaModality.IMAGE: IMAGE_EXTENSIONS,
    MediaModality.VIDEO: VIDEO_EXTENSIONS,
    MediaModality.AUDIO: AUDIO_EXTENSIONS,
}


class GroundTruth(str, Enum):
    REAL = "real"
    FAKE = "fake"
    UNKNOWN = "unknown"


class UserTier(str, Enum):
    REGULAR = "regular"
    ADVANCED = "advanced"
    SUPER = "super"

    @property
    def daily_quota(self) -> Optional[int]:
        """Daily task quota; None means unbounded."""
        return _TIER_QUOTAS[self]


_TIER_QUOTAS = {
    UserTier.REGULAR: 30,
    UserTier.ADVANCED: 300,
    UserTier.SUPER: None,
}


class JobState(str, Enum):
    QUEUED = "queued"
    DISPATCHED = "dispatched"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"

    @property
    def terminal(self) -> bool:
        return self in (JobState.COMPLETED, JobState.FAILED)


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


def new_id(prefix: str) -> str:
    """Unguessable opaque identifier (128 bits of randomness)."""
    return f"{prefix}_{secrets.token_urlsafe(16)}"


@dataclass(frozen=True)
class MediaFile:
    file_id: str
    original_name: str
    extension: str
    modality: MediaModality
    byte_size: int
    stored_path: str
    uploaded_at: datetime

    def __post_init__(self):
        if self.extension != self.extension.lower():
            raise ValueError("extension must be lowercase")
        if self.extension not in self.modality.extensions:
            raise ValueError(f"extension {self.extension!r} not valid for {self.modality.value}")
        if self.byte_size < 0:
            raise ValueError("byte_size must be non-negative")
        if self.byte_size > MAX_UPLOAD_BYTES:
            raise ValueError("file exceeds maximum upload size")


@dataclass(frozen=True)
class SupplementaryInfo:
    data_source: Optional[str] = None
    ground_truth: Optional[GroundTruth] = None
    background: Optional[str] = None
    research_consent: bool = False


@dataclass(frozen=True)
class SubmissionTask:
    task_id: str
    user_id: str
    file: MediaFile
    detector_ids: tuple
    supplementary: SupplementaryInfo
    submitted_at: datetime

    def __post_init__(self):
        if len(self.detector_ids) < 1:
            raise ValueError("at least one detector must be selected")
        if len(set(self.detector_ids)) != len(self.detector_ids):
            raise ValueError("duplicate detector ids")


@dataclass(frozen=True)
class DetectionResult:
    score: float
    elapsed_seconds: float
    advanced: Optional[dict] = None
    frame_scores: Optional[tuple] = None

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score {self.score} outside [0, 1]")
        if self.elapsed_seconds <= 0:
            raise ValueError("elapsed_seconds must be positive")
        if self.frame_scores is not None:
            for s in self.frame_scores:
                if not (0.0 <= s <= 1.0):
                    raise ValueError(f"frame score {s} outside [0, 1]")


@dataclass(frozen=True)
class JobError:
    kind: str
    message: str
    detail: Optional[str] = None


# --- job state machine events ---------------------------------------------


@dataclass(frozen=True)
class Dispatch:
    gpu_index: int


@dataclass(frozen=True)
class Start:
    pass


@dataclass(frozen=True)
class Complete:
    result: DetectionResult


@dataclass(frozen=True)
class Fail:
    error: JobError


JobEvent = Union[Dispatch, Start, Complete, Fail]


@dataclass(frozen=True)
class DetectionJob:
    job_id: str
    task_id: str
    detector_id: str
    state: JobState = JobState.QUEUED
    gpu_index: Optional[int] = None
    enqueued_at: Optional[datetime] = None
    dispatched_at: Optional[datetime] = None
    started_at: Optional[datetime] = None
    finished_at: Optional[datetime] = None
    result: Optional[DetectionResult] = None
    error: Optional[JobError] = None


# Legal (state, event type) pairs and their successor states.
_TRANSITIONS = {
    (JobState.QUEUED, Dispatch): JobState.DISPATCHED,
    (JobState.DISPATCHED, Start): JobState.RUNNING,
    (JobState.DISPATCHED, Fail): JobState.FAILED,  # launch failure
    (JobState.RUNNING, Complete): JobState.COMPLETED,
    (JobState.RUNNING, Fail): JobState.FAILED,
}


def transition(job: DetectionJob, event: JobEvent, now: Optional[datetime] = None) -> DetectionJob:
    """Apply a state-machine event, returning the job in its successor state.

    Illegal (state, event) pairs raise IllegalTransition and leave the input
    untouched (values are immutable anyway). The timestamp for the entered
    state is set to ``now``.
    """
    successor = _TRANSITIONS.get((job.state, type(event)))
    if successor is None:
        raise IllegalTransition(job.state, event)
    now = now or utcnow()
    if isinstance(event, Dispatch):
        return replace(job, state=successor, gpu_index=event.gpu_index, dispatched_at=now)
    if isinstance(event, Start):
        return replace(job, state=successor, started_at=now)
    if isinstance(event, Complete):
        return replace(job, state=successor, gpu_index=None, result=event.result, finished_at=now)
    return replace(job, state=successor, gpu_index=None, error=event.error, finished_at=now)
