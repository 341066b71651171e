"""Upload validation, tiered daily quotas, and task/job creation."""

from __future__ import annotations

from datetime import datetime
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .domain import (
    AUDIO_EXTENSIONS,
    IMAGE_EXTENSIONS,
    MAX_UPLOAD_BYTES,
    VIDEO_EXTENSIONS,
    DetectionJob,
    MediaFile,
    MediaModality,
    SubmissionTask,
    SupplementaryInfo,
    UserTier,
    new_id,
)
from .registry import DetectorRegistry, UnknownDetector
from .store import Store

UNBOUNDED = None  # Super tier has no daily limit


class IngestionError(Exception):
    pass


class UnsupportedFileType(IngestionError):
    def __init__(self, extension: str):
        self.extension = extension
        super().__init__(f"unsupported file type {extension!r}")


class QuotaExceeded(IngestionError):
    def __init__(self, user_id: str, limit: int):
        self.user_id = user_id
        self.limit = limit
        super().__init__(f"daily quota of {limit} tasks exhausted")


class ModalityMismatch(IngestionError):
    def __init__(self, detector_id: str):
        self.detector_id = detector_id
        super().__init__(f"detector {detector_id!r} does not handle this file's modality")


class FileTooLarge(IngestionError):
    def __init__(self, byte_size: int):
        self.byte_size = byte_size
        super().__init__(f"file of {byte_size} bytes exceeds the {MAX_UPLOAD_BYTES}-byte cap")


class EmptySelection(IngestionError):
    def __init__(self):
        super().__init__("at least one detector must be selected")


def classify_modality(extension: str) -> MediaModality:
    """Map a file extension to its media modality (case-insensitive)."""
    ext = extension.lower().lstrip(".")
    if ext in IMAGE_EXTENSIONS:
        return MediaModality.IMAGE
    if ext in VIDEO_EXTENSIONS:
        return MediaModality.VIDEO
    if ext in AUDIO_EXTENSIONS:
        return MediaModality.AUDIO
    raise UnsupportedFileType(extension)


def check_quota(user_id: str, tier: UserTier, now: datetime, store: Store) -> Optional[int]:
    """Remaining tasks for the user's current UTC day; None = unbounded."""
    limit = tier.daily_quota
    if limit is None:
        return UNBOUNDED
    used = store.quota_used(user_id, _utc_day(now))
    return max(0, limit - used)


def _utc_day(now: datetime) -> str:
    return now.date().isoformat()


class IngestionService:
    """Turns validated uploads into persisted tasks plus Queued jobs."""

    def __init__(self, store: Store, registry: DetectorRegistry, upload_root="uploads"):
        self.store = store
        self.registry = registry
        self.upload_root = Path(upload_root)

    def create_submission(
        self,
        user_id: str,
        tier: UserTier,
        original_name: str,
        content: bytes,
        detector_ids: Sequence[str],
        supplementary: SupplementaryInfo,
        now: datetime,
    ) -> Tuple[SubmissionTask, List[DetectionJob]]:
        """Validate, consume one quota unit, persist the task and one Queued
        job per detector (atomically, in selection order).

        A rejected submission creates no jobs and leaves the ledger untouched.
        """
        if "." not in original_name:
            raise UnsupportedFileType("")
        extension = original_name.rsplit(".", 1)[1].lower()
        modality = classify_modality(extension)
        if len(content) > MAX_UPLOAD_BYTES:
            raise FileTooLarge(len(content))
        if not detector_ids:
            raise EmptySelection()
        for detector_id in detector_ids:
            descriptor = self.registry.get(detector_id)  # raises UnknownDetector
            if descriptor.modality != modality:
                raise ModalityMismatch(detector_id)

        limit = tier.daily_quota
        if not self.store.try_consume_quota(user_id, _utc_day(now), limit):
            raise QuotaExceeded(user_id, limit)

        task_id = new_id("task")
        stored_dir = self.upload_root / user_id / task_id
        stored_path = stored_dir / Path(original_name).name
        try:
            stored_dir.mkdir(parents=True, exist_ok=True)
            stored_path.write_bytes(content)
            media = MediaFile(
                file_id=new_id("file"),
                original_name=original_name,
                extension=extension,
                modality=modality,
                byte_size=len(content),
                stored_path=str(stored_path),
                uploaded_at=now,
            )
            task = SubmissionTask(
                task_id=task_id,
                user_id=user_id,
                file=media,
                detector_ids=tuple(detector_ids),
                supplementary=supplementary,
                submitted_at=now,
            )
            jobs = [
                DetectionJob(job_id=new_id("job"), task_id=task_id,
                             detector_id=d, enqueued_at=now)
                for d in detector_ids
            ]
            self.store.insert_task_with_jobs(task, jobs)
        except Exception:
            self.store.refund_quota(user_id, _utc_day(now))
            raise
        return task, jobs
