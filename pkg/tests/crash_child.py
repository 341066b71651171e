"""Child process for the crash-recovery acceptance check: leaves three jobs
in the Running state, signals readiness, then blocks until killed."""

import sys
import time

from dfom.domain import (
    DetectionJob,
    Dispatch,
    JobState,
    MediaFile,
    MediaModality,
    Start,
    SubmissionTask,
    SupplementaryInfo,
    UserTier,
    utcnow,
)
from dfom.store import Store


def main(db_path: str) -> None:
    store = Store(db_path)
    now = utcnow()
    store.insert_user("u1", "crash", "crash@example.com", "x", UserTier.REGULAR, now)
    media = MediaFile("f1", "a.jpg", "jpg", MediaModality.IMAGE, 1, "/tmp/a.jpg", now)
    task = SubmissionTask("t1", "u1", media, ("npr", "glff", "hifi"),
                          SupplementaryInfo(), now)
    jobs = [DetectionJob(job_id=f"j{i}", task_id="t1", detector_id=d, enqueued_at=now)
            for i, d in enumerate(task.detector_ids)]
    store.insert_task_with_jobs(task, jobs)
    for i, job in enumerate(jobs):
        store.atomic_transition(job.job_id, JobState.QUEUED, Dispatch(i))
        store.atomic_transition(job.job_id, JobState.DISPATCHED, Start())
    print("READY", flush=True)
    time.sleep(60)


if __name__ == "__main__":
    main(sys.argv[1])
