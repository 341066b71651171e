"""Demonstrate orphan recovery: jobs left Dispatched or Running when the
process dies are marked Failed at the next startup, and every GPU slot is
available again. Here we simulate the crash by closing the store without
letting the jobs finish.

Run with: python demos/crash_recovery.py
"""

import tempfile
from pathlib import Path

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


def main() -> None:
    with tempfile.TemporaryDirectory() as d:
        db = Path(d) / "store.db"
        now = utcnow()

        store = Store(db)
        store.insert_user("u1", "crash-demo", "crash@example.com", "x",
                          UserTier.REGULAR, now)
        media = MediaFile("f1", "clip.mp4", "mp4", MediaModality.VIDEO,
                          10, "/tmp/clip.mp4", now)
        task = SubmissionTask("t1", "u1", media, ("ftcn", "sbi", "npr"),
                              SupplementaryInfo(), now)
        jobs = [DetectionJob(job_id=f"j{i}", task_id="t1", detector_id=det,
                             enqueued_at=now)
                for i, det in enumerate(task.detector_ids)]
        store.insert_task_with_jobs(task, jobs)
        for gpu, job in enumerate(jobs):
            store.atomic_transition(job.job_id, JobState.QUEUED, Dispatch(gpu))
            store.atomic_transition(job.job_id, JobState.DISPATCHED, Start())
        print("before crash:",
              {j.job_id: store.get_job(j.job_id).state.value for j in jobs})
        store.close()  # the process "dies" here; jobs are still Running on disk

        restarted = Store(db)  # recovery runs at startup
        print("after restart:")
        for job in jobs:
            row = restarted.get_job(job.job_id)
            print(f"  {job.job_id}: {row.state.value} ({row.error.message})")
        restarted.close()


if __name__ == "__main__":
    main()
