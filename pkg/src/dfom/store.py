"""Durable storage for accounts, tasks, jobs, results, stats, quota ledger,
and access records.

Single-file sqlite store in WAL mode; one connection serialized behind a
lock, so writers never interleave and readers see committed state only.
``atomic_transition`` is the sole mutation path for job state (compare-and-
swap on the current state).
"""

from __future__ import annotations

import json
import sqlite3
import threading
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Tuple

from . import domain
from .domain import (
    DetectionJob,
    DetectionResult,
    Fail,
    GroundTruth,
    JobError,
    JobEvent,
    JobState,
    MediaFile,
    MediaModality,
    SubmissionTask,
    SupplementaryInfo,
    UserTier,
    transition,
)
from .runtime import DetectorStats

PAGE_SIZE = 20

_SCHEMA = """
CREATE TABLE IF NOT EXISTS users (
    user_id TEXT PRIMARY KEY,
    username TEXT NOT NULL UNIQUE,
    email TEXT NOT NULL UNIQUE,
    credential_digest TEXT NOT NULL,
    tier TEXT NOT NULL,
    verified INTEGER NOT NULL DEFAULT 0,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
    token TEXT PRIMARY KEY,
    user_id TEXT NOT NULL REFERENCES users(user_id),
    expires_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS codes (
    email TEXT NOT NULL,
    code TEXT NOT NULL,
    issued_at TEXT NOT NULL,
    expires_at TEXT NOT NULL,
    consumed INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS tasks (
    task_id TEXT PRIMARY KEY,
    user_id TEXT NOT NULL REFERENCES users(user_id),
    file_json TEXT NOT NULL,
    detector_ids TEXT NOT NULL,
    supplementary TEXT NOT NULL,
    submitted_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS jobs (
    job_id TEXT PRIMARY KEY,
    task_id TEXT NOT NULL REFERENCES tasks(task_id),
    detector_id TEXT NOT NULL,
    state TEXT NOT NULL,
    gpu_index INTEGER,
    enqueued_at TEXT,
    dispatched_at TEXT,
    started_at TEXT,
    finished_at TEXT,
    result_json TEXT,
    error_json TEXT,
    seq INTEGER
);
CREATE TABLE IF NOT EXISTS stats (
    detector_id TEXT PRIMARY KEY,
    completed_count INTEGER NOT NULL,
    mean_seconds REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS ledger (
    user_id TEXT NOT NULL,
    day TEXT NOT NULL,
    submitted_task_count INTEGER NOT NULL,
    PRIMARY KEY (user_id, day)
);
CREATE TABLE IF NOT EXISTS access_records (
    timestamp TEXT NOT NULL,
    user_id TEXT,
    country_code TEXT NOT NULL,
    referrer TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_jobs_task ON jobs(task_id);
CREATE INDEX IF NOT EXISTS idx_jobs_state ON jobs(state);
CREATE INDEX IF NOT EXISTS idx_tasks_user ON tasks(user_id, submitted_at DESC);
"""


class StoreError(Exception):
    pass


class UnknownJob(StoreError):
    def __init__(self, job_id: str):
        self.job_id = job_id
        super().__init__(f"unknown job {job_id!r}")


class UnknownTask(StoreError):
    def __init__(self, task_id: str):
        self.task_id = task_id
        super().__init__(f"unknown task {task_id!r}")


class StaleState(StoreError):
    def __init__(self, current: JobState):
        self.current = current
        super().__init__(f"job state is {current.value}, not the expected state")


def _iso(dt: Optional[datetime]) -> Optional[str]:
    return dt.isoformat() if dt else None


def _parse_dt(s: Optional[str]) -> Optional[datetime]:
    return datetime.fromisoformat(s) if s else None


def _result_to_json(r: Optional[DetectionResult]) -> Optional[str]:
    if r is None:
        return None
    return json.dumps({
        "score": r.score,
        "elapsed_seconds": r.elapsed_seconds,
        "advanced": r.advanced,
        "frame_scores": list(r.frame_scores) if r.frame_scores is not None else None,
    })


def _result_from_json(s: Optional[str]) -> Optional[DetectionResult]:
    if not s:
        return None
    d = json.loads(s)
    fs = d.get("frame_scores")
    return DetectionResult(
        score=d["score"],
        elapsed_seconds=d["elapsed_seconds"],
        advanced=d.get("advanced"),
        frame_scores=tuple(fs) if fs is not None else None,
    )


class Store:
    """Embedded relational store; safe for concurrent use from many threads."""

    def __init__(self, path="data/store.db", recover: bool = True):
        self.path = str(path)
        if self.path != ":memory:":
            Path(self.path).parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute("PRAGMA foreign_keys=ON")
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)
        self.recovered_job_ids: List[str] = []
        if recover:
            self.recovered_job_ids = self.recover_orphans()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # --- crash recovery ----------------------------------------------------

    def recover_orphans(self) -> List[str]:
        """Fail jobs stuck in Dispatched/Running from a previous run.

        Their GPU slots exist only in the scheduler's memory, so after a
        restart marking the rows Failed is enough to reclaim them.
        """
        recovered = []
        with self._lock, self._conn:
            rows = self._conn.execute(
                "SELECT job_id FROM jobs WHERE state IN (?, ?)",
                (JobState.DISPATCHED.value, JobState.RUNNING.value),
            ).fetchall()
            err = json.dumps({"kind": "orphaned", "message": "orphaned at restart", "detail": None})
            now = domain.utcnow().isoformat()
            for row in rows:
                self._conn.execute(
                    "UPDATE jobs SET state=?, gpu_index=NULL, error_json=?, finished_at=? WHERE job_id=?",
                    (JobState.FAILED.value, err, now, row["job_id"]),
                )
                recovered.append(row["job_id"])
        return recovered

    # --- users / sessions / codes -----------------------------------------

    def insert_user(self, user_id, username, email, digest, tier: UserTier, created_at: datetime) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO users (user_id, username, email, credential_digest, tier, verified, created_at)"
                " VALUES (?,?,?,?,?,0,?)",
                (user_id, username, email, digest, tier.value, created_at.isoformat()),
            )

    def get_user(self, *, user_id=None, username=None, email=None) -> Optional[sqlite3.Row]:
        clauses = {"user_id": user_id, "username": username, "email": email}
        key, value = next((k, v) for k, v in clauses.items() if v is not None)
        with self._lock:
            return self._conn.execute(f"SELECT * FROM users WHERE {key}=?", (value,)).fetchone()

    def find_user_by_identifier(self, identifier: str) -> Optional[sqlite3.Row]:
        with self._lock:
            return self._conn.execute(
                "SELECT * FROM users WHERE username=? OR email=?", (identifier, identifier.lower())
            ).fetchone()

    def mark_verified(self, email: str) -> None:
        with self._lock, self._conn:
            self._conn.execute("UPDATE users SET verified=1 WHERE email=?", (email,))

    def set_tier(self, user_id: str, tier: UserTier) -> None:
        with self._lock, self._conn:
            self._conn.execute("UPDATE users SET tier=? WHERE user_id=?", (tier.value, user_id))

    def insert_code(self, email, code, issued_at: datetime, expires_at: datetime) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO codes (email, code, issued_at, expires_at, consumed) VALUES (?,?,?,?,0)",
                (email, code, issued_at.isoformat(), expires_at.isoformat()),
            )

    def consume_code(self, email: str, code: str, now: datetime) -> str:
        """Returns 'ok', 'expired', or 'mismatch'; consumes the code when ok."""
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT rowid, expires_at FROM codes WHERE email=? AND code=? AND consumed=0"
                " ORDER BY issued_at DESC LIMIT 1",
                (email, code),
            ).fetchone()
            if row is None:
                return "mismatch"
            if now > datetime.fromisoformat(row["expires_at"]):
                return "expired"
            self._conn.execute("UPDATE codes SET consumed=1 WHERE rowid=?", (row["rowid"],))
            return "ok"

    def insert_session(self, token: str, user_id: str, expires_at: datetime) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO sessions (token, user_id, expires_at) VALUES (?,?,?)",
                (token, user_id, expires_at.isoformat()),
            )

    def session_user(self, token: str, now: datetime) -> Optional[sqlite3.Row]:
        with self._lock:
            row = self._conn.execute("SELECT * FROM sessions WHERE token=?", (token,)).fetchone()
            if row is None or now > datetime.fromisoformat(row["expires_at"]):
                return None
            return self._conn.execute(
                "SELECT * FROM users WHERE user_id=?", (row["user_id"],)
            ).fetchone()

    # --- quota ledger -------------------------------------------------------

    def quota_used(self, user_id: str, day: str) -> int:
        with self._lock:
            row = self._conn.execute(
                "SELECT submitted_task_count FROM ledger WHERE user_id=? AND day=?",
                (user_id, day),
            ).fetchone()
            return row[0] if row else 0

    def try_consume_quota(self, user_id: str, day: str, limit: Optional[int]) -> bool:
        """Atomic check-and-increment; False when the day's quota is spent."""
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT submitted_task_count FROM ledger WHERE user_id=? AND day=?",
                (user_id, day),
            ).fetchone()
            used = row[0] if row else 0
            if limit is not None and used >= limit:
                return False
            self._conn.execute(
                "INSERT INTO ledger (user_id, day, submitted_task_count) VALUES (?,?,1)"
                " ON CONFLICT(user_id, day) DO UPDATE SET submitted_task_count=submitted_task_count+1",
                (user_id, day),
            )
            return True

    def refund_quota(self, user_id: str, day: str) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "UPDATE ledger SET submitted_task_count=submitted_task_count-1"
                " WHERE user_id=? AND day=? AND submitted_task_count>0",
                (user_id, day),
            )

    # --- tasks and jobs -----------------------------------------------------

    def insert_task_with_jobs(self, task: SubmissionTask, jobs: List[DetectionJob]) -> None:
        """Persist a task and its Queued jobs in one transaction."""
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO tasks (task_id, user_id, file_json, detector_ids, supplementary, submitted_at)"
                " VALUES (?,?,?,?,?,?)",
                (
                    task.task_id,
                    task.user_id,
                    json.dumps({**asdict(task.file), "modality": task.file.modality.value,
                                "uploaded_at": task.file.uploaded_at.isoformat()}),
                    json.dumps(list(task.detector_ids)),
                    json.dumps({
                        "data_source": task.supplementary.data_source,
                        "ground_truth": task.supplementary.ground_truth.value
                        if task.supplementary.ground_truth else None,
                        "background": task.supplementary.background,
                        "research_consent": task.supplementary.research_consent,
                    }),
                    task.submitted_at.isoformat(),
                ),
            )
            for job in jobs:
                self._conn.execute(
                    "INSERT INTO jobs (job_id, task_id, detector_id, state, enqueued_at, seq)"
                    " VALUES (?,?,?,?,?,"
                    " (SELECT COALESCE(MAX(seq),0)+1 FROM jobs))",
                    (job.job_id, job.task_id, job.detector_id,
                     job.state.value, _iso(job.enqueued_at)),
                )

    def _row_to_job(self, row: sqlite3.Row) -> DetectionJob:
        err = json.loads(row["error_json"]) if row["error_json"] else None
        return DetectionJob(
            job_id=row["job_id"],
            task_id=row["task_id"],
            detector_id=row["detector_id"],
            state=JobState(row["state"]),
            gpu_index=row["gpu_index"],
            enqueued_at=_parse_dt(row["enqueued_at"]),
            dispatched_at=_parse_dt(row["dispatched_at"]),
            started_at=_parse_dt(row["started_at"]),
            finished_at=_parse_dt(row["finished_at"]),
            result=_result_from_json(row["result_json"]),
            error=JobError(**err) if err else None,
        )

    def get_job(self, job_id: str) -> DetectionJob:
        with self._lock:
            row = self._conn.execute("SELECT * FROM jobs WHERE job_id=?", (job_id,)).fetchone()
        if row is None:
            raise UnknownJob(job_id)
        return self._row_to_job(row)

    def jobs_for_task(self, task_id: str) -> List[DetectionJob]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM jobs WHERE task_id=? ORDER BY seq", (task_id,)
            ).fetchall()
        return [self._row_to_job(r) for r in rows]

    def queued_jobs(self) -> List[DetectionJob]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM jobs WHERE state=? ORDER BY seq", (JobState.QUEUED.value,)
            ).fetchall()
        return [self._row_to_job(r) for r in rows]

    def atomic_transition(self, job_id: str, expected_state: JobState,
                          event: JobEvent, now: Optional[datetime] = None) -> DetectionJob:
        """Compare-and-swap on job state; exactly one of two racing identical
        transitions can succeed."""
        with self._lock, self._conn:
            row = self._conn.execute("SELECT * FROM jobs WHERE job_id=?", (job_id,)).fetchone()
            if row is None:
                raise UnknownJob(job_id)
            current = JobState(row["state"])
            if current != expected_state:
                raise StaleState(current)
            job = transition(self._row_to_job(row), event, now=now)
            self._conn.execute(
                "UPDATE jobs SET state=?, gpu_index=?, dispatched_at=?, started_at=?,"
                " finished_at=?, result_json=?, error_json=? WHERE job_id=? AND state=?",
                (
                    job.state.value, job.gpu_index,
                    _iso(job.dispatched_at), _iso(job.started_at), _iso(job.finished_at),
                    _result_to_json(job.result),
                    json.dumps({"kind": job.error.kind, "message": job.error.message,
                                "detail": job.error.detail}) if job.error else None,
                    job_id, expected_state.value,
                ),
            )
            return job

    def task_owner(self, task_id: str) -> Optional[str]:
        with self._lock:
            row = self._conn.execute(
                "SELECT user_id FROM tasks WHERE task_id=?", (task_id,)
            ).fetchone()
            return row[0] if row else None

    def get_task(self, task_id: str) -> Optional[sqlite3.Row]:
        with self._lock:
            return self._conn.execute(
                "SELECT * FROM tasks WHERE task_id=?", (task_id,)
            ).fetchone()

    def list_submissions(self, user_id: str, page: int = 1, page_size: int = PAGE_SIZE) -> dict:
        """One page of the user's tasks, newest first, with aggregate status."""
        if page < 1:
            page = 1
        with self._lock:
            total = self._conn.execute(
                "SELECT COUNT(*) FROM tasks WHERE user_id=?", (user_id,)
            ).fetchone()[0]
            rows = self._conn.execute(
                "SELECT * FROM tasks WHERE user_id=? ORDER BY submitted_at DESC, task_id DESC"
                " LIMIT ? OFFSET ?",
                (user_id, page_size, (page - 1) * page_size),
            ).fetchall()
        entries = []
        for row in rows:
            jobs = self.jobs_for_task(row["task_id"])
            done = all(j.state.terminal for j in jobs)
            file_meta = json.loads(row["file_json"])
            entries.append({
                "task_id": row["task_id"],
                "submitted_at": row["submitted_at"],
                "file_preview": {
                    "original_name": file_meta["original_name"],
                    "modality": file_meta["modality"],
                    "stored_path": file_meta["stored_path"],
                },
                "result_link": f"/api/tasks/{row['task_id']}/report",
                "status": "Completed" if done else "In-Progress",
            })
        pages = (total + page_size - 1) // page_size
        return {"page": page, "pages": pages, "total": total, "entries": entries}

    # --- detector stats -----------------------------------------------------

    def get_stats(self, detector_id: str) -> Optional[DetectorStats]:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM stats WHERE detector_id=?", (detector_id,)
            ).fetchone()
        if row is None:
            return None
        return DetectorStats(row["detector_id"], row["completed_count"], row["mean_seconds"])

    def put_stats(self, stats: DetectorStats) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO stats (detector_id, completed_count, mean_seconds) VALUES (?,?,?)"
                " ON CONFLICT(detector_id) DO UPDATE SET completed_count=excluded.completed_count,"
                " mean_seconds=excluded.mean_seconds",
                (stats.detector_id, stats.completed_count, stats.mean_seconds),
            )

    # --- analytics snapshots --------------------------------------------------

    def all_user_emails(self) -> List[str]:
        with self._lock:
            return [r[0] for r in self._conn.execute("SELECT email FROM users")]

    def all_task_rows(self) -> List[sqlite3.Row]:
        with self._lock:
            return self._conn.execute(
                "SELECT user_id, submitted_at, file_json FROM tasks"
            ).fetchall()

    def all_job_rows_with_files(self) -> List[sqlite3.Row]:
        with self._lock:
            return self._conn.execute(
                "SELECT j.detector_id, j.state, j.result_json, t.file_json"
                " FROM jobs j JOIN tasks t ON j.task_id = t.task_id"
            ).fetchall()

    def all_access_records(self) -> List[sqlite3.Row]:
        with self._lock:
            return self._conn.execute("SELECT * FROM access_records").fetchall()

    # --- access records -----------------------------------------------------

    def insert_access_records(self, records) -> None:
        with self._lock, self._conn:
            self._conn.executemany(
                "INSERT INTO access_records (timestamp, user_id, country_code, referrer) VALUES (?,?,?,?)",
                [(r.timestamp.isoformat(), r.user_id, r.country_code, r.referrer) for r in records],
            )
