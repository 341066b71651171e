"""Job balancing: frequency-inverse priority ordering and GPU-slot dispatch.

`SchedulerCore` is the single-writer state machine over the pending queue,
the GPU pool, and the per-user frequency window; it is deterministic given
timestamps and is what the fairness/pool tests drive directly.
`SchedulerService` wraps the core with a monitor thread, a serialized command
channel, and a worker pool that actually executes detector plugins.
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from . import runtime
from .domain import (
    Complete,
    DetectionJob,
    DetectionResult,
    Dispatch,
    Fail,
    JobError,
    JobState,
    Start,
    utcnow,
)
from .registry import DetectorRegistry
from .runtime import DetectorStats, PluginError, PluginInvocation, record_elapsed, run_plugin
from .store import StaleState, Store, UnknownJob

log = logging.getLogger(__name__)

DEFAULT_POOL_SIZE = 8
DEFAULT_WINDOW_HOURS = 24.0
DEFAULT_POLL_INTERVAL = 0.250


class GpuPool:
    """Fixed set of GPU slot indices; each slot held by at most one job."""

    def __init__(self, size: int = DEFAULT_POOL_SIZE):
        if size < 1:
            raise ValueError("pool size must be positive")
        self.size = size
        self._free = set(range(size))

    @property
    def free(self) -> set:
        return set(self._free)

    def acquire(self) -> Optional[int]:
        """Take the lowest-numbered free slot, or None when full."""
        if not self._free:
            return None
        slot = min(self._free)
        self._free.discard(slot)
        return slot

    def release(self, slot: int) -> None:
        if not (0 <= slot < self.size):
            raise ValueError(f"slot {slot} out of range")
        if slot in self._free:
            raise ValueError(f"slot {slot} released twice")
        self._free.add(slot)


class FrequencyWindow:
    """Per-user count of dispatch events inside a trailing rolling window."""

    def __init__(self, window: timedelta = timedelta(hours=DEFAULT_WINDOW_HOURS)):
        self.window = window
        self._events: Dict[str, List[datetime]] = {}

    def record(self, user_id: str, dispatched_at: datetime) -> None:
        self._events.setdefault(user_id, []).append(dispatched_at)

    def count(self, user_id: str, now: datetime) -> int:
        events = self._events.get(user_id)
        if not events:
            return 0
        cutoff = now - self.window
        # prune expired entries in place; events arrive in time order
        while events and events[0] <= cutoff:
            events.pop(0)
        return len(events)


def priority(user_id: str, window: FrequencyWindow, now: datetime) -> float:
    """Fair-share priority, strictly decreasing in recent dispatch count."""
    return 1.0 / (1.0 + window.count(user_id, now))


@dataclass(frozen=True)
class QueueEntry:
    job_id: str
    user_id: str
    detector_id: str
    enqueued_at: datetime
    seq: int  # global arrival order, breaks exact timestamp ties


class SchedulerCore:
    """Queue + pool + window under one logical writer. Not thread-safe by
    itself; SchedulerService serializes access through its command channel."""

    def __init__(self, pool_size: int = DEFAULT_POOL_SIZE,
                 window_hours: float = DEFAULT_WINDOW_HOURS):
        self.pool = GpuPool(pool_size)
        self.window = FrequencyWindow(timedelta(hours=window_hours))
        self._pending: List[QueueEntry] = []
        self._assigned: Dict[str, int] = {}  # job_id -> gpu slot
        self._seq = 0
        self._known: set = set()

    # --- queue ---------------------------------------------------------

    def enqueue(self, job_id: str, user_id: str, detector_id: str,
                enqueued_at: datetime) -> bool:
        """Add a Queued job; idempotent per job_id."""
        if job_id in self._known:
            return False
        self._known.add(job_id)
        self._pending.append(QueueEntry(job_id, user_id, detector_id, enqueued_at, self._seq))
        self._seq += 1
        return True

    def pending_count(self) -> int:
        return len(self._pending)

    def active_count(self) -> int:
        return len(self._assigned)

    def select_next(self, now: Optional[datetime] = None) -> Optional[QueueEntry]:
        """The pending job maximizing user priority; FIFO across ties."""
        if not self._pending:
            return None
        now = now or utcnow()
        return min(
            self._pending,
            key=lambda e: (-priority(e.user_id, self.window, now), e.enqueued_at, e.seq),
        )

    def dispatch_step(self, now: Optional[datetime] = None) -> Optional[Tuple[QueueEntry, int]]:
        """Pop the highest-priority job onto the lowest free slot, recording
        the dispatch in the frequency window; None when nothing can move."""
        now = now or utcnow()
        if not self._pending or not self.pool.free:
            return None
        entry = self.select_next(now)
        slot = self.pool.acquire()
        assert entry is not None and slot is not None
        self._pending.remove(entry)
        self._assigned[entry.job_id] = slot
        self.window.record(entry.user_id, now)
        return entry, slot

    def on_completion(self, job_id: str) -> int:
        """Release the job's slot; returns the freed slot index."""
        if job_id not in self._assigned:
            raise UnknownJob(job_id)
        slot = self._assigned.pop(job_id)
        self.pool.release(slot)
        return slot


# --- threaded service -------------------------------------------------------

#: Executes (job, entrypoint, timeout, gpu_index) and returns a result.
PluginExecutor = Callable[[DetectionJob, str, float, int], DetectionResult]


def default_executor(store: Store, work_root="work") -> PluginExecutor:
    """Run the descriptor's entrypoint as a child process per the plugin
    contract, with scratch output under ``work/<job_id>/out.json``."""

    def execute(job: DetectionJob, entrypoint: str, timeout: float, gpu_index: int) -> DetectionResult:
        task_row = store.get_task(job.task_id)
        import json as _json
        input_path = _json.loads(task_row["file_json"])["stored_path"]
        out_path = Path(work_root) / job.job_id / "out.json"
        inv = PluginInvocation(
            descriptor_id=job.detector_id,
            entrypoint=entrypoint,
            input_path=input_path,
            output_path=str(out_path),
            gpu_index=gpu_index,
            timeout_seconds=timeout,
        )
        try:
            return run_plugin(inv)
        finally:
            # scratch is job-private; clear it on completion
            try:
                if out_path.exists():
                    out_path.unlink()
                out_path.parent.rmdir()
            except OSError:
                pass

    return execute


class SchedulerService:
    """Monitor thread + worker pool around SchedulerCore.

    All state mutation happens on the monitor thread; workers only execute
    plugins and post completion commands back onto the channel.
    """

    def __init__(
        self,
        store: Store,
        registry: DetectorRegistry,
        pool_size: int = DEFAULT_POOL_SIZE,
        window_hours: float = DEFAULT_WINDOW_HOURS,
        poll_interval: float = DEFAULT_POLL_INTERVAL,
        executor: Optional[PluginExecutor] = None,
        work_root: str = "work",
    ):
        self.store = store
        self.registry = registry
        self.core = SchedulerCore(pool_size, window_hours)
        self.poll_interval = poll_interval
        self.executor = executor or default_executor(store, work_root)
        self._commands: "queue.Queue" = queue.Queue()
        self._workers = ThreadPoolExecutor(max_workers=pool_size, thread_name_prefix="dfom-worker")
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None
        self._user_by_task: Dict[str, str] = {}

    # --- lifecycle -------------------------------------------------------

    def start(self) -> None:
        self._thread = threading.Thread(target=self.run_monitor_loop, daemon=True,
                                        name="dfom-scheduler")
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread:
            self._thread.join(timeout=10)
        self._workers.shutdown(wait=False, cancel_futures=True)

    def notify(self) -> None:
        """Wake the monitor loop immediately (e.g. right after a submit)."""
        self._commands.put(("poll",))

    def run_monitor_loop(self) -> None:
        """Ingest new Queued jobs, dispatch until blocked, sleep, repeat."""
        while not self._stop.is_set():
            try:
                self._drain_commands()
                self._ingest_new_jobs()
                while self._try_dispatch():
                    pass
            except Exception:
                log.exception("scheduler iteration failed; continuing")
            try:
                cmd = self._commands.get(timeout=self.poll_interval)
                self._handle(cmd)
            except queue.Empty:
                pass

    # --- internals -------------------------------------------------------

    def _drain_commands(self) -> None:
        while True:
            try:
                self._handle(self._commands.get_nowait())
            except queue.Empty:
                return

    def _handle(self, cmd) -> None:
        if cmd[0] == "complete":
            _, job_id, apply = cmd
            apply()
            try:
                self.core.on_completion(job_id)
            except UnknownJob:
                log.warning("completion for unknown job %s", job_id)

    def _owner_of(self, task_id: str) -> str:
        user = self._user_by_task.get(task_id)
        if user is None:
            user = self.store.task_owner(task_id) or ""
            self._user_by_task[task_id] = user
        return user

    def _ingest_new_jobs(self) -> None:
        for job in self.store.queued_jobs():
            self.core.enqueue(job.job_id, self._owner_of(job.task_id),
                              job.detector_id, job.enqueued_at or utcnow())

    def _try_dispatch(self) -> bool:
        now = utcnow()
        step = self.core.dispatch_step(now)
        if step is None:
            return False
        entry, slot = step
        try:
            job = self.store.atomic_transition(entry.job_id, JobState.QUEUED,
                                               Dispatch(gpu_index=slot), now=now)
        except (StaleState, UnknownJob):
            # someone else moved the job; give the slot back
            self.core.on_completion(entry.job_id)
            return True
        descriptor = self.registry.get(entry.detector_id)
        self._workers.submit(self._run_job, job, descriptor.entrypoint,
                             descriptor.timeout_seconds, slot)
        return True

    def _run_job(self, job: DetectionJob, entrypoint: str, timeout: float, slot: int) -> None:
        try:
            self.store.atomic_transition(job.job_id, JobState.DISPATCHED, Start())
        except StaleState:
            self._commands.put(("complete", job.job_id, lambda: None))
            return
        try:
            result = self.executor(job, entrypoint, timeout, slot)
        except PluginError as exc:
            error = JobError(kind=exc.kind, message=str(exc),
                             detail=getattr(exc, "stderr_tail", None))
            self._commands.put(("complete", job.job_id,
                                lambda: self._apply_failure(job, error)))
        except Exception as exc:  # defensive: executor bugs must free the slot
            log.exception("executor crashed for job %s", job.job_id)
            error = JobError(kind="internal", message=str(exc))
            self._commands.put(("complete", job.job_id,
                                lambda: self._apply_failure(job, error)))
        else:
            self._commands.put(("complete", job.job_id,
                                lambda: self._apply_success(job, result)))

    def _apply_success(self, job: DetectionJob, result: DetectionResult) -> None:
        self.store.atomic_transition(job.job_id, JobState.RUNNING, Complete(result))
        stats = self.store.get_stats(job.detector_id)
        if stats is None:
            seed = self.registry.get(job.detector_id).eta_seed_seconds
            stats = DetectorStats.seeded(job.detector_id, seed)
        self.store.put_stats(record_elapsed(stats, result.elapsed_seconds))

    def _apply_failure(self, job: DetectionJob, error: JobError) -> None:
        current = self.store.get_job(job.job_id)
        if current.state == JobState.RUNNING:
            self.store.atomic_transition(job.job_id, JobState.RUNNING, Fail(error))
        elif current.state == JobState.DISPATCHED:
            self.store.atomic_transition(job.job_id, JobState.DISPATCHED, Fail(error))

    # --- introspection ----------------------------------------------------

    def wait_idle(self, timeout: float = 30.0) -> bool:
        """Block until no jobs are pending or active (test helper)."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if (self.core.pending_count() == 0 and self.core.active_count() == 0
                    and not self.store.queued_jobs()):
                return True
            time.sleep(0.01)
        return False
