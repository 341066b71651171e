"""Detector plugin execution: isolated child processes, timeouts, output
parsing, and running-time statistics behind progress ETAs.

Plugin contract: ``entrypoint <input_path> <output_path>`` with the GPU slot
exported as ``DFOM_GPU_INDEX``; exit 0 means success and the output file must
hold a UTF-8 JSON object with a required ``score`` in [0, 1], an optional
``frame_scores`` array of numbers in [0, 1], and an optional ``advanced``
object passed through opaquely.
"""

from __future__ import annotations

import json
import math
import os
import shlex
import signal
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

from .domain import DetectionResult

STDERR_TAIL_BYTES = 8 * 1024
DEFAULT_TIMEOUT_SECONDS = 600.0
KILL_GRACE_SECONDS = 1.0

#: First-run ETA seeds, seconds, per modality.
ETA_SEEDS = {"image": 30.0, "audio": 30.0, "video": 90.0}


class PluginError(Exception):
    """Base class for plugin execution failures."""

    kind = "plugin_error"


class LaunchFailure(PluginError):
    kind = "launch_failure"


class PluginTimeout(PluginError):
    kind = "timeout"

    def __init__(self, timeout_seconds: float):
        self.timeout_seconds = timeout_seconds
        super().__init__(f"plugin exceeded {timeout_seconds}s timeout")


class NonZeroExit(PluginError):
    kind = "nonzero_exit"

    def __init__(self, code: int, stderr_tail: str):
        self.code = code
        self.stderr_tail = stderr_tail
        super().__init__(f"plugin exited with code {code}")


class MalformedOutput(PluginError):
    kind = "malformed_output"


class ScoreOutOfRange(MalformedOutput):
    kind = "score_out_of_range"


@dataclass(frozen=True)
class PluginInvocation:
    descriptor_id: str
    entrypoint: str
    input_path: str
    output_path: str
    gpu_index: int
    timeout_seconds: float = DEFAULT_TIMEOUT_SECONDS


def parse_plugin_output(data: bytes) -> Tuple[float, Optional[tuple], Optional[dict]]:
    """Parse a plugin output document into (score, frame_scores, advanced).

    Elapsed time is measured by the caller, not carried in the document.
    """
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedOutput(f"output is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedOutput("output must be a JSON object")
    score = doc.get("score")
    if not isinstance(score, (int, float)) or isinstance(score, bool):
        raise MalformedOutput("missing or non-numeric 'score'")
    if not (0.0 <= score <= 1.0):
        raise ScoreOutOfRange(f"score {score} outside [0, 1]")
    frame_scores = doc.get("frame_scores")
    if frame_scores is not None:
        if not isinstance(frame_scores, list):
            raise MalformedOutput("'frame_scores' must be an array")
        for s in frame_scores:
            if not isinstance(s, (int, float)) or isinstance(s, bool):
                raise MalformedOutput("frame scores must be numbers")
            if not (0.0 <= s <= 1.0):
                raise ScoreOutOfRange(f"frame score {s} outside [0, 1]")
        frame_scores = tuple(float(s) for s in frame_scores)
    advanced = doc.get("advanced")
    if advanced is not None and not isinstance(advanced, dict):
        raise MalformedOutput("'advanced' must be an object")
    return float(score), frame_scores, advanced


def serialize_result(result: DetectionResult) -> bytes:
    """Inverse of parse_plugin_output for valid results (round-trip tested)."""
    doc: dict = {"score": result.score}
    if result.frame_scores is not None:
        doc["frame_scores"] = list(result.frame_scores)
    if result.advanced is not None:
        doc["advanced"] = result.advanced
    return json.dumps(doc).encode("utf-8")


def _terminate_tree(proc: subprocess.Popen) -> None:
    # The child runs in its own process group so the whole tree can be reaped.
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()
    try:
        proc.wait(timeout=KILL_GRACE_SECONDS)
    except subprocess.TimeoutExpired:
        pass


def run_plugin(inv: PluginInvocation) -> DetectionResult:
    """Execute one plugin invocation to completion and parse its output."""
    argv = shlex.split(inv.entrypoint) + [inv.input_path, inv.output_path]
    env = dict(os.environ, DFOM_GPU_INDEX=str(inv.gpu_index))
    Path(inv.output_path).parent.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    try:
        proc = subprocess.Popen(
            argv,
            stdout=subprocess.DEVNULL,
            stderr=subprocess.PIPE,
            env=env,
            start_new_session=True,
        )
    except OSError as exc:
        raise LaunchFailure(f"could not launch {argv[0]!r}: {exc}") from exc
    try:
        _, stderr = proc.communicate(timeout=inv.timeout_seconds)
    except subprocess.TimeoutExpired:
        _terminate_tree(proc)
        raise PluginTimeout(inv.timeout_seconds) from None
    elapsed = time.monotonic() - started
    if proc.returncode != 0:
        tail = (stderr or b"")[-STDERR_TAIL_BYTES:].decode("utf-8", errors="replace")
        raise NonZeroExit(proc.returncode, tail)
    try:
        data = Path(inv.output_path).read_bytes()
    except OSError as exc:
        raise MalformedOutput(f"plugin wrote no output file: {exc}") from exc
    score, frame_scores, advanced = parse_plugin_output(data)
    return DetectionResult(
        score=score,
        elapsed_seconds=max(elapsed, 1e-9),
        frame_scores=frame_scores,
        advanced=advanced,
    )


# --- running-time statistics -----------------------------------------------


@dataclass(frozen=True)
class DetectorStats:
    """Per-detector completed-run count and exact running mean duration.

    The ETA seed counts as the first sample, so count >= 1 and first-run
    progress bars have a sane denominator.
    """

    detector_id: str
    completed_count: int
    mean_seconds: float

    @classmethod
    def seeded(cls, detector_id: str, seed_seconds: float) -> "DetectorStats":
        return cls(detector_id, 1, seed_seconds)

    @classmethod
    def empty(cls, detector_id: str) -> "DetectorStats":
        """No samples yet; mean is a placeholder until the first recording."""
        return cls(detector_id, 0, 0.0)


def record_elapsed(stats: DetectorStats, elapsed_seconds: float) -> DetectorStats:
    if elapsed_seconds <= 0:
        raise ValueError("elapsed_seconds must be positive")
    n = stats.completed_count
    if n == 0:
        return DetectorStats(stats.detector_id, 1, elapsed_seconds)
    mean = (stats.mean_seconds * n + elapsed_seconds) / (n + 1)
    return DetectorStats(stats.detector_id, n + 1, mean)


def estimate_progress(elapsed_seconds: float, mean_seconds: float, terminal: bool) -> int:
    """Percent complete: capped at 99 while running, exactly 100 at terminal."""
    if terminal:
        return 100
    if mean_seconds <= 0:
        raise ValueError("mean_seconds must be positive")
    return min(99, int(math.floor(100.0 * max(elapsed_seconds, 0.0) / mean_seconds)))
