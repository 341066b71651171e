"""Plugin-protocol conformance for the spectral-flatness reference detector,
exercised through the platform's detector runtime and scheduler."""

import json
import math
import struct
import subprocess
import sys
import wave
from pathlib import Path

import pytest

from dfom.domain import JobState, SupplementaryInfo, UserTier
from dfom.registry import load_catalog
from dfom.runtime import PluginInvocation, parse_plugin_output, run_plugin
from dfom.scheduler import SchedulerService
from dfom.accounts import AccountService, RecordingMailSink
from dfom.ingestion import IngestionService
from dfom.store import Store

DETECT = Path(__file__).parents[1] / "detect.py"
ENTRYPOINT = f"{sys.executable} {DETECT}"


def write_sine(path, seconds=1.0, freq=440.0, rate=16000):
    n = int(seconds * rate)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        frames = b"".join(
            struct.pack("<h", int(30000 * math.sin(2 * math.pi * freq * i / rate)))
            for i in range(n)
        )
        wf.writeframes(frames)
    return path


def invocation(tmp_path, input_path, gpu_index=0):
    return PluginInvocation(
        descriptor_id="spectral-flatness",
        entrypoint=ENTRYPOINT,
        input_path=str(input_path),
        output_path=str(tmp_path / "out" / "out.json"),
        gpu_index=gpu_index,
        timeout_seconds=10.0,
    )


def test_sine_score_deterministic_across_10_runs(tmp_path):
    wav = write_sine(tmp_path / "tone.wav")
    scores = set()
    for i in range(10):
        result = run_plugin(invocation(tmp_path, wav))
        assert 0.0 <= result.score <= 1.0
        scores.add(result.score)
    assert len(scores) == 1  # identical bytes, identical score
    # a pure tone concentrates the spectrum: flatness is low
    assert scores.pop() < 0.1


def test_gpu_index_is_advisory(tmp_path):
    wav = write_sine(tmp_path / "tone.wav")
    a = run_plugin(invocation(tmp_path, wav, gpu_index=0)).score
    b = run_plugin(invocation(tmp_path, wav, gpu_index=7)).score
    assert a == b


def test_output_parses_under_runtime_parser(tmp_path):
    wav = write_sine(tmp_path / "tone.wav")
    out = tmp_path / "direct.json"
    proc = subprocess.run([sys.executable, str(DETECT), str(wav), str(out)],
                          capture_output=True)
    assert proc.returncode == 0, proc.stderr
    score, frames, advanced = parse_plugin_output(out.read_bytes())
    assert 0.0 <= score <= 1.0


def test_noise_scores_flatter_than_tone(tmp_path):
    import random
    rng = random.Random(5)
    noise_path = tmp_path / "noise.wav"
    with wave.open(str(noise_path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(16000)
        wf.writeframes(b"".join(struct.pack("<h", rng.randint(-30000, 30000))
                                for _ in range(16000)))
    tone = run_plugin(invocation(tmp_path, write_sine(tmp_path / "tone.wav"))).score
    noise = run_plugin(invocation(tmp_path, noise_path)).score
    assert noise > tone


def test_60s_audio_under_10s(tmp_path):
    import time

    import numpy as np
    rate = 16000
    t = np.arange(60 * rate) / rate
    samples = (30000 * np.sin(2 * np.pi * 440 * t)).astype("<i2")
    path = tmp_path / "long.wav"
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(samples.tobytes())
    started = time.monotonic()
    result = run_plugin(invocation(tmp_path, path))
    assert time.monotonic() - started < 10.0
    assert 0.0 <= result.score <= 1.0


def test_corrupt_file_exits_nonzero(tmp_path):
    corrupt = tmp_path / "broken.wav"
    corrupt.write_bytes(b"RIFFnotawav")
    proc = subprocess.run(
        [sys.executable, str(DETECT), str(corrupt), str(tmp_path / "o.json")],
        capture_output=True,
    )
    assert proc.returncode != 0
    assert b"cannot decode" in proc.stderr


def test_corrupt_file_fails_job_and_frees_slot_through_scheduler(tmp_path):
    """Full path: registry entry -> scheduler -> subprocess -> Failed job."""
    catalog_dir = tmp_path / "catalog"
    catalog_dir.mkdir()
    (catalog_dir / "sf.json").write_text(json.dumps({
        "id": "spectral-flatness", "name": "Spectral Flatness", "year": 2024,
        "organization": "Reference", "modality": "audio", "scope": "Audio",
        "reference_url": "https://example.com", "repository_url": "https://example.com",
        "entrypoint": ENTRYPOINT, "timeout_seconds": 10.0,
        "eta_seed_seconds": 30.0, "enabled": True,
    }))
    registry = load_catalog(catalog_dir)
    store = Store(tmp_path / "store.db")
    mail = RecordingMailSink()
    accounts = AccountService(store, mail)
    accounts.register("u", "u@example.com", "a strong password")
    accounts.verify_email("u@example.com", mail.last_code_for("u@example.com"))
    user = store.get_user(username="u")
    ingestion = IngestionService(store, registry, upload_root=tmp_path / "up")
    svc = SchedulerService(store, registry, pool_size=2, poll_interval=0.02,
                           work_root=str(tmp_path / "work"))
    svc.start()
    try:
        # one decodable file, one corrupt file
        good = write_sine(tmp_path / "tone.wav").read_bytes()
        from dfom.domain import utcnow
        _, good_jobs = ingestion.create_submission(
            user_id=user["user_id"], tier=UserTier.REGULAR, original_name="tone.wav",
            content=good, detector_ids=["spectral-flatness"],
            supplementary=SupplementaryInfo(), now=utcnow())
        _, bad_jobs = ingestion.create_submission(
            user_id=user["user_id"], tier=UserTier.REGULAR, original_name="bad.wav",
            content=b"RIFFnotawav", detector_ids=["spectral-flatness"],
            supplementary=SupplementaryInfo(), now=utcnow())
        svc.notify()
        assert svc.wait_idle(timeout=25)
        good_job = store.get_job(good_jobs[0].job_id)
        assert good_job.state == JobState.COMPLETED
        assert 0.0 <= good_job.result.score <= 1.0
        bad_job = store.get_job(bad_jobs[0].job_id)
        assert bad_job.state == JobState.FAILED
        assert bad_job.error.kind == "nonzero_exit"
        assert "cannot decode" in (bad_job.error.detail or "")
        assert len(svc.core.pool.free) == 2
    finally:
        svc.stop()
        store.close()
