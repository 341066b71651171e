import sys
import time
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from dfom.accounts import AccountService, RecordingMailSink
from dfom.domain import DetectionResult, UserTier, utcnow
from dfom.ingestion import IngestionService
from dfom.registry import load_catalog
from dfom.store import Store

TESTS_DIR = Path(__file__).parent


@pytest.fixture
def store(tmp_path):
    s = Store(tmp_path / "store.db")
    yield s
    s.close()


@pytest.fixture
def registry():
    return load_catalog()


@pytest.fixture
def mail_sink():
    return RecordingMailSink()


@pytest.fixture
def accounts(store, mail_sink):
    return AccountService(store, mail_sink)


@pytest.fixture
def ingestion(store, registry, tmp_path):
    return IngestionService(store, registry, upload_root=tmp_path / "uploads")


@pytest.fixture
def verified_user(store, accounts, mail_sink):
    """A verified Regular user, returned as (user_row, password)."""
    accounts.register("alice", "alice@example.com", "correct horse battery")
    accounts.verify_email("alice@example.com", mail_sink.last_code_for("alice@example.com"))
    return store.get_user(username="alice"), "correct horse battery"


def make_user(store, accounts, mail_sink, username, tier=UserTier.REGULAR):
    email = f"{username}@example.com"
    accounts.register(username, email, "a strong password")
    accounts.verify_email(email, mail_sink.last_code_for(email))
    row = store.get_user(username=username)
    if tier != UserTier.REGULAR:
        store.set_tier(row["user_id"], tier)
        row = store.get_user(username=username)
    return row


def sleeping_executor(duration: float = 0.0, score: float = 0.7):
    """In-process stand-in for plugin execution with a fixed duration."""

    def execute(job, entrypoint, timeout, gpu_index):
        if duration:
            time.sleep(duration)
        return DetectionResult(score=score, elapsed_seconds=max(duration, 1e-6))

    return execute


def ts(offset_seconds: float = 0.0) -> datetime:
    return datetime(2024, 3, 1, 12, 0, 0, tzinfo=timezone.utc) + timedelta(seconds=offset_seconds)
