import pytest
from hypothesis import given, strategies as st

from dfom.domain import MediaModality, SupplementaryInfo, UserTier
from dfom.ingestion import (
    EmptySelection,
    ModalityMismatch,
    QuotaExceeded,
    UnsupportedFileType,
    check_quota,
    classify_modality,
)
from dfom.registry import UnknownDetector
from conftest import make_user, ts

TABLE = {
    "mp4": MediaModality.VIDEO, "bmp": MediaModality.VIDEO, "tif": MediaModality.VIDEO,
    "nef": MediaModality.VIDEO, "raf": MediaModality.VIDEO, "avi": MediaModality.VIDEO,
    "mov": MediaModality.VIDEO,
    "jpg": MediaModality.IMAGE, "png": MediaModality.IMAGE, "jpeg": MediaModality.IMAGE,
    "flac": MediaModality.AUDIO, "wav": MediaModality.AUDIO, "mp3": MediaModality.AUDIO,
}


class TestClassifyModality:
    @pytest.mark.parametrize("ext,modality", sorted(TABLE.items()))
    def test_supported_extensions(self, ext, modality):
        assert classify_modality(ext) == modality

    def test_case_insensitive(self):
        assert classify_modality("JPEG") == MediaModality.IMAGE
        assert classify_modality("Mp4") == MediaModality.VIDEO

    @pytest.mark.parametrize("ext", ["pdf", "exe", "gif", "webm", "txt", ""])
    def test_unsupported(self, ext):
        with pytest.raises(UnsupportedFileType):
            classify_modality(ext)


class TestQuota:
    def test_fresh_regular_user_has_30(self, store):
        assert check_quota("u1", UserTier.REGULAR, ts(), store) == 30

    def test_advanced_exhausted(self, store):
        for _ in range(300):
            assert store.try_consume_quota("u2", "2024-03-01", 300)
        assert check_quota("u2", UserTier.ADVANCED, ts(), store) == 0
        assert not store.try_consume_quota("u2", "2024-03-01", 300)

    def test_super_unbounded(self, store):
        for _ in range(10_000):
            store.try_consume_quota("u3", "2024-03-01", None)
        assert check_quota("u3", UserTier.SUPER, ts(), store) is None

    def test_resets_at_utc_midnight(self, store):
        for _ in range(30):
            store.try_consume_quota("u4", "2024-03-01", 30)
        assert not store.try_consume_quota("u4", "2024-03-01", 30)
        assert store.try_consume_quota("u4", "2024-03-02", 30)


class TestCreateSubmission:
    def submit(self, ingestion, user, name="image.jpg", detectors=("npr", "glff", "hifi"),
               now=None):
        return ingestion.create_submission(
            user_id=user["user_id"], tier=UserTier(user["tier"]),
            original_name=name, content=b"bytes",
            detector_ids=list(detectors),
            supplementary=SupplementaryInfo(), now=now or ts(),
        )

    def test_one_job_per_detector_in_order(self, ingestion, store, accounts, mail_sink):
        user = make_user(store, accounts, mail_sink, "carol")
        task, jobs = self.submit(ingestion, user)
        assert [j.detector_id for j in jobs] == ["npr", "glff", "hifi"]
        assert all(j.task_id == task.task_id for j in jobs)
        assert [j.detector_id for j in store.jobs_for_task(task.task_id)] == ["npr", "glff", "hifi"]

    def test_audio_detector_on_video_is_modality_mismatch(self, ingestion, store, accounts, mail_sink):
        user = make_user(store, accounts, mail_sink, "dave")
        with pytest.raises(ModalityMismatch):
            self.submit(ingestion, user, name="clip.mp4", detectors=["rawnet2"])

    def test_unknown_detector(self, ingestion, store, accounts, mail_sink):
        user = make_user(store, accounts, mail_sink, "erin")
        with pytest.raises(UnknownDetector):
            self.submit(ingestion, user, detectors=["nonexistent"])

    def test_empty_selection(self, ingestion, store, accounts, mail_sink):
        user = make_user(store, accounts, mail_sink, "frank")
        with pytest.raises(EmptySelection):
            self.submit(ingestion, user, detectors=[])

    def test_31st_task_of_day_rejected(self, ingestion, store, accounts, mail_sink):
        user = make_user(store, accounts, mail_sink, "grace")
        for i in range(30):
            self.submit(ingestion, user, now=ts(i))
        with pytest.raises(QuotaExceeded):
            self.submit(ingestion, user, now=ts(30))

    def test_multi_detector_task_is_one_quota_unit(self, ingestion, store, accounts, mail_sink):
        user = make_user(store, accounts, mail_sink, "heidi")
        self.submit(ingestion, user, detectors=["npr", "glff", "hifi"])
        assert check_quota(user["user_id"], UserTier.REGULAR, ts(), store) == 29

    def test_rejected_submission_creates_nothing(self, ingestion, store, accounts, mail_sink):
        user = make_user(store, accounts, mail_sink, "ivan")
        before = check_quota(user["user_id"], UserTier.REGULAR, ts(), store)
        with pytest.raises(UnsupportedFileType):
            self.submit(ingestion, user, name="doc.pdf")
        with pytest.raises(ModalityMismatch):
            self.submit(ingestion, user, detectors=["rawnet2"])
        assert check_quota(user["user_id"], UserTier.REGULAR, ts(), store) == before
        assert store.queued_jobs() == []

    def test_upload_stored_under_user_and_task(self, ingestion, store, accounts, mail_sink):
        user = make_user(store, accounts, mail_sink, "judy")
        task, _ = self.submit(ingestion, user)
        assert task.file.stored_path.endswith(f"{user['user_id']}/{task.task_id}/image.jpg")
        with open(task.file.stored_path, "rb") as fh:
            assert fh.read() == b"bytes"

    def test_jobs_created_equals_sum_of_selections(self, ingestion, store, accounts, mail_sink):
        user = make_user(store, accounts, mail_sink, "kim", tier=UserTier.ADVANCED)
        selections = [("a.jpg", ["npr"]), ("b.png", ["glff", "hifi"]),
                      ("c.wav", ["rawnet2", "whisper", "rawnet3"])]
        total = 0
        for i, (name, dets) in enumerate(selections):
            _, jobs = self.submit(ingestion, user, name=name, detectors=dets, now=ts(i))
            total += len(jobs)
        assert total == sum(len(d) for _, d in selections)
        assert len(store.queued_jobs()) == total
