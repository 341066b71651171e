"""Walk a submission through the whole platform: account signup and email
verification, an image upload fanned out to three detectors, fair-share
dispatch onto the GPU pool, and the final per-detector scores.

Run with: python demos/end_to_end_submission.py
"""

import tempfile
import time
from pathlib import Path

from dfom import build_platform
from dfom.accounts import RecordingMailSink
from dfom.domain import SupplementaryInfo, UserTier, utcnow


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        mail = RecordingMailSink()
        platform = build_platform(data_dir=Path(tmp) / "data", mail_sink=mail)
        platform.start()
        try:
            accounts = platform.accounts
            accounts.register("alice", "alice@example.com", "a long passphrase")
            code = mail.last_code_for("alice@example.com")
            accounts.verify_email("alice@example.com", code)
            token = accounts.login("alice", "a long passphrase")
            user = accounts.authenticate(token)
            print(f"logged in as {user['username']} ({user['tier']})")

            task, jobs = platform.ingestion.create_submission(
                user_id=user["user_id"],
                tier=UserTier(user["tier"]),
                original_name="portrait.png",
                content=b"\x89PNG fake image payload",
                detector_ids=["npr", "glff", "hifi"],
                supplementary=SupplementaryInfo(research_consent=True),
                now=utcnow(),
            )
            print(f"submitted task {task.task_id} with {len(jobs)} detector jobs")

            platform.scheduler.notify()
            while True:
                current = platform.store.jobs_for_task(task.task_id)
                states = {j.detector_id: j.state.value for j in current}
                print("  states:", states)
                if all(j.state.terminal for j in current):
                    break
                time.sleep(0.3)

            print("results:")
            for job in platform.store.jobs_for_task(task.task_id):
                print(f"  {job.detector_id}: fake likelihood {job.result.score:.2f}"
                      f" on GPU {job.result.advanced['gpu_index']}")

            page = platform.store.list_submissions(user["user_id"])
            entry = page["entries"][0]
            print(f"history: {entry['file_preview']['original_name']}"
                  f" -> {entry['status']} ({entry['result_link']})")
        finally:
            platform.stop()


if __name__ == "__main__":
    main()
