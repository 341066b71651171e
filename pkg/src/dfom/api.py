"""HTTP boundary: auth, submission, progress, reports, history, catalog,
and the analytics summary.

JSON over HTTP; sessions via ``Authorization: Bearer <token>``. Unknown and
foreign resources are both 404 so resource ids cannot be enumerated.
"""

from __future__ import annotations

import json
from datetime import timezone
from typing import List, Optional

from fastapi import Depends, FastAPI, File, Form, Header, HTTPException, UploadFile
from fastapi.responses import JSONResponse

from . import analytics
from .accounts import (
    AccountService,
    AlreadyVerified,
    BadCredentials,
    CodeExpired,
    CodeMismatch,
    DuplicateEmail,
    DuplicateUsername,
    Unverified,
    WeakPassword,
)
from .domain import GroundTruth, JobState, MediaModality, SupplementaryInfo, UserTier, utcnow
from .ingestion import (
    EmptySelection,
    FileTooLarge,
    IngestionService,
    ModalityMismatch,
    QuotaExceeded,
    UnsupportedFileType,
)
from .registry import DetectorRegistry, UnknownDetector
from .runtime import DetectorStats, estimate_progress
from .store import Store


def create_app(
    store: Store,
    registry: DetectorRegistry,
    accounts: AccountService,
    ingestion: IngestionService,
    scheduler=None,
    max_upload_bytes: Optional[int] = None,
) -> FastAPI:
    app = FastAPI(title="dfom", docs_url=None, redoc_url=None)

    def current_user(authorization: str = Header(default="")):
        if not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        user = accounts.authenticate(authorization[len("Bearer "):])
        if user is None:
            raise HTTPException(status_code=401, detail="invalid or expired session")
        return user

    def owned_task(task_id: str, user) -> None:
        if store.task_owner(task_id) != user["user_id"]:
            raise HTTPException(status_code=404, detail="no such task")

    # --- auth ------------------------------------------------------------

    @app.post("/api/signup", status_code=201)
    def signup(payload: dict):
        try:
            user_id = accounts.register(
                payload.get("username", ""), payload.get("email", ""),
                payload.get("password", ""),
            )
        except (DuplicateUsername, DuplicateEmail) as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except WeakPassword as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"user_id": user_id}

    @app.post("/api/verify")
    def verify(payload: dict):
        try:
            accounts.verify_email(payload.get("email", ""), payload.get("code", ""))
        except CodeExpired as exc:
            raise HTTPException(status_code=410, detail=str(exc))
        except (CodeMismatch, AlreadyVerified) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"verified": True}

    @app.post("/api/login")
    def login(payload: dict):
        try:
            token = accounts.login(payload.get("identifier", ""), payload.get("password", ""))
        except Unverified as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        except BadCredentials as exc:
            raise HTTPException(status_code=401, detail=str(exc))
        return {"token": token}

    # --- catalog -----------------------------------------------------------

    @app.get("/api/detectors")
    def catalog(modality: Optional[str] = None):
        if modality is not None:
            try:
                descriptors = registry.detectors_for(MediaModality(modality))
            except ValueError:
                raise HTTPException(status_code=422, detail=f"unknown modality {modality!r}")
        else:
            descriptors = [d for d in registry.all() if d.enabled]
        return [
            {
                "id": d.detector_id, "name": d.display_name, "year": d.year,
                "organization": d.organization, "modality": d.modality.value,
                "scope": d.detection_scope, "reference_url": d.reference_url,
                "repository_url": d.repository_url,
                "eta_seed_seconds": d.eta_seed_seconds,
            }
            for d in descriptors
        ]

    # --- submission ----------------------------------------------------------

    @app.post("/api/tasks", status_code=201)
    async def submit(
        file: UploadFile = File(...),
        detector_ids: List[str] = Form(...),
        data_source: Optional[str] = Form(None),
        ground_truth: Optional[str] = Form(None),
        background: Optional[str] = Form(None),
        research_consent: bool = Form(False),
        user=Depends(current_user),
    ):
        content = await file.read()
        if max_upload_bytes is not None and len(content) > max_upload_bytes:
            raise HTTPException(status_code=413, detail="file too large")
        # detector_ids may arrive as repeated fields or one comma-joined field
        ids = [i for raw in detector_ids for i in raw.split(",") if i]
        supplementary = SupplementaryInfo(
            data_source=data_source,
            ground_truth=GroundTruth(ground_truth) if ground_truth else None,
            background=background,
            research_consent=research_consent,
        )
        try:
            task, jobs = ingestion.create_submission(
                user_id=user["user_id"],
                tier=UserTier(user["tier"]),
                original_name=file.filename or "",
                content=content,
                detector_ids=ids,
                supplementary=supplementary,
                now=utcnow(),
            )
        except QuotaExceeded as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        except UnsupportedFileType as exc:
            raise HTTPException(status_code=415, detail=str(exc))
        except FileTooLarge as exc:
            raise HTTPException(status_code=413, detail=str(exc))
        except (ModalityMismatch, UnknownDetector, EmptySelection) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        if scheduler is not None:
            scheduler.notify()
        return {"task_id": task.task_id, "job_ids": [j.job_id for j in jobs]}

    # --- progress / report / history ----------------------------------------

    def _mean_seconds(detector_id: str) -> float:
        stats = store.get_stats(detector_id)
        if stats is not None:
            return stats.mean_seconds
        return registry.get(detector_id).eta_seed_seconds

    @app.get("/api/tasks/{task_id}/progress")
    def progress(task_id: str, user=Depends(current_user)):
        owned_task(task_id, user)
        now = utcnow()
        views = []
        for job in store.jobs_for_task(task_id):
            mean = _mean_seconds(job.detector_id)
            if job.state.terminal:
                elapsed = 0.0
            elif job.started_at is not None:
                elapsed = (now - job.started_at).total_seconds()
            else:
                elapsed = 0.0
            percent = estimate_progress(elapsed, mean, job.state.terminal)
            views.append({
                "job_id": job.job_id,
                "detector_id": job.detector_id,
                "state": job.state.value,
                "percent": percent,
                "eta_seconds": max(0.0, mean - elapsed) if not job.state.terminal else 0.0,
                "score": job.result.score if job.result else None,
                "error": job.error.message if job.error else None,
                "result_link": f"/api/tasks/{task_id}/report"
                if job.state == JobState.COMPLETED else None,
            })
        return JSONResponse(views, headers={"Cache-Control": "no-store"})

    @app.get("/api/tasks/{task_id}/report")
    def report(task_id: str, user=Depends(current_user)):
        owned_task(task_id, user)
        jobs = store.jobs_for_task(task_id)
        if not any(j.state.terminal for j in jobs):
            raise HTTPException(status_code=409, detail="nothing completed yet")
        task_row = store.get_task(task_id)
        rows = []
        for job in jobs:
            d = registry.get(job.detector_id)
            rows.append({
                "detector_id": d.detector_id,
                "name": d.display_name,
                "year": d.year,
                "organization": d.organization,
                "scope": d.detection_scope,
                "reference_url": d.reference_url,
                "repository_url": d.repository_url,
                "state": job.state.value,
                "score": job.result.score if job.result else None,
                "frame_scores": list(job.result.frame_scores)
                if job.result and job.result.frame_scores is not None else None,
                "advanced": job.result.advanced if job.result else None,
                "error": job.error.message if job.error else None,
            })
        return {
            "task_id": task_id,
            "submitted_at": task_row["submitted_at"],
            "file": json.loads(task_row["file_json"])["original_name"],
            "detectors": rows,
        }

    @app.get("/api/me/submissions")
    def history(page: int = 1, user=Depends(current_user)):
        return store.list_submissions(user["user_id"], page=page)

    # --- analytics ------------------------------------------------------------

    @app.get("/api/analytics/summary")
    def summary(user=Depends(current_user)):
        if UserTier(user["tier"]) != UserTier.SUPER:
            raise HTTPException(status_code=403, detail="super users only")
        users = store.all_user_emails()
        tasks = store.all_task_rows()
        jobs = store.all_job_rows_with_files()
        access = store.all_access_records()
        from datetime import datetime
        completed = []
        for row in jobs:
            if row["state"] == JobState.COMPLETED.value and row["result_json"]:
                result = json.loads(row["result_json"])
                modality = MediaModality(json.loads(row["file_json"])["modality"])
                completed.append((row["detector_id"], modality, result["elapsed_seconds"]))
        records = [
            analytics.AccessRecord(
                timestamp=datetime.fromisoformat(r["timestamp"]),
                user_id=r["user_id"], country_code=r["country_code"],
                referrer=r["referrer"],
            )
            for r in access
        ]
        return analytics.usage_summary(
            user_emails=users,
            task_user_ids=[t["user_id"] for t in tasks],
            task_submitted_at=[datetime.fromisoformat(t["submitted_at"]) for t in tasks],
            job_detector_ids=[j["detector_id"] for j in jobs],
            completed_runtimes=completed,
            access_records=records,
        )

    return app
