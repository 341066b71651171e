"""Usage aggregations over platform logs: daily submission series, detector
popularity, per-modality runtimes, and user-demographic distributions.

All computations are pure functions over snapshots; dates are UTC throughout.
Access records arrive from a CSV drop with header
``timestamp,user_id,country_code,referrer``.
"""

from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .domain import MediaModality

DEFAULT_SEARCH_ENGINE_HOSTS = frozenset({
    "google.com", "www.google.com", "bing.com", "www.bing.com",
    "duckduckgo.com", "search.yahoo.com", "baidu.com", "www.baidu.com",
})

UNKNOWN_COUNTRY = "??"


class EmptyRange(ValueError):
    pass


@dataclass(frozen=True)
class AccessRecord:
    timestamp: datetime
    user_id: Optional[str]
    country_code: str
    referrer: str  # "", "search", or a referring host


def load_access_csv(text: str) -> List[AccessRecord]:
    reader = csv.DictReader(io.StringIO(text))
    records = []
    for row in reader:
        ts = datetime.fromisoformat(row["timestamp"])
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        records.append(AccessRecord(
            timestamp=ts,
            user_id=row["user_id"] or None,
            country_code=(row["country_code"] or UNKNOWN_COUNTRY).upper(),
            referrer=row["referrer"] or "",
        ))
    return records


def classify_referrer(referrer: str,
                      search_hosts: frozenset = DEFAULT_SEARCH_ENGINE_HOSTS) -> str:
    if not referrer:
        return "Direct"
    host = referrer.lower().split("/")[0]
    if host == "search" or host in search_hosts:
        return "Search"
    return f"Referral:{host}"


def _percentages(counter: Counter) -> Dict[str, float]:
    total = sum(counter.values())
    if total == 0:
        return {}
    return {k: round(100.0 * v / total, 1) for k, v in counter.most_common()}


def cumulative_daily(submitted_at: Sequence[datetime],
                     start: date, end: date) -> List[Tuple[date, int, int]]:
    """Per-UTC-day submission counts over [start, end], zero-filled, with a
    running cumulative sum. Returns (day, count, cumulative) triples."""
    if end < start:
        raise EmptyRange(f"range {start}..{end} is empty")
    per_day: Counter = Counter()
    for ts in submitted_at:
        d = ts.astimezone(timezone.utc).date()
        if start <= d <= end:
            per_day[d] += 1
    series = []
    running = 0
    day = start
    while day <= end:
        count = per_day.get(day, 0)
        running += count
        series.append((day, count, running))
        day += timedelta(days=1)
    return series


def detector_popularity(detector_ids: Iterable[str]) -> List[Tuple[str, int]]:
    """Query count per detector, descending; equal counts tie by detector_id."""
    counts = Counter(detector_ids)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def mean_runtime_by_modality(
    completed: Iterable[Tuple[MediaModality, float]],
) -> Dict[MediaModality, float]:
    """Arithmetic mean of elapsed seconds per modality; absent modalities are
    simply not present in the result."""
    sums: Dict[MediaModality, float] = defaultdict(float)
    counts: Dict[MediaModality, int] = defaultdict(int)
    for modality, seconds in completed:
        sums[modality] += seconds
        counts[modality] += 1
    return {m: sums[m] / counts[m] for m in sums}


def mean_runtime_by_detector(
    completed: Iterable[Tuple[str, float]],
) -> Dict[str, float]:
    sums: Dict[str, float] = defaultdict(float)
    counts: Dict[str, int] = defaultdict(int)
    for detector_id, seconds in completed:
        sums[detector_id] += seconds
        counts[detector_id] += 1
    return {d: sums[d] / counts[d] for d in sums}


def email_domain_distribution(emails: Iterable[str]) -> Dict[str, float]:
    """Percentage of users per (lowercased) email domain."""
    counts = Counter(e.rsplit("@", 1)[-1].lower() for e in emails)
    return _percentages(counts)


def demographic_distribution(
    records: Sequence[AccessRecord],
    search_hosts: frozenset = DEFAULT_SEARCH_ENGINE_HOSTS,
) -> Tuple[Dict[str, float], Dict[str, float]]:
    """(country percentages, access-source percentages) over access records."""
    countries = Counter(r.country_code or UNKNOWN_COUNTRY for r in records)
    sources = Counter(classify_referrer(r.referrer, search_hosts) for r in records)
    return _percentages(countries), _percentages(sources)


def usage_summary(
    *,
    user_emails: Sequence[str],
    task_user_ids: Sequence[str],
    task_submitted_at: Sequence[datetime],
    job_detector_ids: Sequence[str],
    completed_runtimes: Sequence[Tuple[str, MediaModality, float]],
    access_records: Sequence[AccessRecord] = (),
    date_range: Optional[Tuple[date, date]] = None,
) -> dict:
    """The full UsageSummary document served at /api/analytics/summary."""
    if date_range is None:
        if task_submitted_at:
            days = [t.astimezone(timezone.utc).date() for t in task_submitted_at]
            date_range = (min(days), max(days))
        else:
            date_range = (datetime.now(timezone.utc).date(),) * 2
    series = cumulative_daily(task_submitted_at, *date_range)
    country_pct, source_pct = demographic_distribution(access_records)
    return {
        "registered_users": len(user_emails),
        "active_submitters": len(set(task_user_ids)),
        "total_tasks": len(task_submitted_at),
        "daily_series": [
            {"date": d.isoformat(), "count": c, "cumulative": cum}
            for d, c, cum in series
        ],
        "per_detector_counts": dict(detector_popularity(job_detector_ids)),
        "per_detector_mean_seconds": mean_runtime_by_detector(
            [(d, s) for d, _, s in completed_runtimes]
        ),
        "per_modality_mean_seconds": {
            m.value: s
            for m, s in mean_runtime_by_modality(
                [(mod, s) for _, mod, s in completed_runtimes]
            ).items()
        },
        "country_pct": country_pct,
        "source_pct": source_pct,
        "email_domain_pct": email_domain_distribution(user_emails),
    }
