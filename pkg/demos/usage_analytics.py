"""Build the analytics views from synthetic usage data: the cumulative daily
submission series, detector popularity, mean runtimes per modality, and the
demographic breakdown of access records.

Run with: python demos/usage_analytics.py
"""

import random
from datetime import date, datetime, timedelta, timezone

from dfom.analytics import (
    AccessRecord,
    cumulative_daily,
    demographic_distribution,
    detector_popularity,
    mean_runtime_by_modality,
)
from dfom.domain import MediaModality

START = date(2024, 2, 1)
DAYS = 14


def main() -> None:
    rng = random.Random(7)

    submitted = []
    for day in range(DAYS):
        for _ in range(rng.randint(20, 50)):
            submitted.append(
                datetime(2024, 2, 1, tzinfo=timezone.utc)
                + timedelta(days=day, seconds=rng.randrange(86400))
            )

    print("cumulative daily submissions:")
    series = cumulative_daily(submitted, START, START + timedelta(days=DAYS - 1))
    for day, count, total in series:
        print(f"  {day}  +{count:3d}  total {total:4d}")

    detectors = rng.choices(["npr", "glff", "lipinc", "whisper", "sbi"],
                            weights=[5, 4, 3, 2, 1], k=len(submitted))
    print("\ndetector popularity:")
    for detector_id, count in detector_popularity(detectors):
        print(f"  {detector_id:10s} {count}")

    runtimes = [
        (MediaModality.IMAGE, rng.gauss(30, 3)) for _ in range(200)
    ] + [
        (MediaModality.VIDEO, rng.gauss(90, 10)) for _ in range(120)
    ]
    print("\nmean runtime by modality:")
    for modality, mean in mean_runtime_by_modality(runtimes).items():
        print(f"  {modality.value:6s} {mean:.1f}s")

    records = [
        AccessRecord(submitted[i], None,
                     rng.choice(["US", "US", "DE", "IN", "BR"]),
                     rng.choice(["", "search", "news.example.com"]))
        for i in range(300)
    ]
    countries, sources = demographic_distribution(records)
    print("\nvisitor countries (%):", countries)
    print("access sources (%):", sources)


if __name__ == "__main__":
    main()
