"""Detector catalog: manifest loading, validation, and modality filtering."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

from .domain import MediaModality

DEFAULT_CATALOG_DIR = Path(__file__).parent / "catalog"

MANIFEST_KEYS = {
    "id", "name", "year", "organization", "modality", "scope",
    "reference_url", "repository_url", "entrypoint", "timeout_seconds",
    "eta_seed_seconds", "enabled",
}


class RegistryError(Exception):
    pass


class ManifestParseError(RegistryError):
    def __init__(self, path, reason: str):
        self.path = path
        super().__init__(f"{path}: {reason}")


class DuplicateDetectorId(RegistryError):
    def __init__(self, detector_id: str):
        self.detector_id = detector_id
        super().__init__(f"duplicate detector id {detector_id!r}")


class UnknownDetector(RegistryError):
    def __init__(self, detector_id: str):
        self.detector_id = detector_id
        super().__init__(f"unknown detector {detector_id!r}")


@dataclass(frozen=True)
class DetectorDescriptor:
    detector_id: str
    display_name: str
    year: int
    organization: str
    modality: MediaModality
    detection_scope: str
    reference_url: str
    repository_url: str
    entrypoint: str
    timeout_seconds: float
    eta_seed_seconds: float
    enabled: bool = True

    def __post_init__(self):
        if self.enabled and not self.entrypoint:
            raise ValueError(f"{self.detector_id}: enabled detector needs an entrypoint")
        if self.timeout_seconds <= 0 or self.eta_seed_seconds <= 0:
            raise ValueError(f"{self.detector_id}: timeouts and ETA seeds must be positive")


def _parse_manifest(path: Path) -> DetectorDescriptor:
    try:
        raw = json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestParseError(path, str(exc)) from exc
    if not isinstance(raw, dict):
        raise ManifestParseError(path, "manifest must be a JSON object")
    missing = MANIFEST_KEYS - raw.keys()
    if missing:
        raise ManifestParseError(path, f"missing keys: {sorted(missing)}")
    try:
        return DetectorDescriptor(
            detector_id=raw["id"],
            display_name=raw["name"],
            year=int(raw["year"]),
            organization=raw["organization"],
            modality=MediaModality(raw["modality"]),
            detection_scope=raw["scope"],
            reference_url=raw["reference_url"],
            repository_url=raw["repository_url"],
            entrypoint=raw["entrypoint"],
            timeout_seconds=float(raw["timeout_seconds"]),
            eta_seed_seconds=float(raw["eta_seed_seconds"]),
            enabled=bool(raw["enabled"]),
        )
    except (ValueError, TypeError) as exc:
        raise ManifestParseError(path, str(exc)) from exc


class DetectorRegistry:
    """Read-only catalog of detector descriptors, loaded once at startup."""

    def __init__(self, descriptors: List[DetectorDescriptor]):
        self._by_id: Dict[str, DetectorDescriptor] = {}
        for d in descriptors:
            if d.detector_id in self._by_id:
                raise DuplicateDetectorId(d.detector_id)
            self._by_id[d.detector_id] = d

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, detector_id: str) -> bool:
        return detector_id in self._by_id

    def get(self, detector_id: str) -> DetectorDescriptor:
        try:
            return self._by_id[detector_id]
        except KeyError:
            raise UnknownDetector(detector_id) from None

    def all(self) -> List[DetectorDescriptor]:
        return sorted(self._by_id.values(), key=lambda d: (d.year, d.display_name))

    def detectors_for(self, modality: MediaModality) -> List[DetectorDescriptor]:
        """Enabled descriptors of one modality, ordered by (year, name)."""
        return [d for d in self.all() if d.enabled and d.modality == modality]


def load_catalog(directory=None) -> DetectorRegistry:
    """Parse every ``*.json`` manifest in ``directory`` into a registry."""
    directory = Path(directory) if directory is not None else DEFAULT_CATALOG_DIR
    descriptors = [_parse_manifest(p) for p in sorted(directory.glob("*.json"))]
    return DetectorRegistry(descriptors)
