"""Media-forensics orchestration: uploads, fair-share GPU-slot scheduling,
isolated detector plugins, progress tracking, and usage analytics."""

from .wiring import Platform, build_platform

__all__ = ["Platform", "build_platform"]
__version__ = "0.1.0"
