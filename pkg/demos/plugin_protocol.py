"""Exercise the detector plugin contract directly: a well-behaved plugin, an
out-of-range score, and a hung plugin that gets killed at its timeout. Every
failure surfaces as a typed PluginError with a machine-readable kind.

Run with: python demos/plugin_protocol.py
"""

import sys
import tempfile
from pathlib import Path

from dfom.runtime import PluginError, PluginInvocation, run_plugin

PYTHON = sys.executable


def invoke(tmp: Path, name: str, entrypoint: str, timeout: float = 10.0):
    inv = PluginInvocation(
        descriptor_id=name,
        entrypoint=entrypoint,
        input_path=str(tmp / "input.bin"),
        output_path=str(tmp / name / "out.json"),
        gpu_index=3,
        timeout_seconds=timeout,
    )
    try:
        result = run_plugin(inv)
        print(f"{name:12s} ok: score={result.score}"
              f" elapsed={result.elapsed_seconds:.2f}s advanced={result.advanced}")
    except PluginError as exc:
        print(f"{name:12s} failed: kind={exc.kind} detail={exc}")


def main() -> None:
    with tempfile.TemporaryDirectory() as d:
        tmp = Path(d)
        (tmp / "input.bin").write_bytes(b"media bytes")

        invoke(tmp, "well-behaved",
               f"{PYTHON} -m dfom.mock_plugin --score 0.42 --frames 4")
        invoke(tmp, "bad-score",
               f"{PYTHON} -m dfom.mock_plugin --score 1.5")
        invoke(tmp, "no-output",
               f"{PYTHON} -m dfom.mock_plugin --score 0.5 --malformed")
        invoke(tmp, "crasher",
               f"{PYTHON} -m dfom.mock_plugin --score 0.5 --exit-code 3 "
               "--stderr 'model checkpoint missing'")
        invoke(tmp, "sleeper",
               f"{PYTHON} -m dfom.mock_plugin --score 0.5 --sleep 30",
               timeout=1.0)


if __name__ == "__main__":
    main()
