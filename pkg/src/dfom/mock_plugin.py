"""Stand-in detector plugin speaking the process+file plugin contract.

Invoked as ``python3 -m dfom.mock_plugin [options] <input> <output>``; writes
a JSON result with a fixed score so the full catalog is runnable without any
ML model. Options control score, simulated work duration, and failure modes
used by tests (exit code, hang, malformed output).
"""

import argparse
import json
import os
import sys
import time


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dfom.mock_plugin")
    parser.add_argument("--score", type=float, default=0.5)
    parser.add_argument("--sleep", type=float, default=0.0)
    parser.add_argument("--frames", type=int, default=0, help="emit N frame scores")
    parser.add_argument("--exit-code", type=int, default=0)
    parser.add_argument("--malformed", action="store_true")
    parser.add_argument("--stderr", default="")
    parser.add_argument("input_path")
    parser.add_argument("output_path")
    args = parser.parse_args(argv)

    if not os.path.exists(args.input_path):
        print(f"input not found: {args.input_path}", file=sys.stderr)
        return 2
    if args.sleep:
        time.sleep(args.sleep)
    if args.stderr:
        print(args.stderr, file=sys.stderr)
    if args.exit_code != 0:
        return args.exit_code

    if args.malformed:
        payload = "not json {"
    else:
        doc = {"score": args.score}
        if args.frames:
            doc["frame_scores"] = [args.score] * args.frames
        doc["advanced"] = {"gpu_index": os.environ.get("DFOM_GPU_INDEX")}
        payload = json.dumps(doc)
    with open(args.output_path, "w", encoding="utf-8") as fh:
        fh.write(payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
