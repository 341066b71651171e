#!/usr/bin/env python3
"""Spectral-flatness audio heuristic speaking the detector plugin contract.

Usage: detect.py <input_audio> <output_json>

Reads a PCM WAV file, computes the spectral flatness of its power spectrum
(geometric mean over arithmetic mean), and writes ``{"score": s}`` with
s in [0, 1]. Very flat spectra (noise-like, vocoder-ish) push the score up;
tonal content pushes it down. Deterministic for identical input bytes; the
GPU index env var is accepted and ignored. Exits nonzero with a message on
stderr when the input cannot be decoded.

This is a protocol-conformance stand-in, not a serious detector.
"""

import json
import sys
import wave

import numpy as np

EPS = 1e-12


def read_wav(path: str) -> np.ndarray:
    with wave.open(path, "rb") as wf:
        n_frames = wf.getnframes()
        width = wf.getsampwidth()
        raw = wf.readframes(n_frames)
    if n_frames == 0:
        raise ValueError("empty audio stream")
    if width == 2:
        samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 1:
        samples = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif width == 4:
        samples = np.frombuffer(raw, dtype="<i4").astype(np.float64) / 2147483648.0
    else:
        raise ValueError(f"unsupported sample width {width}")
    return samples


def spectral_flatness(samples: np.ndarray) -> float:
    power = np.abs(np.fft.rfft(samples)) ** 2
    power = power[1:]  # drop DC
    if power.size == 0 or not np.isfinite(power).all():
        raise ValueError("degenerate spectrum")
    geometric = np.exp(np.mean(np.log(power + EPS)))
    arithmetic = np.mean(power) + EPS
    return float(geometric / arithmetic)


def score_file(path: str) -> float:
    samples = read_wav(path)
    flatness = spectral_flatness(samples)
    return float(min(1.0, max(0.0, flatness)))


def main(argv) -> int:
    if len(argv) != 3:
        print("usage: detect.py <input_audio> <output_json>", file=sys.stderr)
        return 2
    input_path, output_path = argv[1], argv[2]
    try:
        score = score_file(input_path)
    except (OSError, EOFError, ValueError, wave.Error) as exc:
        print(f"cannot decode {input_path}: {exc}", file=sys.stderr)
        return 1
    with open(output_path, "w", encoding="utf-8") as fh:
        json.dump({"score": score}, fh)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
