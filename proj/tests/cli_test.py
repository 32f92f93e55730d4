#!/usr/bin/env python3
"""Exit codes and end-to-end runs of the speechstd command-line tool.

usage: cli_test.py <path to speechstd binary>
"""

import json
import math
import os
import random
import signal
import struct
import subprocess
import sys
import tempfile
import wave

BIN = sys.argv[1]
failures = []


def run(*args, expect, stdin=None):
    p = subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, timeout=120, input=stdin)
    if p.returncode != expect:
        failures.append(f"{' '.join(map(str, args))}: exit {p.returncode}, wanted {expect}\n{p.stderr}")
    return p


def check(cond, what):
    if not cond:
        failures.append(what)


def write_wav(path, seconds, seed, rate=16000):
    rng = random.Random(seed)
    n = int(seconds * rate)
    frames = bytearray()
    for i in range(n):
        f = 300 + 40 * ((seed * 7 + i // rate) % 20)
        x = 0.3 * math.sin(2 * math.pi * f * i / rate) + rng.gauss(0, 0.02)
        frames += struct.pack("<h", max(-32768, min(32767, int(round(x * 32767)))))
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(bytes(frames))


def write_manifest(path, rows):
    with open(path, "w") as f:
        for r in rows:
            f.write(json.dumps(r) + "\n")


def words(n, stem):
    return " ".join(f"{stem}{i}" for i in range(n))


def read_jsonl(path):
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def start_mock_server(*extra):
    p = subprocess.Popen([BIN, "mock-server", "--port", "0", *map(str, extra)], stdout=subprocess.PIPE, text=True)
    text = ""
    while True:
        line = p.stdout.readline()
        if not line:
            raise RuntimeError("mock-server exited before printing its url")
        text += line
        if line.rstrip() == "}":
            return p, json.loads(text)["url"]


def stop(p):
    p.send_signal(signal.SIGTERM)
    p.wait(timeout=10)


with tempfile.TemporaryDirectory() as tmp:
    # usage errors
    run("--version", expect=0)
    run(expect=1)
    run("eval", "--task", "asr", "--ref", "x", expect=1)
    run("eval", "--bogus", expect=1)
    run("eval", "--task", "ocr", "--ref", "x", "--hyp", "y", expect=1)

    # eval over parallel text files
    ref = os.path.join(tmp, "ref.txt")
    hyp = os.path.join(tmp, "hyp.txt")
    short = os.path.join(tmp, "short.txt")
    with open(ref, "w") as f:
        f.write("the cat sat on the mat\nthere is a cat\n")
    with open(hyp, "w") as f:
        f.write("the cat sat on the mat\nthere is a cat\n")
    with open(short, "w") as f:
        f.write("one line\n")
    p = run("eval", "--task", "mt", "--ref", ref, "--hyp", hyp, expect=0)
    report = json.loads(p.stdout)
    check(report["bleu_percent"] == 100.0 and report["cer_percent"] == 0.0, f"identity eval: {report}")
    run("eval", "--task", "asr", "--ref", ref, "--hyp", short, expect=2)
    run("eval", "--task", "asr", "--ref", os.path.join(tmp, "nope.txt"), "--hyp", hyp, expect=2)

    # corpus split and stats on a 7200-chunk manifest
    big = os.path.join(tmp, "chunks.jsonl")
    write_manifest(big, [{"id": f"r{r}:{k}", "audio": f"r{r}_{k}.wav", "dialect_text": f"d{r}", "standard_text": "s"}
                         for r in range(1440) for k in range(1, 6)])
    p = run("corpus", "split", "--manifest", big, "--train", 6270, "--val", 810, "--test", 120, "--seed", 7, expect=0)
    sizes = json.loads(p.stdout)
    check(json.dumps(sizes).count("6270") == 1 and "810" in p.stdout and "120" in p.stdout, f"split sizes {p.stdout}")
    first = open(os.path.join(tmp, "chunks.split.jsonl")).read()
    run("corpus", "split", "--manifest", big, "--train", 6270, "--val", 810, "--test", 120, "--seed", 7, expect=0)
    check(open(os.path.join(tmp, "chunks.split.jsonl")).read() == first, "split is not deterministic")
    run("corpus", "split", "--manifest", big, "--train", 7000, "--val", 810, "--test", 0, "--seed", 7, expect=2)
    p = run("corpus", "stats", "--manifest", big, "--text-only", expect=0)
    check(json.loads(p.stdout)["unique_words"] == 1440, f"stats {p.stdout}")
    bad = os.path.join(tmp, "bad.jsonl")
    with open(bad, "w") as f:
        f.write('{"id": "a"}\n')
    run("corpus", "stats", "--manifest", bad, expect=2)

    # preprocess: one good and one broken file
    raw = os.path.join(tmp, "raw")
    os.makedirs(raw)
    write_wav(os.path.join(raw, "good.wav"), 1.0, 1, rate=22050)
    pre_out = os.path.join(tmp, "pre")
    run("preprocess", "--in", raw, "--out", pre_out, expect=0)
    with wave.open(os.path.join(pre_out, "good.wav")) as w:
        check(w.getframerate() == 16000 and w.getnframes() == 16000, "preprocess did not resample to 16 kHz")
    with open(os.path.join(raw, "broken.wav"), "wb") as f:
        f.write(b"RIFF0000WAVEjunk")
    run("preprocess", "--in", raw, "--out", pre_out, expect=2)

    # end to end: fixtures, mock server over HTTP, run, eval
    corpus = os.path.join(tmp, "corpus")
    os.makedirs(corpus)
    rows = []
    for i in range(3):
        write_wav(os.path.join(corpus, f"rec{i}.wav"), 10.0, 10 + i)
        rows.append({"id": f"rec{i}", "audio": f"rec{i}.wav", "dialect_text": words(8, f"d{i}w"),
                     "standard_text": words(8, f"s{i}w")})
    manifest = os.path.join(corpus, "manifest.jsonl")
    write_manifest(manifest, rows)
    mocks = os.path.join(tmp, "mocks")
    run("mock-fixtures", "--manifest", manifest, "--out", mocks, expect=0)

    server, url = start_mock_server("--asr-fixtures", os.path.join(mocks, "asr_fixtures.jsonl"),
                                    "--mt-dict", os.path.join(mocks, "mt_dict.json"), "--fail-mt", "rec1:2")
    try:
        out = os.path.join(tmp, "out")
        p = run("run", "--input", manifest, "--asr-url", url, "--mt-url", url, "--tts-url", url, "--jobs", 4,
                "--out", out, expect=0)
        results = read_jsonl(os.path.join(out, "results.jsonl"))
        failed = read_jsonl(os.path.join(out, "failures.jsonl"))
        check([r["id"] for r in results] == ["rec0:1", "rec0:2", "rec1:1", "rec2:1", "rec2:2"], f"rows {results}")
        check(len(failed) == 1 and failed[0]["id"] == "rec1:2" and failed[0]["stage"] == "mt", f"failures {failed}")
        with wave.open(os.path.join(out, "rec0.standard.wav")) as w:
            check(w.getnframes() == 8 * 3200, "rec0 speech length")
        p = run("eval", "--task", "mt", "--ref", manifest, "--hyp", os.path.join(out, "results.jsonl"), expect=0)
        check(json.loads(p.stdout)["wer_percent"] == 0.0, f"pipeline eval {p.stdout}")
    finally:
        stop(server)

    # backend errors
    dead = "http://127.0.0.1:9"
    run("run", "--input", manifest, "--asr-url", dead, "--mt-url", dead, "--tts-url", dead,
        "--out", os.path.join(tmp, "dead"), expect=3)
    run("run", "--input", manifest, "--out", os.path.join(tmp, "none"), expect=3)
    server, url = start_mock_server("--fail-asr", ",".join(f"rec{i}:{k}" for i in range(3) for k in (1, 2)))
    try:
        run("run", "--input", manifest, "--asr-url", url, "--mt-url", url, "--tts-url", url,
            "--out", os.path.join(tmp, "allfail"), expect=3)
    finally:
        stop(server)
    run("run", "--input", os.path.join(tmp, "missing.jsonl"), "--mock-dir", mocks, expect=2)

if failures:
    for f in failures:
        print("FAIL:", f)
    sys.exit(1)
print("cli: all checks passed")
