#!/usr/bin/env python3
"""End-to-end tests of the dftlim command-line binary.

Usage: test_cli.py <path-to-dftlim-binary>
Covers exit codes, artifact determinism, cache warm reuse, config-file
override order, and a few pinned numerical outputs.
"""

import json
import os
import subprocess
import sys
import tempfile
import time

BIN = None


def run(args, cwd, env_extra=None):
    env = dict(os.environ)
    env.pop("DFTLIM_CACHE_DIR", None)
    if env_extra:
        env.update(env_extra)
    proc = subprocess.run(
        [BIN] + args, cwd=cwd, env=env,
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
    )
    return proc.returncode, proc.stdout, proc.stderr


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


GRID = ["--rmin", "1e-5", "--rmax", "30", "--nodes", "512"]


def test_exit_codes(tmp, cache):
    # Config errors exit 1 and leave no artifact behind.
    code, _, err = run(["solve-single", "--model", "bogus", "--t", "1"], tmp)
    assert code == 1, (code, err)
    code, _, err = run(["solve-single", "--model", "tf_d", "--t", "-2"], tmp)
    assert code == 1, (code, err)
    assert "t" in err
    # Multiple violations are all reported at once.
    code, _, err = run(
        ["allocate", "--model", "tf_d", "--z", "-1", "--m", "-3"] + GRID, tmp)
    assert code == 1
    assert "charge" in err.lower() and "m" in err.lower(), err
    assert not os.listdir(tmp), os.listdir(tmp)

    # Malformed config file: exit 1, nothing written.
    cfg = os.path.join(tmp, "bad.cfg")
    with open(cfg, "w") as f:
        f.write("model tf_d\n")  # not key=value
    code, _, err = run(["solve-single", "--config", cfg, "--t", "1"], tmp)
    assert code == 1, (code, err)
    assert sorted(os.listdir(tmp)) == ["bad.cfg"]
    os.remove(cfg)

    # Unknown flag: exit 1 (CLI parse error).
    code, _, _ = run(["solve-single", "--frobnicate"], tmp)
    assert code == 1

    # Numerical failure: overlapping recovery carriers exit 2.
    code, _, err = run(
        ["gamma-check", "--model", "tf_d", "--z", "1", "--z", "2",
         "--x", "0,0,0", "--x", "0.4,0,0", "--alpha", "1", "--alpha", "2",
         "--eps", "1", "--cache-dir", cache] + GRID, tmp)
    assert code == 2, (code, err)
    print("cli exit codes: OK")


def test_config_override(tmp, cache):
    cfg = os.path.join(tmp, "run.cfg")
    with open(cfg, "w") as f:
        f.write("# pinned defaults\nmodel=tf_d\nt=0.5\nnodes=512\n"
                "rmin=1e-5\nrmax=30\n")
    out = os.path.join(tmp, "ov")
    code, _, err = run(
        ["solve-single", "--config", cfg, "--model", "tf_c0", "--out", out],
        tmp)
    assert code == 0, (code, err)
    with open(out + ".json") as f:
        doc = json.load(f)
    assert doc["family"] == "tf_c0", doc
    assert doc["t"] == 0.5  # taken from the config file
    print("cli config override: OK")


def test_solve_single(tmp, cache):
    out = os.path.join(tmp, "zero")
    code, _, err = run(
        ["solve-single", "--model", "tf_d", "--t", "0", "--out", out] + GRID,
        tmp)
    assert code == 0, (code, err)
    with open(out + ".json") as f:
        doc = json.load(f)
    assert doc["value"] == 0.0 and doc["t_achieved"] == 0.0

    out = os.path.join(tmp, "neutral")
    code, _, err = run(
        ["solve-single", "--model", "tf_d", "--t", "1", "--out", out] + GRID,
        tmp)
    assert code == 0, (code, err)
    with open(out + ".json") as f:
        doc = json.load(f)
    assert abs(doc["theta"]) <= 1e-3, doc["theta"]
    assert doc["saturated"] is True
    csv = read_bytes(out + ".csv").decode()
    assert csv.splitlines()[0] == "r,rho"
    assert len(csv.splitlines()) == 513
    print("cli solve-single: OK")


def test_l_table_cache(tmp, cache):
    out1 = os.path.join(tmp, "tab1")
    t0 = time.monotonic()
    code, _, err = run(
        ["l-table", "--model", "tf_d", "--cache-dir", cache, "--out", out1]
        + GRID, tmp)
    cold = time.monotonic() - t0
    assert code == 0, (code, err)

    out2 = os.path.join(tmp, "tab2")
    t0 = time.monotonic()
    code, _, err = run(
        ["l-table", "--model", "tf_d", "--cache-dir", cache, "--out", out2]
        + GRID, tmp)
    warm = time.monotonic() - t0
    assert code == 0, (code, err)
    assert warm < 1.0, (cold, warm)
    assert read_bytes(out1 + ".json") == read_bytes(out2 + ".json")
    assert read_bytes(out1 + ".csv") == read_bytes(out2 + ".csv")

    with open(out1 + ".json") as f:
        doc = json.load(f)
    assert doc["audit_ok"] is True
    assert abs(doc["saturation_mass"] - 1.0) <= 0.05
    header = read_bytes(out1 + ".csv").decode().splitlines()
    cols = header[0].split(",")
    it, ilp = cols.index("t"), cols.index("lprime_diff")
    near_one = [row.split(",") for row in header[1:]
                if abs(float(row.split(",")[it]) - 1.0) < 1e-12]
    assert near_one and abs(float(near_one[0][ilp])) <= 1e-3, near_one
    print("cli l-table cache (cold %.2fs, warm %.2fs): OK" % (cold, warm))


def test_allocate_example(tmp, cache):
    out = os.path.join(tmp, "alloc")
    code, _, err = run(
        ["allocate", "--model", "tf_c0", "--z", "1", "--z", "2", "--m", "3",
         "--cache-dir", cache, "--out", out] + GRID, tmp)
    assert code == 0, (code, err)
    with open(out + ".json") as f:
        doc = json.load(f)
    a = doc["alpha"]
    assert abs(a[0] - 1.0 / 3.0) <= 1e-3 and abs(a[1] - 8.0 / 3.0) <= 1e-3, a
    assert doc["kkt"]["ok"] is True
    assert doc["ionized"] is False

    # Determinism: byte-identical artifacts on a re-run.
    out2 = os.path.join(tmp, "alloc2")
    code, _, _ = run(
        ["allocate", "--model", "tf_c0", "--z", "1", "--z", "2", "--m", "3",
         "--cache-dir", cache, "--out", out2] + GRID, tmp)
    assert code == 0
    b1 = read_bytes(out + ".json")
    b2 = read_bytes(out2 + ".json")
    assert b1 == b2
    print("cli allocate: OK")


def test_threshold(tmp, cache):
    out = os.path.join(tmp, "thr")
    code, _, err = run(
        ["threshold", "--model", "tf_d", "--z", "2", "--cache-dir", cache,
         "--out", out] + GRID, tmp)
    assert code == 0, (code, err)
    with open(out + ".json") as f:
        doc = json.load(f)
    assert doc["infinite"] is False
    assert abs(doc["threshold"] - 2.0) <= 0.05, doc["threshold"]

    out = os.path.join(tmp, "thr0")
    code, _, err = run(
        ["threshold", "--model", "tf_c0", "--z", "2", "--cache-dir", cache,
         "--out", out] + GRID, tmp)
    assert code == 0, (code, err)
    with open(out + ".json") as f:
        doc = json.load(f)
    assert doc["infinite"] is True and doc["threshold"] is None
    print("cli threshold: OK")


def main():
    global BIN
    BIN = os.path.abspath(sys.argv[1])
    with tempfile.TemporaryDirectory() as root:
        cache = os.path.join(root, "cache")
        os.makedirs(cache)
        for fn in (test_exit_codes, test_config_override, test_solve_single,
                   test_l_table_cache, test_allocate_example, test_threshold):
            tmp = os.path.join(root, fn.__name__)
            os.makedirs(tmp)
            fn(tmp, cache)
    print("cli suite: all OK")


if __name__ == "__main__":
    main()
