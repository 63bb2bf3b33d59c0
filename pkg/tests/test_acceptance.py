"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from powertail.distcore import (
    REFERENCE_PARAMS,
    ModelParams,
    QuadratureSettings,
    normalization,
    pdf,
    pdf_beta2,
    survival,
    survival_normalized,
    survival_small_r,
    tail_slope,
)
from powertail.fitkit import FitConfig, count_above, fit, fit_curve, ks_distance
from powertail.ingest import ParseOptions, apply_exclusions, parse_table
from powertail.sampler import sample, tabulate
from powertail.specfun import bessel_k, cf_kernel

from acceptance_log import record
from synth import CA_NAME, CA_ROW, synthetic_text


def test_criterion_01_special_functions():
    start = time.perf_counter()
    x = np.geomspace(1e-3, 50, 400)
    k_half = np.sqrt(np.pi / (2 * x)) * np.exp(-x)
    k_three_half = k_half * (1 + 1 / x)
    err_half = np.max(np.abs(bessel_k(0.5, x) / k_half - 1))
    err_three = np.max(np.abs(bessel_k(1.5, x) / k_three_half - 1))
    t = np.linspace(0, 30, 3001)
    expected = (1 + t) * np.exp(-t)
    err_kernel = np.max(np.abs(cf_kernel(1.5, t) / expected - 1))
    elapsed = time.perf_counter() - start
    worst = max(err_half, err_three, err_kernel)
    ok = worst <= 1e-10 and elapsed < 1.0
    record(1, ok, f"max rel err {worst:.2e} (tol 1e-10), {elapsed:.3f} s (< 1 s)")
    assert ok


def test_criterion_02_general_matches_beta2():
    quad = QuadratureSettings()
    start = time.perf_counter()
    r = [0.0, 0.1, 1.0, 5.0, 10.0, 50.0]
    worst = 0.0
    for T, theta in [(1.5, 30.0), (1.0, 5.0), (3.0, 10.0)]:
        general = pdf(ModelParams(T, 2.0, theta), r, quad)
        closed = pdf_beta2(T, theta, r, quad)
        worst = max(worst, float(np.max(np.abs(general / closed - 1))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 5.0
    record(2, ok, f"max rel diff {worst:.2e} (tol 1e-6), {elapsed:.2f} s (< 5 s)")
    assert ok


def test_criterion_03_normalization():
    quad = QuadratureSettings()
    start = time.perf_counter()
    mass = normalization(REFERENCE_PARAMS, quad)
    at_zero = float(survival(REFERENCE_PARAMS, 0.0, quad))
    elapsed = time.perf_counter() - start
    ok = 0.99 <= mass <= 1.01 and 0.99 <= at_zero <= 1.01 and elapsed < 10.0
    record(
        3, ok,
        f"integral of W {mass:.6f}, survival(0) {at_zero:.6f} (band [0.99, 1.01]), "
        f"{elapsed:.2f} s (< 10 s)",
    )
    assert ok


def test_criterion_04_exponential_regime():
    quad = QuadratureSettings()
    r = np.linspace(0.5, 3.0, 26)
    slope = np.polyfit(r, np.log(survival(REFERENCE_PARAMS, r, quad)), 1)[0]
    rel = abs(slope / (-1 / 1.5) - 1)
    ok = rel <= 0.25
    record(4, ok, f"semilog slope {slope:.4f} vs -1/T = {-1/1.5:.4f}, rel dev {rel:.3f} (<= 0.25)")
    assert ok


def test_criterion_05_tail_elevation():
    quad = QuadratureSettings()
    r = np.geomspace(20, 1000, 60)
    elevated = bool(np.all(survival(REFERENCE_PARAMS, r, quad) > survival_small_r(1.5, r)))
    base = tail_slope(REFERENCE_PARAMS, 50, 300, quad)
    perturbed = [
        tail_slope(REFERENCE_PARAMS, lo, hi, quad)
        for lo, hi in [(45, 330), (55, 270), (60, 300), (50, 250)]
    ]
    spread = max(abs(s / base - 1) for s in perturbed)
    ok = elevated and base < 0 and spread <= 0.05
    record(
        5, ok,
        f"survival > exp(-R/T) on [20, 1000]: {elevated}; slope {base:.4f}, "
        f"max change under range perturbation {spread:.3f} (<= 0.05)",
    )
    assert ok


def test_criterion_06_round_trip_inference():
    quad = QuadratureSettings()
    start = time.perf_counter()
    table = tabulate(REFERENCE_PARAMS, quad)
    config = FitConfig(quad=quad)
    recovered = [fit(sample(table, 10_000, seed), config).params.T for seed in range(20)]
    hits = sum(abs(T / 1.5 - 1) <= 0.15 for T in recovered)
    r = np.geomspace(0.02, 100, 40)
    clean = fit_curve(r, survival_normalized(REFERENCE_PARAMS, r, quad), config).params
    clean_ok = abs(clean.T / 1.5 - 1) <= 0.01 and abs(clean.theta / 30 - 1) <= 0.01
    elapsed = time.perf_counter() - start
    ok = hits >= 18 and clean_ok and elapsed < 120
    record(
        6, ok,
        f"T within 15% in {hits}/20 seeds (>= 18), range [{min(recovered):.3f}, "
        f"{max(recovered):.3f}]; noise-free T={clean.T:.4f} theta={clean.theta:.3f} "
        f"(1%); {elapsed:.1f} s (< 120 s)",
    )
    assert ok


def test_criterion_07_stability_mirror():
    quad = QuadratureSettings()
    start = time.perf_counter()
    table = tabulate(REFERENCE_PARAMS, quad)
    ks = [
        ks_distance(sample(table, 9028, 2 * k + 1000), sample(table, 9028, 2 * k + 1001))
        for k in range(100)
    ]
    below = sum(d < 0.03 for d in ks)
    elapsed = time.perf_counter() - start
    ok = below >= 95 and elapsed < 120
    record(
        7, ok,
        f"KS < 0.03 in {below}/100 pairs (>= 95), max KS {max(ks):.4f}; "
        f"{elapsed:.1f} s (< 120 s)",
    )
    assert ok


def test_criterion_08_tail_count(reference_table):
    counts = [count_above(sample(reference_table, 9028, seed), 10) for seed in range(20)]
    median = float(np.median(counts))
    ok = 30 <= median <= 500
    record(8, ok, f"median count above 10 over 20 seeds {median:g} (in [30, 500])")
    assert ok


def test_criterion_09_ingestion(reference_table):
    header = "JOURNAL;IF_2011;IF_2012;IF_2013\n"
    records, _ = parse_table((header + CA_ROW + "\n").encode())
    ca_ok = records[0].impact_factors == {2011: 101.78, 2012: 153.459, 2013: 162.5}

    comma = synthetic_text(reference_table, 9028, 77, decimal_comma=True)
    point = synthetic_text(reference_table, 9028, 77, decimal_comma=False)
    rec_comma, report = parse_table(comma.encode())
    rec_point, _ = parse_table(point.encode(), ParseOptions(decimal_comma=False))
    kept, delta = apply_exclusions(rec_comma, [CA_NAME])
    excl_ok = len(rec_comma) == 9028 and len(kept) == 9027 and len(delta.excluded) == 1
    same = rec_comma == rec_point
    ok = ca_ok and excl_ok and same and not report.malformed
    record(
        9, ok,
        f"CA row exact: {ca_ok}; 9028 -> {len(kept)} after exclusion; "
        f"comma/point variants identical: {same}",
    )
    assert ok


def _cli(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "powertail", *argv], capture_output=True, check=False
    )
    return proc.returncode, proc.stdout


def test_criterion_10_cli_determinism(tmp_path, reference_table):
    data = tmp_path / "if.csv"
    data.write_text(synthetic_text(reference_table, 3000, 5), encoding="utf-8")
    tiny = tmp_path / "tiny.csv"
    tiny.write_text("JOURNAL;IF_2013\n" + "".join(f"J{i};{i},5\n" for i in range(5)))
    d = str(data)
    commands = {
        "fit": ["fit", "--input", d, "--year", "2013", "--exclude", CA_NAME],
        "plotdata": ["plotdata", "--input", d, "--year", "2013"],
        "compare": ["compare", "--input", d, "--year", "2011", "--year", "2012",
                    "--year", "2013"],
        "sample": ["sample", "--n", "1000", "--seed", "42"],
    }
    identical = {}
    for name, argv in commands.items():
        first, second = _cli(*argv), _cli(*argv)
        identical[name] = first[0] == 0 and bool(first[1]) and first == second
    codes = {
        "data error": _cli("fit", "--input", str(tiny), "--year", "2013")[0],
        "missing file": _cli("fit", "--input", str(tmp_path / "none.csv"),
                             "--year", "2013")[0],
        "non-converged": _cli("fit", "--input", d, "--year", "2013", "--max-iter", "3")[0],
    }
    codes_ok = codes == {"data error": 1, "missing file": 1, "non-converged": 2}
    ok = all(identical.values()) and codes_ok
    record(
        10, ok,
        f"byte-identical reruns {sum(identical.values())}/4 subcommands; "
        f"exit codes {codes} (expect 1, 1, 2)",
    )
    assert ok
