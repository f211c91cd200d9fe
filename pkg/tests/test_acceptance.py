"""Acceptance criteria 1-8, one recorded PASS/FAIL line per criterion."""

import json
import math
import time

import numpy as np
import pytest

from gwkde import Sample
from gwkde.asymptotics import DensityDomainError, SingularityError, gamma_reference
from gwkde.bandwidth import (b_opt, fit_reference, h_opt, mse_gamma_model,
                             mse_weibull_model, solve_c2)
from gwkde.cli import main
from gwkde.distributions import Distribution
from gwkde.experiments import (PASS_FRACTION, ExperimentConfig,
                               run_asymptotics_validation, run_mise_experiment)
from gwkde.kernels import gamma_kernel, weibull_kernel
from gwkde.specfun import digamma, gamma_fn, ln_gamma

from helpers import kernel_mass
from test_cli import FIXTURE
from test_kernels import _random_configs

F = gamma_reference(6.0, 1.0 / 3.0)
SIZES = (100, 500, 1000, 2000)
PROBES = (0.5, 1.0, 1.5, 2.0, 3.0)


# -- 1. kernel normalization ------------------------------------------------------

@pytest.mark.parametrize("branch", ["gamma", "weibull"])
def test_c1_kernel_normalization(branch, acceptance):
    kern = gamma_kernel if branch == "gamma" else weibull_kernel
    t0 = time.perf_counter()
    worst = 0.0
    for x, c, shape in _random_configs(branch, seed=11):
        mass = kernel_mass(lambda y: kern(y, x, c), shape, c.a, branch)
        worst = max(worst, abs(mass - 1.0))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt < 10
    acceptance(1, branch, ok, f"max |mass-1| = {worst:.2e}, {dt:.1f} s")
    assert ok


# -- 2. special functions ---------------------------------------------------------

def test_c2_special_functions(acceptance):
    t0 = time.perf_counter()
    z = np.random.default_rng(2).uniform(0, 50, 1000)
    z = z[z > 0]
    rec_psi = np.max(np.abs(digamma(z + 1) - digamma(z) - 1 / z))
    g1 = gamma_fn(z + 1)
    rec_gam = np.max(np.abs(g1 - z * gamma_fn(z)) / g1)
    zc = np.linspace(0.01, 170, 2000)
    g = gamma_fn(zc)
    cons = np.max(np.abs(np.exp(ln_gamma(zc)) - g) / g)
    eps = 1e-5
    zf = np.linspace(0.5, 100, 500)
    fd = np.max(np.abs(digamma(zf) - (ln_gamma(zf + eps) - ln_gamma(zf - eps)) / (2 * eps)))
    dt = time.perf_counter() - t0
    ok = rec_psi <= 1e-10 and rec_gam <= 1e-12 and cons <= 1e-11 and fd <= 1e-6 and dt < 5
    acceptance(2, "suites", ok, f"psi rec {rec_psi:.1e}, gamma rec {rec_gam:.1e}, "
               f"exp/ln {cons:.1e}, fd {fd:.1e}, {dt:.2f} s")
    assert ok


# -- 3. expansion convergence -----------------------------------------------------

@pytest.fixture(scope="module")
def validation():
    a, c1 = 1.0, -1.0
    c2_raw = solve_c2(a, c1, F)
    c2 = c2_raw if c2_raw < 0 else c1
    t0 = time.perf_counter()
    report = run_asymptotics_validation(F, a, c1, c2, [m * a for m in (0.3, 0.7, 1.0, 1.5, 3.0)],
                                        [0.1, 0.05, 0.025, 0.0125])
    return report, time.perf_counter() - t0


def _family(report, checks):
    cells = sum(report["summary"][c]["cells"] for c in checks)
    passed = sum(report["summary"][c]["passed"] for c in checks)
    return passed, cells


@pytest.mark.parametrize("label, checks", [
    ("i gamma_mean", ("gamma_mean",)),
    ("ii weibull_mean", ("weibull_mean",)),
    ("iii stirling_B", ("stirling_B",)),
    ("iv weibull_kernel_mean+var", ("weibull_kernel_mean", "weibull_kernel_var")),
])
def test_c3_expansion_family(label, checks, validation, acceptance):
    report, _ = validation
    passed, cells = _family(report, checks)
    frac = passed / cells if cells else 0.0
    ok = cells > 0 and frac >= PASS_FRACTION
    acceptance(3, label, ok, f"{passed}/{cells} cells with ratio <= 0.6")
    assert ok


def test_c3_failures_are_reported_and_fast(validation, acceptance):
    report, dt = validation
    failing = {c for c, s in report["summary"].items() if s["cells"] and not s["holds"]}
    recorded = {d["check"] for d in report["discrepancies"]}
    ok = failing == recorded and dt < 60
    acceptance(3, "discrepancy records", ok,
               f"{len(recorded)} discrepancy records, {dt:.1f} s")
    assert ok


# -- 4. bandwidth stationarity ----------------------------------------------------

def test_c4_stationarity(acceptance):
    a, c1, c2 = 1.0, -1.0, -1.0
    checked = worst = undefined = 0
    ok = True
    for n in (50, 500, 5000, 10 ** 5):
        for x in np.linspace(0.3, 1.0, 8):
            try:
                h = h_opt(x, a, n, c1, F)
            except (DensityDomainError, SingularityError):
                # variance coefficient undefined here (f needed below 0, or a = 2x)
                undefined += 1
                continue
            if h > 0:
                m0 = mse_gamma_model(h, x, a, n, c1, F)
                for s in (0.9, 1.1):
                    gap = m0 - mse_gamma_model(s * h, x, a, n, c1, F)
                    ok &= gap <= 1e-12 * abs(m0)
                    worst = max(worst, gap / abs(m0))
                checked += 1
        for x in np.linspace(1.0, 4.0, 8):
            b = b_opt(x, a, n, c2, F)
            if b > 0:
                m0 = mse_weibull_model(b, x, a, n, c2, F)
                for s in (0.9, 1.1):
                    gap = m0 - mse_weibull_model(s * b, x, a, n, c2, F)
                    ok &= gap <= 1e-12 * abs(m0)
                    worst = max(worst, gap / abs(m0))
                checked += 1
    ok = bool(ok) and checked > 0
    acceptance(4, "h and b", ok, f"{checked} optima, max relative excess {worst:.1e}, "
               f"{undefined} undefined points")
    assert ok


# -- 5. rule-of-thumb pins ----------------------------------------------------------

def test_c5_rule_of_thumb(acceptance):
    ref = fit_reference(Sample([1.0, 2.0, 3.0]))
    pins = ref.kappa_m == pytest.approx(1 / 3, rel=1e-15) and ref.rho_m == pytest.approx(6.0, rel=1e-15)
    worst = 0.0
    for s in (1e-3, 0.5, 7.0, 1e4):
        scaled = fit_reference(Sample([s * 1.0, s * 2.0, s * 3.0]))
        worst = max(worst, abs(scaled.rho_m - ref.rho_m) / ref.rho_m)
    ok = bool(pins) and worst <= 1e-12
    acceptance(5, "pins and scale", ok,
               f"kappa_m={ref.kappa_m!r}, rho_m={ref.rho_m!r}, scale drift {worst:.1e}")
    assert ok


# -- 6. estimator consistency -------------------------------------------------------

@pytest.fixture(scope="session")
def mise_report():
    cfg = ExperimentConfig(Distribution.create("weibull", shape=0.9, scale=1.0),
                           sample_sizes=SIZES, replications=500, seed=42)
    t0 = time.perf_counter()
    report = run_mise_experiment(cfg, workers=4, probe_points=PROBES)
    return report, time.perf_counter() - t0


@pytest.mark.slow
def test_c6_mise_decreasing(mise_report, acceptance):
    report, dt = mise_report
    rows = report["results"]
    mise = [r["empirical_mise"] for r in rows]
    se = [r["mise_stderr"] for r in rows]
    steps = []
    ok = dt < 600
    for i in range(len(rows) - 1):
        tol = 2 * math.hypot(se[i], se[i + 1])
        step_ok = mise[i + 1] <= mise[i] + tol
        ok &= step_ok
        steps.append(f"{mise[i]:.3g}->{mise[i + 1]:.3g}{'' if step_ok else ' (up)'}")
    acceptance(6, "MISE", ok, ", ".join(steps) + f", {dt:.0f} s")
    assert ok


@pytest.mark.slow
def test_c6_variance_scaling(mise_report, acceptance):
    report, _ = mise_report
    rows = report["results"]
    var = np.array([r["probes"]["var"] for r in rows])
    bad = []
    for i in range(len(rows) - 1):
        doublings = math.log2(SIZES[i + 1] / SIZES[i])
        ratio = (var[i + 1] / var[i]) ** (1 / doublings)
        for x, q in zip(PROBES, ratio):
            if not 0.4 <= q <= 0.6:
                bad.append(f"x={x} n={SIZES[i]}->{SIZES[i + 1]}: {q:.3f}")
    ok = not bad
    acceptance(6, "variance per doubling", ok,
               f"{len(bad)}/15 outside [0.4, 0.6]" + (": " + "; ".join(bad) if bad else ""))
    assert ok


# -- 7. determinism -----------------------------------------------------------------

def test_c7_determinism(tmp_path, acceptance):
    t0 = time.perf_counter()
    base = ["simulate", "--dist", "weibull", "--shape", "0.9", "--scale", "1",
            "--n", "100,500", "--reps", "100", "--seed", "42"]
    outs = []
    for i, workers in enumerate((1, 1, 4)):
        path = tmp_path / f"run{i}.json"
        assert main(base + ["--workers", str(workers), "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    dt = time.perf_counter() - t0
    ok = outs[0] == outs[1] == outs[2] and dt < 120
    acceptance(7, "byte-identical", ok, f"two runs and 1 vs 4 workers, {dt:.1f} s")
    assert ok


# -- 8. junction diagnostic ---------------------------------------------------------

# regression pins from the first run of the seed-42 experiment above
JUMP_PINS = {100: 0.11190262898505784, 500: 0.05014816620657488,
             1000: 0.04562303026561238, 2000: 0.043166675188912526}


@pytest.mark.slow
def test_c8_junction_jump(mise_report, acceptance):
    report, _ = mise_report
    got = {r["n"]: r["junction_jump_mean"] for r in report["results"]}
    reported = all(isinstance(v, float) and math.isfinite(v) for v in got.values())
    pinned = all(abs(got[n] - v) <= 1e-9 * abs(v) for n, v in JUMP_PINS.items())
    ok = reported and pinned
    acceptance(8, "jump", ok, ", ".join(f"n={n}: {got[n]:.6g}" for n in SIZES))
    assert ok


FIT_JUMP_PIN = 0.046399241605688646


def test_c8_fit_reports_jump(capsys, acceptance):
    assert main(["fit", str(FIXTURE)]) == 0
    jump = json.loads(capsys.readouterr().out)["junction_jump"]
    ok = isinstance(jump, float) and abs(jump - FIT_JUMP_PIN) <= 1e-9 * FIT_JUMP_PIN
    acceptance(8, "fit fixture", ok, f"jump {jump!r}")
    assert ok
