"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line."""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from scatterkalman.cli import main
from scatterkalman.experiments import ScenarioConfig, equivalence_harness, run_reconstruction, \
    synthesize_measurements, true_field
from scatterkalman.filters import (
    FilterState,
    MeasurementSet,
    RegularizationSchedule,
    full_tikhonov,
    kalman_sweep,
    kalman_update,
    linearized_residual_curve,
    morozov_alpha,
)
from scatterkalman.forward import (
    ForwardModel,
    far_field,
    frechet_apply,
    incident_field,
    solve_total_field,
)
from scatterkalman.grid import MediumField, make_grid, phantom
from scatterkalman.specfun import hankel1_0

VARIANTS = ("kfl_init", "kfl_carry", "ekf_init", "ekf_carry")


def _cnormal(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def test_criterion_1_special_functions(bessel_reference, acceptance_report):
    xs, j0, y0 = bessel_reference
    start = time.perf_counter()
    got = hankel1_0(xs)
    elapsed = time.perf_counter() - start
    ref = j0 + 1j * y0
    worst = float(np.max(np.abs(got - ref) / np.abs(ref)))
    ok = worst <= 1e-12 and elapsed < 1.0
    assert acceptance_report(1, ok, f"H0 max rel. error {worst:.2e} on 1000 points, {elapsed * 1e3:.1f} ms")


def test_criterion_2_forward_solver(acceptance_report):
    start = time.perf_counter()
    model = ForwardModel(make_grid(3, 6), 7.0, 60, 60)
    grid = model.grid
    theta = model.directions[0]

    u = solve_total_field(model.G, MediumField.zeros(grid), theta).values
    zero_ok = np.array_equal(u, incident_field(grid, 7.0, theta)) and \
        not np.any(far_field(model.C, model.G, np.zeros(grid.size), theta))

    q = phantom(grid, "disk").values
    dense = solve_total_field(model.G, q, theta).values
    fft = solve_total_field(model.G, q, theta, method="fft").values
    path_dev = float(np.linalg.norm(dense - fft) / np.linalg.norm(dense))

    U = model.far_fields(q).T  # U[j, n]
    idx = np.arange(60)
    flipped = U[(idx[None, :] + 30) % 60, (idx[:, None] + 30) % 60]
    recip = float(np.max(np.abs(U - flipped)) / np.max(np.abs(U)))
    elapsed = time.perf_counter() - start
    ok = zero_ok and path_dev <= 1e-10 and recip <= 1e-6 and elapsed < 10
    assert acceptance_report(2, ok, f"q=0 exact: {zero_ok}, dense vs FFT {path_dev:.2e}, "
                                    f"reciprocity {recip:.2e}, {elapsed:.1f} s")


def test_criterion_3_frechet_slope(acceptance_report):
    start = time.perf_counter()
    model = ForwardModel(make_grid(3, 6), 7.0, 1, 60)
    theta = model.directions[0]
    rng = np.random.default_rng(2024)
    eps = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    slopes = []
    for q in (np.zeros(144), phantom(model.grid, "disk").values):
        base = far_field(model.C, model.G, q, theta)
        for _ in range(5):
            m = _cnormal(rng, 144)
            m /= math.sqrt(model.grid.cell_area * np.vdot(m, m).real)
            d = frechet_apply(model.C, model.G, q, m, theta)
            err = [np.linalg.norm(far_field(model.C, model.G, q + e * m, theta) - base - e * d) for e in eps]
            slopes.append(np.polyfit(np.log(eps), np.log(err), 1)[0])
    elapsed = time.perf_counter() - start
    ok = all(abs(s - 2.0) <= 0.2 for s in slopes) and elapsed < 30
    assert acceptance_report(3, ok, f"slopes in [{min(slopes):.3f}, {max(slopes):.3f}], {elapsed:.1f} s")


def test_criterion_4_linear_equivalence(acceptance_report):
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    D, J, N = 8, 4, 5
    devs = []
    for alpha in (0.1, 1.0, 10.0):
        ops = [_cnormal(rng, J, D) for _ in range(N)]
        data = [_cnormal(rng, J) for _ in range(N)]
        prior = _cnormal(rng, D)
        tik = full_tikhonov(prior, ops, data, alpha)
        kal = kalman_sweep(FilterState.initial(prior, alpha), ops, data).estimate
        devs.append(np.linalg.norm(kal - tik) / np.linalg.norm(tik))
    elapsed = time.perf_counter() - start
    ok = max(devs) <= 1e-10 and elapsed < 1
    assert acceptance_report(4, ok, f"Kalman sweep vs Tikhonov max rel. deviation {max(devs):.2e}, "
                                    f"{elapsed * 1e3:.0f} ms")


def test_criterion_5_nonlinear_equivalence(acceptance_report):
    start = time.perf_counter()
    report = equivalence_harness("tiny")
    elapsed = time.perf_counter() - start
    devs = report["nonlinear_deviation"]
    ok = len(devs) == 3 and max(devs) <= 1e-8 and elapsed < 30
    listed = ", ".join(f"{d:.1e}" for d in devs)
    assert acceptance_report(5, ok, f"KFL sweep vs LM step for i=0,1,2: {listed}, {elapsed:.1f} s")


def test_criterion_6_kalman_invariants(acceptance_report):
    rng = np.random.default_rng(6)
    worst_herm = worst_growth = 0.0
    worst_floor = np.inf
    updates = 0
    while updates < 1000:
        D = int(rng.integers(2, 9))
        state = FilterState.initial(_cnormal(rng, D), float(rng.uniform(0.1, 10)))
        probes = _cnormal(rng, 4, D)
        for _ in range(10):
            J = int(rng.integers(1, 5))
            before = [np.vdot(m, state.weight @ m).real for m in probes]
            state = kalman_update(state, _cnormal(rng, J, D), _cnormal(rng, J), float(rng.uniform(0.1, 5)),
                                  float(rng.uniform(0.1, 2)))
            B = state.weight
            norm = np.linalg.norm(B, 2)
            worst_herm = max(worst_herm, np.linalg.norm(B - B.conj().T) / norm)
            worst_floor = min(worst_floor, np.linalg.eigvalsh(B).min() / norm)
            after = [np.vdot(m, B @ m).real for m in probes]
            worst_growth = max(worst_growth, max((a - b) / max(b, 1e-300) for a, b in zip(after, before)))
            updates += 1
    ok = worst_herm <= 1e-12 and worst_floor >= -1e-10 and worst_growth <= 1e-10
    assert acceptance_report(6, ok, f"{updates} updates: Hermitian dev {worst_herm:.1e}, "
                                    f"min eigenvalue/norm {worst_floor:.1e}, quadratic-form growth {worst_growth:.1e}")


def test_criterion_7_morozov(acceptance_report):
    model = ForwardModel(make_grid(1, 1), 2.0, 8, 16)
    q_true = np.array([0.5, 0.3, 0.4, 0.6], dtype=complex)
    clean = model.far_fields(q_true)
    noisy = clean + 0.05 * np.abs(clean).mean() * _cnormal(np.random.default_rng(7), *clean.shape)
    meas = MeasurementSet(model.directions, noisy)
    g, current = linearized_residual_curve(np.zeros(4), meas, model)
    devs = {}
    for rho in (0.5, 0.8, 0.9):
        alpha = morozov_alpha(np.zeros(4), meas, rho, model)
        devs[rho] = (alpha, abs(g(alpha) - rho * current) / (rho * current))
    ok = all(d <= 1e-3 for _, d in devs.values())
    listed = ", ".join(f"rho={r}: alpha={a:.3g} dev {d:.1e}" for r, (a, d) in devs.items())
    assert acceptance_report(7, ok, listed)


@pytest.fixture(scope="module")
def default_setup():
    cfg = ScenarioConfig()
    return cfg, cfg.model(), true_field(cfg).values


@pytest.mark.slow
def test_criterion_8_full_scale_trends(default_setup, acceptance_report):
    base, model, q_true = default_setup
    start = time.perf_counter()
    finals = {}
    for label, sigma, alpha in (("a", 0.0, 100.0), ("b", 0.5, 2000.0)):
        cfg = replace(base, sigma=sigma, seed=0, schedule=RegularizationSchedule(alpha=alpha))
        meas = synthesize_measurements(q_true, cfg, model)
        for variant in VARIANTS:
            errors = run_reconstruction(replace(cfg, algorithm=variant), meas, q_true, model).errors
            finals[label, variant] = errors
    elapsed = time.perf_counter() - start
    reduced = {key: min(errs[1:]) < errs[0] for key, errs in finals.items()}
    ekf3, kfl3 = finals["a", "ekf_init"][3], finals["a", "kfl_init"][3]
    ok = all(reduced.values()) and ekf3 < kfl3 and elapsed < 600
    summary = "; ".join(f"({k[0]}) {k[1]} {v[0]:.0f}->{v[-1]:.2f}" for k, v in finals.items())
    assert acceptance_report(8, ok, f"{summary}; iteration 3 EKF-init {ekf3:.3f} < KFL-init {kfl3:.3f}; "
                                    f"{elapsed:.0f} s")


def test_criterion_9_determinism(tmp_path, acceptance_report):
    argv = ["reconstruct", "--set", "outer_iterations=3", "--set", "sigma=0.5", "--set", "seed=11",
            "--set", "alpha=2000"]
    codes = [main(argv + ["--out", str(tmp_path / name)]) for name in ("a", "b")]
    names = ("mse.csv", "truth.csv", "final.csv")
    same = {n: (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes() for n in names}
    ok = codes == [0, 0] and all(same.values())
    assert acceptance_report(9, ok, "byte-identical " + ", ".join(f"{n}={v}" for n, v in same.items()))
