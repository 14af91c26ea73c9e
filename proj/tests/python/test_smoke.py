import cmath
import json
import math
import os
import subprocess
from pathlib import Path

import numpy as np
import pytest

import momidx

GEOMETRIC = {"family": "geometric", "params": [0.5]}
ELLIPSE = {
    "type": "curve_density",
    "curve": {"type": "ellipse", "semiaxes": [1.0, 0.6]},
    "density": {"family": "lebesgue"},
}


def test_version():
    assert momidx.__version__ == "0.1.0"


def test_moments():
    value, err, converged = momidx.moment(momidx.LEBESGUE, 2, 2)
    assert abs(value - 1.0) < 1e-14
    assert converged
    value, _, _ = momidx.moment({"type": "circle_density", "density": GEOMETRIC}, 1, 0)
    assert abs(value + 0.5) < 1e-12
    assert momidx.total_mass(momidx.LEBESGUE) == pytest.approx(1.0)


def test_toeplitz_indexes():
    t = momidx.toeplitz_oracle(GEOMETRIC)
    assert t.kind == "toeplitz"
    g = momidx.gamma_sequence(t, 64)
    assert len(g) == 65
    est = momidx.estimate_limit(g.values)
    assert est["status"] == "ConvergedPositive"
    assert abs(est["value"] - 0.75) < 1e-6
    alpha = momidx.alpha_sequence(t, 32).values
    assert max(abs(a - 0.75) for a in alpha[1:]) < 1e-10
    lam = momidx.lambda_sequence(t, 32).values
    assert all(b <= a + 1e-14 for a, b in zip(lam, lam[1:]))
    assert momidx.szego_integral(GEOMETRIC)["value"] == pytest.approx(0.75, abs=1e-8)


def test_section_and_dense_helpers_against_numpy():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    m = a @ a.conj().T + 0.2 * np.eye(6)
    inv = np.linalg.inv(m)
    assert momidx.gamma_direct_ls(m) == pytest.approx(1.0 / inv[0, 0].real, rel=1e-9)
    assert momidx.smallest_eigenvalue(m) == pytest.approx(np.linalg.eigvalsh(m).min(), rel=1e-10)
    low = momidx.cholesky_lower(m)
    assert np.allclose(low @ low.conj().T, m)
    z0 = 0.3 - 0.4j
    k = z0 ** np.arange(6)
    assert momidx.kernel_diag(m, z0) == pytest.approx((k.conj() @ inv @ k).real, rel=1e-9)
    dets = [np.linalg.det(m[: i + 1, : i + 1]).real for i in range(6)]
    ratios = [dets[0]] + [dets[i] / dets[i - 1] for i in range(1, 6)]
    assert np.allclose(momidx.monic_norms(m), ratios, rtol=1e-9)

    leb = momidx.measure_oracle(momidx.LEBESGUE)
    assert np.allclose(leb.section(4), np.eye(5), atol=1e-14)


def test_similarity():
    z0 = 0.25 + 0.1j
    a = momidx.binomial_matrix(2, 1.0, -z0)
    expected = np.array([[1, -z0, z0 * z0], [0, 1, -2 * z0], [0, 0, 1]])
    assert np.allclose(a, expected)
    leb = momidx.measure_oracle(momidx.LEBESGUE)
    cc = momidx.gamma_shift_crosscheck(leb, 0.3, 12)
    assert cc["orders_compared"] == 13
    assert cc["max_rel_gap"] < 1e-10


def test_verdicts():
    v = momidx.bpe_verdict(momidx.measure_oracle(momidx.LEBESGUE), 0.5, 60)
    assert v["answer"] == "Yes"
    assert v["evaluation_constant"] == pytest.approx(2 / math.sqrt(3), rel=1e-10)
    assert momidx.density_verdict(ELLIPSE, 40)["answer"] == "No"
    s = momidx.szego_verdict({"type": "circle_density", "density": GEOMETRIC}, 64)
    assert s["answer"] == "Yes"
    with pytest.raises(momidx.NotApplicable):
        momidx.density_verdict(momidx.LEBESGUE, 20, z_ref=2.0)
    with pytest.raises(momidx.NotOnCircle):
        momidx.szego_verdict(ELLIPSE, 10)


def test_bpe_map():
    leb = momidx.measure_oracle(momidx.LEBESGUE)
    grid = momidx.bpe_map(leb, (-0.9, 0.9), (-0.9, 0.9), (19, 19), 60)
    assert grid.shape == (19, 19)
    re = np.linspace(-0.9, 0.9, 19)
    z = re[None, :] + 1j * re[:, None]
    r2 = np.abs(z) ** 2
    finite = 1 / sum(r2**k for k in range(61))
    assert np.allclose(grid, finite, rtol=1e-10, atol=0)
    inner = r2**61 < 1e-7
    assert np.max(np.abs(grid - (1 - r2))[inner]) < 1e-6


def test_atomic_certificate():
    atoms = [
        {"point": [math.cos(2 * math.pi / n), math.sin(2 * math.pi / n)], "weight": 2.0**-n}
        for n in range(1, 41)
    ]
    measure = {"type": "atomic", "atoms": atoms, "declared_tail_mass": 2.0**-40, "support_radius_bound": 1.0}
    o = momidx.measure_oracle(measure)
    v = momidx.bpe_verdict(o, cmath.exp(2j * math.pi / 3), 60)
    assert v["answer"] == "Yes"
    assert v["certificate"]["lower_bound"] == pytest.approx(0.125)
    with pytest.raises(momidx.NotPositiveDefinite):
        momidx.gamma_sequence(o, 30)
    g = momidx.gamma_sequence(o, 30, stop_at_breakdown=True)
    assert g.breakdown is not None
    assert all(b < a for a, b in zip(g.values, g.values[1:]))


def test_run_job():
    config = {"command": "indexes", "toeplitz": GEOMETRIC, "N": 32}
    report, files, code = momidx.run_job(config)
    assert code == 0
    assert report["estimates"]["gamma"]["status"] == "ConvergedPositive"
    assert "gamma.csv" in files
    again, _, _ = momidx.run_job(config)
    report.pop("timing")
    again.pop("timing")
    assert report == again

    report, _, code = momidx.run_job({"command": "bpe", "measure": momidx.LEBESGUE, "N": 10})
    assert code == 1
    assert report["error"]["field"] == "z0"


@pytest.mark.skipif("MOMIDX_CLI" not in os.environ, reason="CLI path not provided")
def test_cli(tmp_path):
    config = Path(os.environ["MOMIDX_CONFIG_DIR"]) / "toeplitz_indexes.json"
    out = subprocess.run(
        [os.environ["MOMIDX_CLI"], "indexes", "--config", str(config), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        check=True,
    )
    assert "report" in out.stdout
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["exit_code"] == 0
    assert (tmp_path / "lambda.csv").exists()
