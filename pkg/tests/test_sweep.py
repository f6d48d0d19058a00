import math

import numpy as np
import pytest

from annulab.fem import ProblemKind
from annulab.geometry import AnnularDomain
from annulab.radial_oracle import concentric_eigenvalue
from annulab.sweep import (
    Resolution,
    SWEEP_COLUMNS,
    analyze_dn_ratio,
    bracket_critical_ratio,
    convergence_study,
    monotonicity_violations,
    richardson_limit,
    sweep_translation,
    write_sweep_csv,
    write_sweep_svg,
)

QUICK = Resolution(128, 32, 1.5)


@pytest.fixture(scope="module")
def short_sweep():
    return sweep_translation(
        1.0, 5.0, [0.0, 1.2, 2.4, 3.4], resolution=QUICK, linear_solver="direct"
    )


def test_sweep_monotone_trends(short_sweep):
    assert monotonicity_violations(short_sweep) == []
    taus = [r.tau1 for r in short_sweep]
    assert all(b < a for a, b in zip(taus, taus[1:]))
    ts = [r.T for r in short_sweep]
    assert all(b > a for a, b in zip(ts, ts[1:]))


def test_sweep_record_identities(short_sweep):
    for r in short_sweep:
        assert r.tau1 < r.lambda1
        scale = max(abs(r.dtau_hadamard), abs(r.dtau_half), 1e-12)
        assert abs(r.dtau_hadamard - r.dtau_half) <= 1e-9 * scale
        assert r.checks_pass
        assert all(math.isfinite(x) for x in r.row()[:-1])


def test_sweep_grid_validation():
    with pytest.raises(ValueError):
        sweep_translation(1.0, 5.0, [0.0, 0.0], resolution=QUICK)
    with pytest.raises(ValueError):
        sweep_translation(1.0, 5.0, [0.0, 4.5], resolution=QUICK)


def test_sweep_threading_matches_serial():
    grid = [0.5, 1.5]
    serial = sweep_translation(1.0, 5.0, grid, resolution=Resolution(48, 8, 1.5),
                               linear_solver="direct")
    threaded = sweep_translation(1.0, 5.0, grid, resolution=Resolution(48, 8, 1.5),
                                 linear_solver="direct", threads=2)
    for a, b in zip(serial, threaded):
        assert a.tau1 == b.tau1
        assert a.dtau_hadamard == b.dtau_hadamard


def test_sweep_csv_format(tmp_path, short_sweep):
    path = tmp_path / "sweep.csv"
    write_sweep_csv(short_sweep, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == len(short_sweep) + 1
    first = lines[1].split(",")
    assert float(first[0]) == short_sweep[0].s
    assert first[-1] in ("0", "1")


def test_sweep_svg(tmp_path, short_sweep):
    path = tmp_path / "sweep.svg"
    write_sweep_svg(short_sweep, path)
    text = path.read_text()
    assert text.startswith("<svg")
    assert text.count("<polyline") == 3


def test_convergence_study_against_oracle():
    d = AnnularDomain(1.0, 2.0, 0.0)
    ref = concentric_eigenvalue(ProblemKind.ND, 1.0, 2.0)
    rows = convergence_study(d, ProblemKind.ND, levels=3, base=(32, 8),
                             grading=1.0, linear_solver="direct", reference=ref)
    assert rows[-1].observed_order == pytest.approx(2.0, abs=0.3)
    values = [r.value for r in rows]
    assert values[0] >= values[1] >= values[2] >= ref - 1e-10
    limit = richardson_limit(rows)
    assert limit == pytest.approx(ref, rel=2e-4)


def test_convergence_study_without_reference():
    d = AnnularDomain(1.0, 2.0, 0.4)
    rows = convergence_study(d, ProblemKind.ND, levels=3, base=(32, 8),
                             grading=1.0, linear_solver="direct")
    assert rows[-1].observed_order == pytest.approx(2.0, abs=0.5)


def test_dn_monotone_ratio():
    a = analyze_dn_ratio(5.0, 0.6, s_points=12, resolution=QUICK,
                         linear_solver="direct")
    assert a.classification == "monotone_decreasing"
    assert a.monotone_decreasing
    assert a.s0 is None
    assert np.all(np.diff(a.nu_values) < 0)


def test_dn_interior_minimum_ratio():
    a = analyze_dn_ratio(5.0, 0.1, s_points=12, resolution=QUICK,
                         linear_solver="direct")
    assert a.classification == "interior_minimum"
    assert 0.0 < a.s0 <= 4.5


def test_dn_validation():
    with pytest.raises(ValueError):
        analyze_dn_ratio(5.0, 1.5, resolution=QUICK)
    with pytest.raises(ValueError):
        analyze_dn_ratio(5.0, 0.5, s_points=2, resolution=QUICK)
    with pytest.raises(ValueError):
        bracket_critical_ratio(5.0, 0.5, 0.6, s_points=12, resolution=QUICK,
                               linear_solver="direct")
