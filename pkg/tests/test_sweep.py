"""Tests for parameter sweeps, presets, and the CSV round trip."""
import dataclasses

import pytest

from secnet.analytic import default_quadrature
from secnet.config import load_config
from secnet.params import ConfigError
from secnet.simulator import SimConfig
from secnet.sweep import (
    CSV_COLUMNS,
    SweepSpec,
    apply_parameter,
    csv_text,
    parse_csv,
    preset_specs,
    run_sweep,
)

BASE = load_config(None, env={}).params
FAST_CFG = SimConfig(trials=40, master_seed=5, window_radius=1200.0)


def mask_wall_ms(text: str) -> str:
    # wall_ms is the last column and the only nondeterministic cell
    return "\n".join(line.rsplit(",", 1)[0] for line in text.splitlines())


# ---- apply_parameter ----------------------------------------------------


def test_apply_parameter_simple_fields():
    assert apply_parameter(BASE, "phi", 0.3).phi == 0.3
    assert apply_parameter(BASE, "lambda_e", 1e-5).lambda_e == 1e-5
    assert apply_parameter(BASE, "R_t", 1.2).R_t == 1.2


def test_apply_parameter_altitude_retunes_channel():
    swept = apply_parameter(BASE, "H", 140.0)
    assert swept.H == 140.0
    assert swept.channel.H == 140.0


def test_apply_parameter_counts_are_integers():
    swept = apply_parameter(BASE, "N", 6.0)
    assert swept.N == 6 and isinstance(swept.N, int)
    assert apply_parameter(BASE, "M", 12).M == 12
    with pytest.raises(ConfigError, match="integer"):
        apply_parameter(BASE, "N", 4.5)


def test_apply_parameter_d_holds_deployed_density():
    swept = apply_parameter(BASE, "d", 30.0)
    assert swept.d == 30.0
    assert swept.lambda_u == pytest.approx(BASE.lambda_u, rel=1e-12)
    assert swept.lambda_p != BASE.lambda_p


def test_apply_parameter_lambda_u_rederives_parent_intensity():
    swept = apply_parameter(BASE, "lambda_u", 4e-6)
    assert swept.lambda_u == pytest.approx(4e-6, rel=1e-12)
    assert swept.d == BASE.d


def test_apply_parameter_rejects_unknown_and_invalid():
    with pytest.raises(ConfigError, match="cannot sweep"):
        apply_parameter(BASE, "beta_t", 1.0)
    # base R_e = 0.4, so a lower codeword rate breaks the rate ordering
    with pytest.raises(ConfigError):
        apply_parameter(BASE, "R_t", 0.3)


# ---- spec validation -----------------------------------------------------


def test_spec_rejects_empty_grid():
    with pytest.raises(ConfigError, match="empty"):
        SweepSpec(swept_parameter="phi", grid=(), base=BASE, cfg=FAST_CFG)


@pytest.mark.parametrize("backends", ["", "sim", "all"])
def test_spec_rejects_bad_backends(backends):
    with pytest.raises(ConfigError, match="backends"):
        SweepSpec(
            swept_parameter="phi", grid=(0.5,), base=BASE, cfg=FAST_CFG,
            backends=backends,
        )


def test_spec_validates_every_grid_point_eagerly():
    with pytest.raises(ConfigError, match="phi"):
        SweepSpec(swept_parameter="phi", grid=(0.5, 1.2), base=BASE, cfg=FAST_CFG)


def test_spec_default_label_is_parameter_name():
    spec = SweepSpec(swept_parameter="phi", grid=(0.5,), base=BASE, cfg=FAST_CFG)
    assert spec.name == "phi"


# ---- sweep execution -----------------------------------------------------


def test_analytic_sweep_rows_and_round_trip(tmp_path):
    spec = SweepSpec(
        swept_parameter="phi", grid=(0.25, 0.5), base=BASE, cfg=FAST_CFG,
        backends="analytic",
    )
    out = tmp_path / "sweep.csv"
    result = run_sweep(spec, out_path=out)

    assert len(result.rows) == 2
    assert result.errors == ()
    assert "no cross-backend rows" in result.summary
    for row, phi in zip(result.rows, (0.25, 0.5)):
        assert row.swept_name == "phi"
        assert row.swept_value == phi
        assert 0.0 < row.cp_analytic < 1.0
        assert 0.0 < row.sp_analytic < 1.0
        assert row.st_analytic > 0.0
        assert row.cp_sim is None and row.trials is None and row.seed is None
        assert row.wall_ms > 0.0
        assert row.error is None

    text = out.read_text(encoding="utf-8")
    assert text.startswith(",".join(CSV_COLUMNS) + "\n")
    assert "\r" not in text
    parsed = parse_csv(out)
    for original, reread in zip(result.rows, parsed):
        assert reread == dataclasses.replace(original, error=None)


def test_both_backends_fill_every_metric_cell():
    spec = SweepSpec(swept_parameter="phi", grid=(0.5,), base=BASE, cfg=FAST_CFG)
    row = run_sweep(spec).rows[0]
    for name in CSV_COLUMNS[1:]:
        assert getattr(row, name) is not None, name
    assert row.trials == 40 and row.seed == 5
    assert row.cp_ci_lo <= row.cp_sim <= row.cp_ci_hi
    assert row.sp_ci_lo <= row.sp_sim <= row.sp_ci_hi
    params = apply_parameter(BASE, "phi", 0.5)
    scale = params.lambda_u * params.N * params.R_s
    assert row.st_sim_product == scale * row.cp_sim * row.sp_sim


def test_sweep_is_deterministic_up_to_wall_ms():
    quad = default_quadrature(BASE, rel_tol=1e-4)
    spec = SweepSpec(
        swept_parameter="phi", grid=(0.5,), base=BASE, cfg=FAST_CFG, quad=quad,
    )
    first = mask_wall_ms(csv_text(run_sweep(spec).rows))
    again = mask_wall_ms(csv_text(run_sweep(spec).rows))
    parallel = mask_wall_ms(csv_text(run_sweep(spec, workers=2).rows))
    assert first == again == parallel


def test_backend_failure_is_recorded_and_run_continues():
    # the fixed radial cut is valid at d=50 but shorter than 2d at d=2500,
    # so exactly the second row's analytic evaluation fails
    sparse = apply_parameter(BASE, "lambda_u", 1e-9)
    quad = default_quadrature(sparse, r_max=4000.0)
    spec = SweepSpec(
        swept_parameter="d", grid=(50.0, 2500.0), base=sparse, cfg=FAST_CFG,
        backends="analytic", quad=quad,
    )
    result = run_sweep(spec)
    good, bad = result.rows
    assert good.error is None and good.cp_analytic is not None
    assert bad.error is not None and "analytic" in bad.error
    assert bad.cp_analytic is None and bad.st_analytic is None
    assert len(result.errors) == 1 and "d=2500" in result.errors[0]
    assert "1 row error" in result.summary


def test_parse_rejects_foreign_csv(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="header"):
        parse_csv(path)


# ---- presets --------------------------------------------------------------


def test_power_split_presets_cover_two_altitudes():
    for name, points in (("fig2", 9), ("fig3", 19)):
        specs = preset_specs(name, FAST_CFG, backends="analytic")
        assert [s.name for s in specs] == ["phi[H=100]", "phi[H=140]"]
        for spec, h in zip(specs, (100.0, 140.0)):
            assert spec.swept_parameter == "phi"
            assert len(spec.grid) == points
            assert spec.grid[0] == pytest.approx(1 / (points + 1))
            assert spec.grid[-1] == pytest.approx(points / (points + 1))
            assert spec.base.H == h and spec.base.channel.H == h
            assert spec.backends == "analytic"


def test_stream_count_presets_cover_sparse_base():
    fig4 = preset_specs("fig4", FAST_CFG)
    assert [s.name for s in fig4] == ["N[d=30,M=8]", "N[d=50,M=8]"]
    for spec, d in zip(fig4, (30.0, 50.0)):
        assert spec.swept_parameter == "N"
        assert spec.grid == tuple(range(1, 8))
        assert spec.base.d == d
        assert spec.base.M == 8
        assert spec.base.lambda_u == pytest.approx(4e-6, rel=1e-12)
        assert spec.base.sigma == 10.0 and spec.base.phi == 0.5
        assert spec.base.H == 100.0

    fig5 = preset_specs("fig5", FAST_CFG)
    assert [s.name for s in fig5] == ["N[d=50,M=8]", "N[d=50,M=10]", "N[d=50,M=12]"]
    assert [s.base.M for s in fig5] == [8, 10, 12]
    assert all(s.base.d == 50.0 for s in fig5)


def test_unknown_preset_rejected():
    with pytest.raises(ConfigError, match="preset"):
        preset_specs("fig9", FAST_CFG)
