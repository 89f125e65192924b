import pytest

from experiments import (
    build_noise,
    duality_residual,
    fan_out,
    noise_entropy_rate,
    run_capacity,
    run_pgm_sweep,
    run_rank_lab,
    run_sample_dual,
)
from schemas import BernoulliNoiseSpec, ExperimentConfig, FieldDescriptor, RankNoiseSpec, rows_to_csv
from spectral import AmplitudeFn
from utils import derive_seed


def sweep_config(**overrides):
    values = {"subcommand": "pgm-sweep", "n": 6, "trials": 5, "seed": 3}
    values.update(overrides)
    return ExperimentConfig(**values)


def test_fan_out_keeps_order():
    results = fan_out(lambda x, y: x * y, [(i, 2) for i in range(20)], workers=4)
    assert results == [2 * i for i in range(20)]


def test_sweep_covers_every_k():
    rows = run_pgm_sweep(sweep_config())
    assert [r.k for r in rows] == [1, 2, 3, 4, 5]
    assert all(0.0 <= r.P_PGM_mean <= 1.0 for r in rows)
    assert all(r.trials == 5 and r.seed == 3 for r in rows)
    assert rows[0].noise_kind == "bernoulli"


def test_sweep_single_k():
    rows = run_pgm_sweep(sweep_config(rate=0.5))
    assert [r.k for r in rows] == [3]


def test_sweep_output_independent_of_workers():
    serial = rows_to_csv(run_pgm_sweep(sweep_config(workers=1)), "sweep")
    parallel = rows_to_csv(run_pgm_sweep(sweep_config(workers=8)), "sweep")
    assert serial == parallel


def test_noiseless_sweep_is_perfect():
    rows = run_pgm_sweep(sweep_config(noise=BernoulliNoiseSpec(p=0.0), n=5))
    assert all(r.P_PGM_mean == pytest.approx(1.0, abs=1e-12) for r in rows)
    assert all(r.P_PGM_std == pytest.approx(0.0, abs=1e-12) for r in rows)


def test_sample_dual_rows():
    cfg = ExperimentConfig(subcommand="sample-dual", n=8, rate=0.5, trials=3, samples=100, seed=2)
    rows = run_sample_dual(cfg)
    assert [r.seed for r in rows] == [derive_seed(2, i) for i in range(3)]
    assert all(r.status == "ok" and r.k == 4 for r in rows)
    assert rows[0].noise == "bernoulli(p=0.1)"
    assert rows_to_csv(rows, "samples") == rows_to_csv(run_sample_dual(cfg.model_copy(update={"workers": 4})), "samples")


def test_capacity_report():
    report = run_capacity(ExperimentConfig(subcommand="capacity"))
    assert report.holevo_capacity == pytest.approx(0.7219280949, abs=1e-9)
    assert report.shannon_capacity == pytest.approx(0.5310044064, abs=1e-9)
    assert report.hirschman_holds
    assert not report.hirschman_upper_direction_holds


def test_capacity_report_rank():
    report = run_capacity(ExperimentConfig(subcommand="capacity", noise=RankNoiseSpec(a=2, b=2, t=1)))
    assert report.rank_entropy_closed == pytest.approx(0.75)
    assert report.holevo_capacity is None


def test_rank_lab_two_by_two():
    report = run_rank_lab(ExperimentConfig(subcommand="rank-lab", noise=RankNoiseSpec(a=2, b=2, t=1)))
    assert report.gaussian_binomials == [1, 3, 1]
    assert report.sphere_sizes == [1, 9, 6]
    assert report.Z == pytest.approx(4.5)
    assert report.Z_over_binomial == pytest.approx(1.5)
    assert sum(report.shell_masses) == pytest.approx(1.0, abs=1e-12)
    assert report.duality_residual < 1e-10
    assert report.gv_distance == 0


def test_rank_lab_ternary_field():
    cfg = ExperimentConfig(
        subcommand="rank-lab",
        field=FieldDescriptor(p=3),
        noise=RankNoiseSpec(a=3, b=2, t=1),
        rate=0.9,
    )
    report = run_rank_lab(cfg)
    assert (report.a, report.b) == (3, 2)
    assert report.gaussian_binomials == [1, 4, 1]
    assert report.rate == pytest.approx(0.1)


def test_rank_lab_needs_rank_noise():
    with pytest.raises(ValueError):
        run_rank_lab(ExperimentConfig(subcommand="rank-lab"))


def test_duality_residual_transposed(F2):
    assert duality_residual(F2, 2, 3, 1) < 1e-10


def test_noise_entropy_rate(F2):
    cfg = ExperimentConfig(subcommand="pgm-sweep", n=4)
    assert noise_entropy_rate(build_noise(cfg, 4)) == pytest.approx(0.7219280949, abs=1e-9)
    with pytest.raises(ValueError):
        noise_entropy_rate(AmplitudeFn.dense_values(F2, 1, [1.0, 0.0]))
