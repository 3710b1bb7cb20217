import asyncio
import textwrap

import pytest

import cli_app
from services.analysis import sweeps
from services.experiments import (
    CHECKS,
    MANIFEST,
    ConfigInvalid,
    ExperimentKind,
    figure_config,
    figures,
    load_config,
    parse_config,
    read_manifest,
    read_table,
    reproduce,
    run,
    table_body,
)
from utils.errors import ExperimentError

SMALL_DYNAMICS = """\
[lattice]
blue_dims = [2, 2]
red_dims = [2, 2]

[protocol]
preset = "ideal"

[experiment]
kind = "dynamics"
initial = "all_up"
observables = ["corner_z", "bulk_k"]
n_max = 6
"""

SMALL_CIRCUIT = """\
[lattice]
blue_dims = [2, 2]
red_dims = [2, 2]

[protocol]
preset = "ideal"

[experiment]
kind = "circuit-dynamics"
observables = ["corner_z"]
n_max = 3
"""


def _config(text: str, tmp_path, **overrides):
    return parse_config(text).with_overrides(out=str(tmp_path), **overrides)


@pytest.mark.parametrize(
    "text, line, key",
    [
        (SMALL_DYNAMICS + "bogus = 1\n", 13, "experiment.bogus"),
        (SMALL_DYNAMICS.replace("n_max = 6", 'n_max = "six"'), 12, "experiment.n_max"),
        (SMALL_DYNAMICS.replace('kind = "dynamics"\n', ""), 8, "experiment.kind"),
        (SMALL_DYNAMICS.replace('kind = "dynamics"', 'kind = "movie"'), 9, "experiment.kind"),
        (SMALL_DYNAMICS + "\n[extras]\nx = 1\n", 14, "extras"),
        (SMALL_DYNAMICS.replace("[2, 2]", "[3, 1]", 1).replace("red_dims = [2, 2]", "red_dims = [1, 1]"),
         2, "lattice.blue_dims"),
    ],
)
def test_config_errors_point_at_the_offending_line(text, line, key):
    with pytest.raises(ConfigInvalid) as err:
        parse_config(text)
    assert err.value.line == line
    assert err.value.key == key


def test_broken_toml_is_reported():
    with pytest.raises(ConfigInvalid) as err:
        parse_config("[lattice\nblue_dims = 1\n")
    assert err.value.key == "<toml>"


def test_resolved_config_pins_the_preset():
    config = parse_config(SMALL_DYNAMICS)
    assert config.kind is ExperimentKind.DYNAMICS
    resolved = config.resolved()
    assert resolved["protocol"]["h_x"] == 0.0
    assert resolved["experiment"]["observables"] == ["corner_z", "bulk_k"]
    assert resolved["solver"]["tol"] == 1e-9


def test_fingerprint_ignores_run_placement(tmp_path):
    config = parse_config(SMALL_DYNAMICS)
    moved = config.with_overrides(workers=3, out=str(tmp_path))
    assert moved.fingerprint == config.fingerprint
    longer = parse_config(SMALL_DYNAMICS.replace("n_max = 6", "n_max = 7"))
    assert longer.fingerprint != config.fingerprint
    assert moved.output_dir().name == f"dynamics-{config.fingerprint[:12]}"
    assert moved.output_dir().parent == tmp_path


def test_noisy_circuit_needs_a_seed():
    text = SMALL_CIRCUIT + "\n[noise]\np1 = 0.01\n"
    with pytest.raises(ConfigInvalid) as err:
        parse_config(text)
    assert err.value.key == "run.seed"
    assert parse_config(text + "\n[run]\nseed = 5\n").noise.seed == 5


def test_energy_is_not_a_circuit_observable():
    with pytest.raises(ConfigInvalid) as err:
        parse_config(SMALL_CIRCUIT.replace('["corner_z"]', '["energy"]'))
    assert err.value.key == "experiment.observables"


def test_dynamics_run_writes_series_and_manifest(tmp_path):
    config = _config(SMALL_DYNAMICS, tmp_path)
    result = run(config)
    assert result.out_dir == config.output_dir()
    metadata, header, rows = read_table(result.out_dir / "corner_z.csv")
    assert header == ["n", "t", "value", "imag_residual"]
    assert metadata["observable"] == "Z1"
    assert len(rows) == 7
    for n, row in enumerate(rows):
        assert float(row[2]) == pytest.approx((-1.0) ** n, abs=1e-7)
    _, _, k_rows = read_table(result.out_dir / "bulk_k.csv")
    assert float(k_rows[0][2]) == pytest.approx(1.0)

    manifest = read_manifest(result.out_dir)
    assert manifest["fingerprint"] == config.fingerprint
    assert set(manifest["files"]) == {"corner_z.csv", "bulk_k.csv"}
    assert set(manifest["censored"]) == {"dynamics:corner_z", "dynamics:bulk_k"}
    assert manifest["censored"]["dynamics:corner_z"] is True


def test_runs_are_deterministic_and_manifests_reload(tmp_path):
    first = run(_config(SMALL_DYNAMICS, tmp_path / "a"))
    second = run(_config(SMALL_DYNAMICS, tmp_path / "b"))
    for name in ("corner_z.csv", "bulk_k.csv"):
        assert table_body(first.out_dir / name) == table_body(second.out_dir / name)
    reloaded = load_config(first.out_dir / MANIFEST)
    assert reloaded.fingerprint == first.fingerprint


def test_circuit_run(tmp_path):
    result = run(_config(SMALL_CIRCUIT, tmp_path))
    metadata, header, rows = read_table(result.out_dir / "circuit_corner_z.csv")
    assert header == ["n", "mean", "stderr", "trajectories"]
    assert metadata["seed"] == "none"
    assert [float(r[1]) for r in rows] == pytest.approx([1.0, -1.0, 1.0, -1.0], abs=1e-8)
    assert (result.out_dir / "period.circuit").read_text().startswith("qubits 8\n")
    assert result.extras["circuit"]["depth"] > 0


def test_noisy_echo_is_reproducible(tmp_path):
    text = SMALL_CIRCUIT.replace("circuit-dynamics", "echo") + (
        "\n[noise]\np1 = 0.01\np2 = 0.02\ntrajectories = 4\n\n[run]\nseed = 11\n"
    )
    first = run(_config(text, tmp_path / "a"))
    second = run(_config(text, tmp_path / "b"))
    body = table_body(first.out_dir / "echo_corner_z.csv")
    assert body == table_body(second.out_dir / "echo_corner_z.csv")
    _, _, rows = read_table(first.out_dir / "echo_corner_z.csv")
    assert all(abs(float(r[1])) <= 1.0 for r in rows)
    assert all(int(r[3]) == 4 for r in rows)


def test_bundled_figures():
    assert figures() == ["fig1b", "fig1c", "fig1d", "fig2ab", "fig2c", "fig3ab", "fig3c", "fig4"]
    assert sorted(CHECKS) == figures()
    assert figure_config("fig1b").kind is ExperimentKind.FREQUENCY_SWEEP
    assert figure_config("fig1b").experiment.observables == ("corner_z", "corner_x", "energy")
    assert figure_config("fig1c").kind is ExperimentKind.DYNAMICS
    scan = figure_config("fig2ab")
    assert scan.kind is ExperimentKind.PHASE_SCAN
    assert [s.build().n_sites for s in scan.lattice.specs()] == [12, 18]
    assert scan.experiment.duality_points == (0.5, 0.8)
    assert figure_config("fig3c").protocol.j_r == pytest.approx(5.11)
    echo = figure_config("fig4")
    assert echo.circuit.with_echo
    assert echo.noise.seed == 0
    with pytest.raises(ExperimentError):
        figure_config("fig9")


def test_cli_validate_config(tmp_path, capsys):
    good = tmp_path / "good.toml"
    good.write_text(SMALL_DYNAMICS)
    assert cli_app.run_app(["validate-config", "--config", str(good)]) == 0
    assert capsys.readouterr().out.startswith("ok dynamics ")

    bad = tmp_path / "bad.toml"
    bad.write_text(SMALL_DYNAMICS + "bogus = 1\n")
    assert cli_app.run_app(["validate-config", "--config", str(bad)]) == cli_app.EXIT_LIBRARY_ERROR
    assert "experiment.bogus" in capsys.readouterr().err

    missing = tmp_path / "missing.toml"
    assert cli_app.run_app(["validate-config", "--config", str(missing)]) == cli_app.EXIT_LIBRARY_ERROR


def test_cli_export_circuit(tmp_path):
    config = tmp_path / "circuit.toml"
    config.write_text(SMALL_CIRCUIT)
    target = tmp_path / "prep.circuit"
    argv = ["export-circuit", "--config", str(config), "--part", "prep", "--output", str(target)]
    assert cli_app.run_app(argv) == 0
    assert target.read_text().startswith("qubits 8\n")


def test_cli_run(tmp_path, capsys):
    config = tmp_path / "dynamics.toml"
    config.write_text(SMALL_DYNAMICS)
    assert cli_app.run_app(["run", "--config", str(config), "--out", str(tmp_path / "runs")]) == 0
    assert list((tmp_path / "runs").glob("dynamics-*/corner_z.csv"))


@pytest.mark.slow
@pytest.mark.parametrize("figure", ["fig1b", "fig1c", "fig2ab", "fig2c", "fig3ab", "fig3c", "fig4"])
def test_reproduce_bundled_figure(tmp_path, figure):
    outcome = asyncio.run(reproduce(figure, out=str(tmp_path), workers=2))
    assert outcome.summary.read_text().startswith(figure)
    assert outcome.passed, "\n".join(c.line() for c in outcome.checks)


def test_reproduce_rejects_unknown_figures(tmp_path):
    with pytest.raises(ExperimentError):
        asyncio.run(reproduce("fig9", out=str(tmp_path)))


def test_gap_config_needs_no_observables():
    text = textwrap.dedent("""
        [lattice]
        blue_dims = [2, 2]
        red_dims = [2, 2]
        [experiment]
        kind = "gap"
        observables = []
    """)
    assert parse_config(text).kind is ExperimentKind.GAP


SMALL_PHASE = """\
[lattice]
blue_dims = [2, 2]
red_dims = [2, 2]
sizes = [[2, 3, 2, 3]]

[protocol]
preset = "ideal"

[experiment]
kind = "phase-scan"
observables = []
scan_parameter = "v_zz"
scan_grid = [0.0, 1.0, 2.0]
duality_points = [0.5]
duality_grid = [0.0, 1.0, 2.0]
"""


def test_dynamics_writes_energy_and_fingerprints_every_series(tmp_path):
    text = SMALL_DYNAMICS.replace('["corner_z", "bulk_k"]', '["corner_z", "corner_x", "energy"]')
    config = _config(text, tmp_path)
    result = run(config)
    for name in ("corner_z", "corner_x", "energy"):
        metadata, _, rows = read_table(result.out_dir / f"{name}.csv")
        assert metadata["fingerprint"] == config.fingerprint
        assert len(rows) == 7
    assert set(result.extras["lifetimes"]) == {"corner_z", "corner_x"}


def test_run_seed_reaches_the_eigensolver(tmp_path, monkeypatch):
    seeds = []
    real = sweeps.select_corner_polarized

    def recording(lattice, heff, *, seed=0, stats=None):
        seeds.append(seed)
        return real(lattice, heff, seed=seed, stats=stats)

    monkeypatch.setattr(sweeps, "select_corner_polarized", recording)
    text = SMALL_DYNAMICS.replace('initial = "all_up"', 'initial = "ground"') + "\n[run]\nseed = 9\n"
    run(_config(text, tmp_path))
    assert seeds == [9]


def test_sweep_writes_a_series_per_point(tmp_path):
    text = (
        SMALL_DYNAMICS.replace('kind = "dynamics"', 'kind = "frequency-sweep"\nomegas = [4.0, 8.0]')
        .replace('["corner_z", "bulk_k"]', '["corner_z", "energy"]')
        .replace("n_max = 6", "n_max = 4")
    )
    config = _config(text, tmp_path)
    result = run(config)
    columns = list(result.tables["frequency_sweep"][0])
    assert columns == ["n_sites", "omega", "tau_corner_z", "censored_corner_z"]
    for omega in ("4", "8"):
        for label in ("corner_z", "energy"):
            metadata, _, rows = read_table(result.out_dir / f"omega{omega}_n8_{label}.csv")
            assert metadata["fingerprint"] == config.fingerprint
            assert len(rows) == 5
    table_meta, _, _ = read_table(result.out_dir / "frequency_sweep.csv")
    assert table_meta["fingerprint"] == config.fingerprint
    assert "omega8_n8_energy" in result.series


def test_phase_scan_compares_sizes_and_checks_duality(tmp_path):
    result = run(_config(SMALL_PHASE, tmp_path))
    rows = result.tables["phase_scan"]
    assert sorted({r["n_sites"] for r in rows}) == [8, 12]
    assert set(result.extras["size_crossings"]) == {"o_m", "zz", "xx"}
    duality = result.tables["duality"]
    assert [r["v"] for r in duality] == [0.5]
    assert duality[0]["inv_v"] == pytest.approx(2.0)
    assert "duality_violation" in result.extras
    assert "duality.csv" in read_manifest(result.out_dir)["files"]


@pytest.mark.parametrize(
    "old, new, key",
    [
        ("duality_points = [0.5]", "duality_points = [-0.5]", "experiment.duality_points"),
        ("duality_grid = [0.0, 1.0, 2.0]", "duality_grid = []", "experiment.duality_grid"),
        ("duality_grid = [0.0, 1.0, 2.0]", "duality_grid = [2.0, 0.0]", "experiment.duality_grid"),
    ],
)
def test_duality_settings_are_validated(old, new, key):
    with pytest.raises(ConfigInvalid) as err:
        parse_config(SMALL_PHASE.replace(old, new))
    assert err.value.key == key


def test_circuit_run_with_echo(tmp_path):
    result = run(_config(SMALL_CIRCUIT + "\n[circuit]\nwith_echo = true\n", tmp_path))
    for prefix in ("circuit", "echo"):
        metadata, _, _ = read_table(result.out_dir / f"{prefix}_corner_z.csv")
        assert metadata["fingerprint"] == result.fingerprint
    assert [e.mean for e in result.estimates["echo_corner_z"]] == pytest.approx([1.0] * 4)
    dynamics = [e.mean for e in result.estimates["circuit_corner_z"]]
    assert dynamics == pytest.approx([1.0, -1.0, 1.0, -1.0], abs=1e-8)
