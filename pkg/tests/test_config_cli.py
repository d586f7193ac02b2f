import textwrap
from fractions import Fraction

import pytest

from zer import cli
from zer.config import dump_yaml, load_preset, load_text
from zer.errors import ConfigError, WannierizationError

SMALL = textwrap.dedent("""\
    model:
      name: small-ssh
      cells: 16
      orbitals_per_cell: 2
      filling: "1/2"
      hoppings:
        - {shift: 0, alpha: 0, beta: 1, amplitude: -0.4}
        - {shift: 1, alpha: 0, beta: 1, amplitude: -0.6}
    rg:
      epsilon_schedule: [1.0e-3]
    """)


def test_presets():
    ssh = load_preset("ssh")
    assert ssh.model.cells == 729 and ssh.rg.blocking_factor == 3
    assert [h.amplitude for h in ssh.model.hoppings] == [-0.4, -0.6]
    assert ssh.rg.epsilon_schedule == [1e-5]
    ext = load_preset("extended")
    assert ext.rg.epsilon_schedule == [5e-4, 5e-4, 5e-4, 1e-3, 1e-3, 1e-2]
    assert ext.model.filling == Fraction(2, 5)
    assert load_preset("nn").model.to_spec().n_filled == 512


def test_missing_field_is_named_with_line():
    text = SMALL.replace('  filling: "1/2"\n', "")
    with pytest.raises(ConfigError) as info:
        load_text(text)
    (problem,) = info.value.problems
    assert "model.filling" in problem and "line 2" in problem


def test_unknown_key_rejected_with_line():
    with pytest.raises(ConfigError) as info:
        load_text(SMALL + "  tolerance: 3\n")
    assert any("rg.tolerance" in p and "line 11" in p for p in info.value.problems)


def test_physics_errors_become_config_errors():
    with pytest.raises(ConfigError, match="Hermitian"):
        load_text(SMALL.replace("amplitude: -0.6}", "amplitude: -0.6}\n    - {shift: -1, alpha: 1, beta: 0, amplitude: 1.0}"))
    with pytest.raises(ConfigError, match="epsilon"):
        load_text(SMALL.replace("1.0e-3", "0.9"))


def test_malformed_yaml():
    with pytest.raises(ConfigError, match="malformed"):
        load_text("model: [unclosed")


def test_filling_and_amplitude_forms():
    cfg = load_text(SMALL.replace('"1/2"', "0.5").replace("amplitude: -0.4", "amplitude: [-0.4, 0.1]"))
    assert cfg.model.filling == Fraction(1, 2)
    assert cfg.model.hoppings[0].amplitude == complex(-0.4, 0.1)


def test_echo_round_trips():
    for cfg in (load_text(SMALL), load_preset("extended")):
        assert load_text(dump_yaml(cfg)) == cfg


def write(tmp_path, text=SMALL):
    p = tmp_path / "run.yaml"
    p.write_text(text)
    return p


def test_validate_command(tmp_path, capsys):
    assert cli.main(["validate", str(write(tmp_path))]) == 0
    assert "32 modes" in capsys.readouterr().out
    assert cli.main(["validate", str(write(tmp_path, "model: {}\n"))]) == 2
    assert cli.main(["validate", str(tmp_path / "missing.yaml")]) == 2


def test_run_writes_all_artifacts_deterministically(tmp_path):
    cfg = write(tmp_path)
    for out in ("a", "b"):
        # same output path both times: it is echoed into config.yaml and trace.json
        assert cli.main(["run", str(cfg), "--out", str(tmp_path / "out"),
                         "--artifacts", "trace,band_structure,correlations,level_decomposition,"
                         "momentum_occupation,bounds,matrices"]) == 0
        (tmp_path / "out").rename(tmp_path / out)
    names = sorted(p.relative_to(tmp_path / "a").as_posix() for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert "trace.json" in names and "matrices/core_embedding.npy" in names
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
    assert not list(tmp_path.glob(".zer-stage-*"))


def test_artifact_subset_and_echo(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", str(write(tmp_path)), "--out", str(out), "--artifacts", "bounds"]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["bounds.csv", "config.yaml"]
    echoed = load_text((out / "config.yaml").read_text())
    assert echoed.outputs.artifacts == ["bounds"]


def test_invalid_output_directory_writes_nothing(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["run", str(write(tmp_path)), "--out", str(blocker)]) == 2
    assert cli.main(["run", str(write(tmp_path)), "--out", str(tmp_path / "no" / "such")]) == 2
    assert sorted(p.name for p in tmp_path.iterdir()) == ["file", "run.yaml"]
    assert "output directory" in capsys.readouterr().err


def test_bad_arguments(tmp_path):
    assert cli.main(["run"]) == 2
    assert cli.main(["run", str(write(tmp_path)), "--preset", "nn"]) == 2
    with pytest.raises(SystemExit):
        cli.main(["run", "--preset", "nn", "--artifacts", "plots"])


def test_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    def boom(spec, config):
        raise WannierizationError("singular loop", step=3)
    monkeypatch.setattr(cli, "run_zer", boom)
    assert cli.main(["run", str(write(tmp_path)), "--out", str(tmp_path / "o")]) == 3
    err = capsys.readouterr().err
    assert "step 3" in err and "module wannier" in err
    assert not (tmp_path / "o").exists()
