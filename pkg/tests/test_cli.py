"""Config parsing and end-to-end CLI runs on desk-scale inputs."""

import hashlib
from pathlib import Path

import pytest

from dickeaudit.cli import main
from dickeaudit.config import ConfigError, ExperimentConfig, load_config

SMALL_MODEL = """
[model]
omega = 1.0
omega0 = 1.0
g = 1.0
n_atoms = 6
"""


def write_cfg(tmp_path: Path, body: str, name: str = "exp.cfg") -> str:
    path = tmp_path / name
    path.write_text(body)
    return str(path)


def read_manifest(path: str) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        key, _, value = line.partition(" = ")
        out[key] = value
    return out


def test_load_config_round_trip(tmp_path):
    cfg_path = write_cfg(
        tmp_path,
        SMALL_MODEL
        + """
[convergence]
ladder = 10 20 30
levels = 1 2
tol = 1e-8
parity = both

[analysis]
window = 0.25 1.75
segments = 4
""",
    )
    cfg = load_config(cfg_path, seed=5, out_dir="elsewhere")
    assert cfg.n_atoms == 6
    assert cfg.ladder == (10, 20, 30)
    assert cfg.levels == (1, 2)
    assert cfg.tol == 1e-8
    assert cfg.parity == "both"
    assert cfg.window == (0.25, 1.75)
    assert cfg.segments == 4
    assert cfg.seed == 5 and cfg.out_dir == "elsewhere"
    assert len(cfg.sectors()) == 2
    echo = cfg.echo()
    assert echo["config.ladder"] == "10 20 30"
    assert echo["config.g"] == "1.0"


def test_load_config_rejects_unknown_key(tmp_path):
    cfg_path = write_cfg(tmp_path, SMALL_MODEL + "\n[analysis]\nbins = 4\n")
    with pytest.raises(ConfigError, match="unknown config key"):
        load_config(cfg_path)


def test_load_config_rejects_bad_values(tmp_path):
    with pytest.raises(ConfigError, match="bad value"):
        load_config(write_cfg(tmp_path, SMALL_MODEL + "\n[convergence]\nladder = a b\n"))
    with pytest.raises(ConfigError, match="window"):
        load_config(write_cfg(tmp_path, SMALL_MODEL + "\n[analysis]\nwindow = 2.0 1.0\n"))
    with pytest.raises(ConfigError, match="ladder"):
        ExperimentConfig(ladder=(30, 20))
    with pytest.raises(ConfigError, match="parity"):
        ExperimentConfig(parity="even")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "does_not_exist.cfg")


def test_cli_converge(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        SMALL_MODEL
        + """
[convergence]
ladder = 20 30 40
levels = 1 2 5
parity = both
""",
    )
    code = main(["converge", "--config", cfg, "--out", str(tmp_path / "out")])
    assert code == 0
    manifest_path = capsys.readouterr().out.strip()
    manifest = read_manifest(manifest_path)
    assert manifest["command"] == "converge"
    assert manifest["even.monotonic"] == "true"
    assert manifest["odd.converged.level_1"] == "True"
    out_dir = Path(manifest_path).parent
    for name in ("convergence_even.dat", "convergence_odd.dat", "convergence_even.png"):
        assert (out_dir / name).exists()
    header = (out_dir / "convergence_even.dat").read_text().splitlines()[0]
    assert header.startswith("# ") and "E1_over_N" in header


def test_cli_dos_trusted(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        SMALL_MODEL
        + """
[convergence]
ladder = 60
parity = both

[analysis]
window = 0.5 1.5
dos_bins = 8
""",
    )
    assert main(["dos", "--config", cfg, "--out", str(tmp_path / "out")]) == 0
    manifest_path = capsys.readouterr().out.strip()
    out_dir = Path(manifest_path).parent
    hist = (out_dir / "dos_hist_nmax60.dat").read_text().splitlines()
    assert hist[0] == "# E_over_N density count"
    assert len(hist) == 9
    assert (out_dir / "dos_semiclassical.dat").exists()
    assert (out_dir / "dos.png").exists()


def test_cli_dos_untrusted_gate_and_override(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        SMALL_MODEL
        + """
[convergence]
ladder = 10

[analysis]
window = 3.0 6.0
dos_bins = 6
""",
    )
    # E*/N = 10/6 + 0.5 < 3, so nothing in the window can be trusted
    assert main(["dos", "--config", cfg, "--out", str(tmp_path / "gated")]) == 2
    capsys.readouterr()
    code = main(
        ["dos", "--config", cfg, "--out", str(tmp_path / "forced"), "--allow-unconverged"]
    )
    assert code == 0
    out_dir = Path(capsys.readouterr().out.strip()).parent
    header = (out_dir / "dos_hist_nmax10.dat").read_text().splitlines()[0]
    assert header.startswith("# UNCONVERGED |")


def test_cli_rstat(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        SMALL_MODEL
        + """
[convergence]
ladder = 40 60
parity = both

[analysis]
window = 0.5 1.5
""",
    )
    assert main(["rstat", "--config", cfg, "--out", str(tmp_path / "out")]) == 0
    out_dir = Path(capsys.readouterr().out.strip()).parent
    lines = (out_dir / "rstat.dat").read_text().splitlines()
    assert lines[0] == "# n_max r_mean goe n_gaps n_degenerate_excluded window_trusted"
    assert len(lines) == 3
    last = [float(tok) for tok in lines[-1].split()]
    assert 0.0 <= last[1] <= 1.0  # r_mean
    assert last[5] == 1.0  # top rung trusted


def test_cli_chaos_poisson_surrogate_reproducible(tmp_path, capsys):
    cfg = str(Path(__file__).resolve().parent.parent / "configs" / "poisson_surrogate.cfg")
    digests = []
    for tag in ("a", "b"):
        assert main(["chaos", "--config", cfg, "--out", str(tmp_path / tag),
                     "--seed", "3"]) == 0
        manifest = read_manifest(capsys.readouterr().out.strip())
        digests.append({k: v for k, v in manifest.items() if k.startswith("file.")})
    assert digests[0] == digests[1]
    assert "file.chaos.png" in digests[0]
    assert "file.spacing_hist.dat" in digests[0]


def test_cli_goe_ref(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        """
[goe]
dim = 200
samples = 20
window_fraction = 0.5

[analysis]
spacing_bins = 20
""",
    )
    assert main(["goe-ref", "--config", cfg, "--out", str(tmp_path / "out"),
                 "--seed", "1"]) == 0
    manifest_path = capsys.readouterr().out.strip()
    manifest = read_manifest(manifest_path)
    assert abs(float(manifest["goe.r_mean"]) - 0.5307) < 0.02
    assert abs(float(manifest["poisson.r_mean"]) - 0.3863) < 0.02
    out_dir = Path(manifest_path).parent
    for name in ("goe_spacing_hist.dat", "goe_power.dat",
                 "poisson_spacing_hist.dat", "poisson_power.dat"):
        assert (out_dir / name).exists()


def test_cli_error_paths(tmp_path, capsys):
    assert main(["converge", "--config", str(tmp_path / "missing.cfg")]) == 1
    bad = write_cfg(tmp_path, SMALL_MODEL + "\n[analysis]\ntypo_key = 1\n")
    assert main(["dos", "--config", bad]) == 1
    capsys.readouterr()


def test_manifest_digests_match_files(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        SMALL_MODEL
        + """
[convergence]
ladder = 10 15
levels = 1
""",
    )
    assert main(["converge", "--config", cfg, "--out", str(tmp_path / "out")]) == 0
    manifest_path = capsys.readouterr().out.strip()
    out_dir = Path(manifest_path).parent
    manifest = read_manifest(manifest_path)
    checked = 0
    for key, digest in manifest.items():
        if key.startswith("file."):
            payload = (out_dir / key[len("file."):]).read_bytes()
            assert hashlib.sha256(payload).hexdigest() == digest
            checked += 1
    assert checked >= 2
