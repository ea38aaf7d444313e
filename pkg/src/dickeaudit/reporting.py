"""Output plumbing: delimited data tables, run manifests, rendered figures.

Data files are whitespace-delimited numeric columns with a single
'#'-prefixed header line naming columns and units, consumable by any
plotting tool.  Each run writes a manifest.txt (key = value lines) listing
every emitted file with its SHA-256 digest; digests are stable for a fixed
config and seed.
"""

from __future__ import annotations

import hashlib
import time
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

UNCONVERGED_MARK = "UNCONVERGED"
_PNG_METADATA = {"Software": "dickeaudit"}  # fixed so digests are reproducible


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_table(
    path: str | Path,
    columns: dict[str, np.ndarray],
    watermark: str | None = None,
) -> Path:
    """Write named numeric columns with one '#' header line."""
    path = Path(path)
    names = " ".join(columns)
    header = f"# {watermark} | {names}\n" if watermark else f"# {names}\n"
    data = np.column_stack([np.asarray(col, dtype=float) for col in columns.values()])
    with open(path, "w") as fh:
        fh.write(header)
        for row in data:
            fh.write(" ".join(f"{v:.12g}" for v in row) + "\n")
    return path


class RunManifest:
    """Collects config echo, stage timings, verdicts, and the file inventory."""

    def __init__(self, out_dir: str | Path, command: str, config_echo: dict[str, str]):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.entries: list[tuple[str, str]] = [("command", command)]
        self.entries.extend(config_echo.items())
        self.files: list[Path] = []
        self._stage_start = time.perf_counter()

    def record(self, key: str, value) -> None:
        self.entries.append((key, str(value)))

    def stage_done(self, name: str) -> None:
        now = time.perf_counter()
        self.entries.append((f"timing.{name}_s", f"{now - self._stage_start:.3f}"))
        self._stage_start = now

    def add_file(self, path: Path) -> None:
        self.files.append(Path(path))

    def write(self) -> Path:
        path = self.out_dir / "manifest.txt"
        with open(path, "w") as fh:
            for key, value in self.entries:
                fh.write(f"{key} = {value}\n")
            for f in self.files:
                fh.write(f"file.{f.name} = {sha256_file(f)}\n")
        return path


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)
    return path


def render_convergence(
    path: Path,
    cutoffs,
    levels_per_atom: dict[int, np.ndarray],
    gs_line: float,
    title: str,
) -> Path:
    """Level energies per atom vs cutoff, with the mean-field ground state dashed."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for idx, values in levels_per_atom.items():
        ax.plot(cutoffs, values, "o-", ms=4, label=f"n = {idx}")
    ax.axhline(gs_line, ls="--", color="k", lw=1, label="semiclassical GS")
    ax.set_xlabel(r"$n_{\max}$")
    ax.set_ylabel(r"$E_n / N$")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def render_dos(
    path: Path,
    hists: dict[int, tuple[np.ndarray, np.ndarray]],
    curve: tuple[np.ndarray, np.ndarray],
    onset: float,
    esqpt: float,
    title: str,
) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for n_max, (centers, density) in hists.items():
        ax.step(centers, density, where="mid", label=rf"$n_{{\max}}={n_max}$")
    ax.plot(curve[0], curve[1], "k-", lw=1.5, label="semiclassical")
    ax.axvline(onset, ls=":", color="gray", lw=1)
    ax.axvline(esqpt, ls=":", color="gray", lw=1)
    ax.set_xlabel(r"$E / N$")
    ax.set_ylabel(r"$\nu(E)$  [states per unit energy]")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def render_rstat(
    path: Path,
    cutoffs,
    r_means,
    goe_line: float,
    title: str,
) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(cutoffs, r_means, "o-", ms=5)
    ax.axhline(goe_line, ls="--", color="C3", lw=1, label=rf"GOE $\approx$ {goe_line}")
    ax.set_xlabel(r"$n_{\max}$")
    ax.set_ylabel(r"$\langle r \rangle$")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def render_chaos(
    path: Path,
    spacing: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray],
    power: tuple[np.ndarray, np.ndarray],
    power_ref: tuple[np.ndarray, np.ndarray] | None,
    title: str,
) -> Path:
    centers, density, wigner, poisson = spacing
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    width = centers[1] - centers[0] if centers.size > 1 else 0.1
    ax1.bar(centers, density, width=width, alpha=0.5, label="data")
    ax1.plot(centers, wigner, "C0-", label="Wigner surmise")
    ax1.plot(centers, poisson, "C2--", label="Poisson")
    ax1.set_xlabel(r"$s$")
    ax1.set_ylabel(r"$P(s)$")
    ax1.legend(fontsize=8)
    k, p = power
    ax2.loglog(k, p, "o", ms=3, label=r"$\langle P_k^\delta \rangle$")
    if power_ref is not None:
        ax2.loglog(power_ref[0], power_ref[1], "C3-", lw=1, label="GOE (sampled)")
    ax2.set_xlabel(r"$k$")
    ax2.set_ylabel(r"$\langle P_k^\delta \rangle$")
    ax2.legend(fontsize=8)
    fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, path)
