"""Conditioned synthesis, fidelity metrics and training-log export."""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .data import atomic_write
from .exceptions import ConfigError, ShapeError
from .model import TrainingLog, generator_forward, sample_latent
from .nn import check_labels

__all__ = [
    "SynthesisRequest",
    "FidelityReport",
    "generate_synthetic",
    "moment_compare",
    "mean_magnitude_spectrum",
    "ks_per_dimension",
    "fidelity_report",
    "export_training_log",
    "read_training_log",
    "plot_training_log",
]


@dataclass(frozen=True)
class SynthesisRequest:
    label: int
    count: int
    seed: int = 0

    def __post_init__(self):
        check_labels([self.label])
        if self.count < 1:
            raise ConfigError(f"count must be at least 1, got {self.count}")


def generate_synthetic(gen, req):
    """``req.count`` segments from ``gen`` conditioned on ``req.label``."""
    rng = np.random.default_rng(req.seed)
    z = sample_latent(rng, req.count, gen.latent_dim)
    return generator_forward(gen, z, np.full(req.count, req.label))


def _same_columns(real, synth, min_rows=1):
    real = np.asarray(real, dtype=np.float64)
    synth = np.asarray(synth, dtype=np.float64)
    if real.ndim != 2 or synth.ndim != 2 or real.shape[1] != synth.shape[1]:
        raise ShapeError(f"column mismatch: {real.shape} vs {synth.shape}")
    if min(real.shape[0], synth.shape[0]) < min_rows:
        raise ShapeError(f"need at least {min_rows} rows per set")
    return real, synth


def moment_compare(real, synth):
    """Per-dimension ``|mean difference|`` and ``|std difference|``."""
    real, synth = _same_columns(real, synth)
    mean_diff = np.abs(real.mean(axis=0) - synth.mean(axis=0))
    std_diff = np.abs(real.std(axis=0) - synth.std(axis=0))
    return mean_diff, std_diff


def mean_magnitude_spectrum(samples):
    """Mean squared DFT magnitude per frequency bin, bins ``0..L//2``."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeError(f"expected a non-empty 2-D array, got shape {x.shape}")
    return np.mean(np.abs(np.fft.rfft(x, axis=1)) ** 2, axis=0)


def peak_bins(samples):
    """Per-row argmax of the power spectrum."""
    x = np.asarray(samples, dtype=np.float64)
    return np.argmax(np.abs(np.fft.rfft(x, axis=1)) ** 2, axis=1)


def _ks_column(a, b):
    a = np.sort(a)
    b = np.sort(b)
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_per_dimension(real, synth):
    """Two-sample Kolmogorov-Smirnov statistic for each column."""
    real, synth = _same_columns(real, synth, min_rows=2)
    return np.array([_ks_column(real[:, d], synth[:, d]) for d in range(real.shape[1])])


@dataclass
class FidelityReport:
    mean_diff: np.ndarray
    std_diff: np.ndarray
    ks: np.ndarray
    real_spectrum: np.ndarray
    synth_spectrum: np.ndarray
    spectral_distance: float
    synth_peak_agreement: float

    @property
    def real_peak_bin(self):
        return int(np.argmax(self.real_spectrum))

    @property
    def synth_peak_bin(self):
        return int(np.argmax(self.synth_spectrum))

    def is_finite(self):
        arrays = (self.mean_diff, self.std_diff, self.ks, self.real_spectrum, self.synth_spectrum)
        return all(np.all(np.isfinite(a)) for a in arrays) and np.isfinite(self.spectral_distance)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dim", "mean_diff", "std_diff", "ks"])
        for d, row in enumerate(zip(self.mean_diff, self.std_diff, self.ks)):
            w.writerow([d] + [repr(float(v)) for v in row])
        return buf.getvalue()

    def to_text(self):
        lines = [
            f"{'dim':>4} {'mean_diff':>10} {'std_diff':>10} {'ks':>8}",
        ]
        for d, (m, s, k) in enumerate(zip(self.mean_diff, self.std_diff, self.ks)):
            lines.append(f"{d:>4} {m:>10.5f} {s:>10.5f} {k:>8.4f}")
        lines += [
            "",
            f"max mean_diff       {self.mean_diff.max():.5f}",
            f"max std_diff        {self.std_diff.max():.5f}",
            f"max ks              {self.ks.max():.4f}",
            f"real peak bin       {self.real_peak_bin}",
            f"synthetic peak bin  {self.synth_peak_bin}",
            f"peak agreement      {self.synth_peak_agreement:.3f}",
            f"spectral L2 dist    {self.spectral_distance:.5f}",
            "",
            f"{'bin':>4} {'real_power':>12} {'synth_power':>12}",
        ]
        for k, (r, s) in enumerate(zip(self.real_spectrum, self.synth_spectrum)):
            lines.append(f"{k:>4} {r:>12.5f} {s:>12.5f}")
        return "\n".join(lines) + "\n"


def fidelity_report(real, synth):
    real, synth = _same_columns(real, synth, min_rows=2)
    mean_diff, std_diff = moment_compare(real, synth)
    real_spec = mean_magnitude_spectrum(real)
    synth_spec = mean_magnitude_spectrum(synth)
    return FidelityReport(
        mean_diff=mean_diff,
        std_diff=std_diff,
        ks=ks_per_dimension(real, synth),
        real_spectrum=real_spec,
        synth_spectrum=synth_spec,
        spectral_distance=float(np.linalg.norm(real_spec - synth_spec)),
        synth_peak_agreement=float(np.mean(peak_bins(synth) == np.argmax(real_spec))),
    )


def export_training_log(log, path):
    """Write ``epoch,d_loss,g_loss`` CSV with shortest round-trip reals."""
    if len(log) == 0:
        raise ValueError("cannot export an empty training log")
    lines = ["epoch,d_loss,g_loss"]
    lines += [f"{r.epoch},{r.d_loss!r},{r.g_loss!r}" for r in log]
    atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_training_log(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["epoch", "d_loss", "g_loss"]:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return TrainingLog((int(r["epoch"]), float(r["d_loss"]), float(r["g_loss"])) for r in reader)


def plot_training_log(log, path):
    """Save critic and generator loss curves as an SVG line plot."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "eegwgan", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(log.epochs, log.d_losses, label="critic (d_loss)")
        ax.plot(log.epochs, log.g_losses, label="generator (g_loss)")
        ax.set_xlabel("epoch")
        ax.set_ylabel("loss")
        ax.legend()
        fig.tight_layout()
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    atomic_write(path, buf.getvalue())
