"""Seeded Monte Carlo over fabrication imperfections.

Each trial draws one disordered lattice: separations snapped to the writing
stage grid and jittered, couplings multiplied by Gaussian noise, Gaussian
on-site detunings, optional beyond-nearest-neighbour couplings, and a uniform
propagation loss. Transfer fidelity is the (optionally loss-renormalized)
intensity arriving at the mirror site N - k + 1 at the device output.

Seed splitting: trial ``i`` of a run with master seed ``s`` uses
``splitmix64(s ^ i)`` as its own seed. Inside a trial the jitter, coupling-noise
and detuning draws come from three independent child streams of that seed, so
switching one channel on never shifts the random numbers of another.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np
from scipy.optimize import minimize_scalar

from .design import design_separations
from .lattice import (
    DEFAULT_COUPLING_CUTOFF,
    ChannelSpec,
    CouplingLaw,
    Geometry,
    Hamiltonian,
    Profile,
    ValidationError,
    build_hamiltonian,
    build_hamiltonian_from_geometry,
    tridiagonal,
)
from .propagation import db_per_cm_to_rate, propagate_spectral, propagator

_MASK64 = (1 << 64) - 1
_MAX_RESAMPLES = 10_000


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(master_seed: int, trial: int) -> int:
    return splitmix64((int(master_seed) ^ int(trial)) & _MASK64)


@dataclass(frozen=True)
class DisorderModel:
    """Imperfection channels. Zero disables a channel exactly.

    The default snaps separations to the 0.5 um writing-stage grid and leaves
    every other channel off; ``DisorderModel.none()`` is the ideal device.
    """

    spacing_quantum: float = 0.5  # um
    spacing_jitter: float = 0.0  # um, half-width of uniform jitter
    coupling_sigma: float = 0.0  # relative
    detuning_sigma: float = 0.0  # cm^-1
    loss_db_per_cm: float = 0.0
    beyond_nn: bool = False
    coupling_cutoff: float = DEFAULT_COUPLING_CUTOFF  # cm^-1, only with beyond_nn

    def __post_init__(self):
        for name in ("spacing_quantum", "spacing_jitter", "coupling_sigma",
                     "detuning_sigma", "loss_db_per_cm", "coupling_cutoff"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValidationError(name, f"must be finite and >= 0, got {v}")

    @classmethod
    def none(cls) -> DisorderModel:
        return cls(spacing_quantum=0.0)

    @property
    def uses_geometry(self) -> bool:
        return self.spacing_quantum > 0 or self.spacing_jitter > 0 or self.beyond_nn


@dataclass(frozen=True)
class DisorderRealization:
    hamiltonian: Hamiltonian
    seed: int
    resampled: int  # redrawn jitter / coupling values that came out non-positive


def quantize(d: np.ndarray, quantum: float) -> np.ndarray:
    """Round to the nearest multiple of ``quantum``, halves away from zero."""
    if quantum == 0:
        return np.asarray(d, dtype=float)
    d = np.asarray(d, dtype=float)
    return np.sign(d) * np.floor(np.abs(d) / quantum + 0.5) * quantum


def _perturb_positive(base: np.ndarray, perturb) -> tuple[np.ndarray, int]:
    """Apply ``perturb`` elementwise, redrawing entries that come out non-positive."""
    out = perturb(base)
    redrawn = 0
    bad = out <= 0
    while np.any(bad):
        redrawn += int(bad.sum())
        if redrawn > _MAX_RESAMPLES:
            raise ValidationError("disorder", "noise too large to keep values positive")
        out[bad] = perturb(base[bad])
        bad = out <= 0
    return out, redrawn


def draw_realization(spec: ChannelSpec, law: CouplingLaw, model: DisorderModel, seed: int) -> DisorderRealization:
    n = spec.n_sites
    ss = np.random.SeedSequence(int(seed) & _MASK64)
    jitter_rng, coupling_rng, detuning_rng = (np.random.default_rng(s) for s in ss.spawn(3))
    redrawn = 0

    if model.uses_geometry and n > 1:
        d = quantize(design_separations(spec.couplings(), law).separations, model.spacing_quantum)
        if model.spacing_jitter > 0:
            j = model.spacing_jitter
            d, r = _perturb_positive(d, lambda x: x + jitter_rng.uniform(-j, j, len(x)))
            redrawn += r
        geometry = Geometry(d)
        if model.beyond_nn:
            c = np.array(build_hamiltonian_from_geometry(geometry, law, model.coupling_cutoff).couplings)
        else:
            c = np.array(tridiagonal(law.alpha * np.exp(-law.beta * geometry.separations)).couplings)
    else:
        c = np.array(build_hamiltonian(spec).couplings)

    if model.coupling_sigma > 0:
        rows, cols = np.nonzero(np.triu(c, 1))
        s = model.coupling_sigma
        noisy, r = _perturb_positive(
            c[rows, cols], lambda x: x * (1.0 + s * coupling_rng.standard_normal(len(x)))
        )
        redrawn += r
        c[rows, cols] = noisy
        c[cols, rows] = noisy

    diag = np.zeros(n, dtype=complex)
    if model.detuning_sigma > 0:
        diag += model.detuning_sigma * detuning_rng.standard_normal(n)
    if model.loss_db_per_cm > 0:
        diag += -0.5j * db_per_cm_to_rate(model.loss_db_per_cm)
    return DisorderRealization(Hamiltonian(c, diag), int(seed), redrawn)


def sample_disordered_hamiltonian(
    spec: ChannelSpec, law: CouplingLaw, model: DisorderModel, seed: int
) -> Hamiltonian:
    return draw_realization(spec, law, model, seed).hamiltonian


def mirror_site(n_sites: int, input_site: int) -> int:
    return n_sites - input_site + 1


def transfer_fidelity(h: Hamiltonian, input_site: int, length_cm: float, renormalize: bool = True) -> float:
    """Intensity at the mirror site at z = L, optionally as a fraction of surviving power."""
    rec = propagate_spectral(h, input_site, [length_cm])
    inten = rec.intensities()[-1]
    f = inten[mirror_site(h.size, input_site) - 1]
    if renormalize:
        f = f / inten.sum()
    return float(min(max(f, 0.0), 1.0))


def _output_distributions(h: Hamiltonian, length_cm: float, renormalize: bool) -> np.ndarray:
    """Column k holds the output intensities at z = L for input at site k + 1."""
    inten = np.abs(propagator(h, length_cm)) ** 2
    if renormalize:
        inten = inten / inten.sum(axis=0)
    return inten


def transfer_fidelities(h: Hamiltonian, length_cm: float, renormalize: bool = True) -> np.ndarray:
    """Fidelity for every input site 1..N from one evolution matrix."""
    p = _output_distributions(h, length_cm, renormalize)
    k = np.arange(h.size)
    return np.clip(p[h.size - 1 - k, k], 0.0, 1.0)


def mirror_asymmetry(h: Hamiltonian, length_cm: float, renormalize: bool = True) -> np.ndarray:
    """Per input site k, total-variation distance between the output pattern of k
    and the mirror image of the output pattern of N - k + 1.

    Zero for every k when the lattice is mirror symmetric. The mirror fidelities
    themselves cannot serve as the detector: reciprocity of any symmetric H
    makes F(k) and F(N - k + 1) equal.
    """
    p = _output_distributions(h, length_cm, renormalize)
    mirrored = p[::-1, ::-1]
    return 0.5 * np.abs(p - mirrored).sum(axis=0)


@dataclass(frozen=True)
class TransferStats:
    input_site: int
    mean: float
    std: float  # population standard deviation over trials
    min: float
    max: float
    asymmetry_mean: float  # mean of mirror_asymmetry over trials

    @property
    def diffraction_loss_mean(self) -> float:
        return 1.0 - self.mean


@dataclass(frozen=True)
class TransferReport:
    rows: tuple[TransferStats, ...]
    trials: int
    seed: int
    resampled: int
    trial_seeds: tuple[int, ...]
    samples: np.ndarray | None = None  # (trials, len(rows)) when requested

    def row(self, input_site: int) -> TransferStats:
        for r in self.rows:
            if r.input_site == input_site:
                return r
        raise KeyError(input_site)


def _run_trial(spec, law, model, seed, renormalize):
    real = draw_realization(spec, law, model, seed)
    h, length = real.hamiltonian, spec.length_cm
    return (transfer_fidelities(h, length, renormalize),
            mirror_asymmetry(h, length, renormalize), real.resampled)


def monte_carlo_transfer(
    spec: ChannelSpec,
    law: CouplingLaw,
    model: DisorderModel,
    input_site: int | Sequence[int] | None,
    trials: int,
    seed: int,
    renormalize: bool = True,
    keep_samples: bool = False,
    workers: int | None = None,
) -> TransferReport:
    """Ensemble statistics of mirror-transfer fidelity.

    ``input_site`` may be a single site, several, or None for all sites. With
    ``workers`` the trials run on a thread pool; results are reduced in trial
    order, so the report does not depend on the worker count.
    """
    if int(trials) != trials or trials < 1:
        raise ValidationError("trials", f"must be a positive integer, got {trials}")
    n = spec.n_sites
    if input_site is None:
        sites = list(range(1, n + 1))
    elif isinstance(input_site, (int, np.integer)):
        sites = [int(input_site)]
    else:
        sites = [int(s) for s in input_site]
    for s in sites:
        if not 1 <= s <= n:
            raise ValidationError("input_site", f"must be in 1..{n}, got {s}")

    seeds = [trial_seed(seed, i) for i in range(trials)]
    job = lambda s: _run_trial(spec, law, model, s, renormalize)  # noqa: E731
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, seeds))
    else:
        results = [job(s) for s in seeds]

    all_f = np.array([r[0] for r in results])  # (trials, N)
    all_a = np.array([r[1] for r in results])
    resampled = sum(r[2] for r in results)
    idx = np.array(sites) - 1
    rows = []
    for j, site in enumerate(sites):
        f = all_f[:, idx[j]]
        rows.append(TransferStats(
            input_site=site,
            mean=float(f.mean()),
            std=float(f.std()),
            min=float(f.min()),
            max=float(f.max()),
            asymmetry_mean=float(all_a[:, idx[j]].mean()),
        ))
    samples = all_f[:, idx].copy() if keep_samples else None
    return TransferReport(tuple(rows), int(trials), int(seed), resampled, tuple(seeds), samples)


@dataclass(frozen=True)
class BaselineResult:
    name: str
    profile: Profile
    fidelities: np.ndarray  # lossless mirror-transfer fidelity per input site
    peak_transfer: float  # max over z in [0, L] of |psi_N|^2, input site 1
    peak_z: float
    central_return: float  # |psi_c(L)|^2 for input at the central site c


def peak_end_transfer(h: Hamiltonian, length_cm: float, samples: int = 4001) -> tuple[float, float]:
    """Maximum of |psi_N(z)|^2 over [0, L] for input at site 1, and where it occurs.

    A dense grid locates the best sample; bounded Brent refines it between the
    neighbouring samples.
    """
    n = h.size
    z = np.linspace(0.0, length_cm, samples)
    p = propagate_spectral(h, 1, z).intensities()[:, n - 1]
    i = int(np.argmax(p))
    lo, hi = z[max(i - 1, 0)], z[min(i + 1, samples - 1)]

    def neg(zz):
        return -propagate_spectral(h, 1, [zz]).intensities()[0, n - 1]

    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    best_z, best = (res.x, -res.fun) if -res.fun >= p[i] else (z[i], p[i])
    return float(best), float(best_z)


def central_site(n_sites: int) -> int:
    return (n_sites + 1) // 2


def baseline_comparison(
    n_sites: int, length_cm: float, configs: Mapping[str, Profile] | Iterable[Profile]
) -> dict[str, BaselineResult]:
    if not isinstance(configs, Mapping):
        configs = {type(p).__name__.lower(): p for p in configs}
    out = {}
    for name, profile in configs.items():
        spec = ChannelSpec(n_sites, length_cm, profile)
        h = build_hamiltonian(spec)
        fid = transfer_fidelities(h, length_cm, renormalize=False)
        peak, peak_z = peak_end_transfer(h, length_cm)
        c = central_site(n_sites)
        ret = float(propagate_spectral(h, c, [length_cm]).intensities()[0, c - 1])
        out[name] = BaselineResult(name, profile, fid, peak, peak_z, ret)
    return out


REPORT_HEADER = "input_site,mean_fidelity,std,min,max,diffraction_loss_mean"


def write_report(report: TransferReport, out: TextIO | str | Path) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            write_report(report, fh)
        return
    out.write(REPORT_HEADER + "\n")
    for r in report.rows:
        vals = (r.mean, r.std, r.min, r.max, r.diffraction_loss_mean)
        out.write(f"{r.input_site}," + ",".join(f"{v:.12g}" for v in vals) + "\n")


def write_samples(report: TransferReport, out: TextIO | str | Path) -> None:
    """One row per trial: index, derived seed, fidelity per reported input site."""
    if report.samples is None:
        raise ValueError("report was produced without keep_samples=True")
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            write_samples(report, fh)
        return
    out.write(",".join(["trial", "seed"] + [f"F_{r.input_site}" for r in report.rows]) + "\n")
    for i, (s, row) in enumerate(zip(report.trial_seeds, report.samples)):
        out.write(f"{i},{s}," + ",".join(f"{v:.12g}" for v in row) + "\n")


def format_report(report: TransferReport) -> str:
    buf = io.StringIO()
    write_report(report, buf)
    return buf.getvalue()
