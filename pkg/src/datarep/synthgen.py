"""Synthetic dataset pairs with controllable, analytically known
dissimilarity.

Two families:

* Gaussian pairs: unit-covariance clouds whose means are ``shift`` apart
  along the first axis.  The optimal domain-classification error is
  Phi(-shift / 2), which makes these pairs exact oracles for the pipeline.
* Phantom pairs: piecewise-constant images of three concentric, equal-area
  tissue classes inside a circular foreground, with per-pixel ground-truth
  labels.  The unseen domain runs the clean image through a gain/contrast
  transform before noise, mimicking acquisition differences between
  instruments: x -> clamp((gain * x) ** gamma) + noise.

Everything is generated from explicit seeds; identical spec gives
identical data.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Dataset, DomainTag
from .exceptions import InvalidConfig
from .ingest import GrayImage, save_csv, save_labels_pgm, save_pgm


@dataclass(frozen=True)
class GaussianPairSpec:
    """Two unit-covariance Gaussian clouds ``shift`` apart along axis 0."""

    dim: int = 2
    shift: float = 0.0
    n_per_domain: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidConfig(f"dim must be positive, got {self.dim}")
        if self.shift < 0.0:
            raise InvalidConfig(f"shift must be non-negative, got {self.shift}")
        if self.n_per_domain < 2:
            raise InvalidConfig(
                f"n_per_domain must be at least 2, got {self.n_per_domain}"
            )


@dataclass(frozen=True)
class AcquisitionTransform:
    """Intensity distortion applied to the unseen domain's clean images."""

    gain: float = 1.0
    gamma: float = 1.0
    noise_sigma: float = 0.05

    def __post_init__(self):
        if self.gain <= 0.0 or self.gamma <= 0.0 or self.noise_sigma < 0.0:
            raise InvalidConfig(
                f"need gain > 0, gamma > 0, noise_sigma >= 0; got {self}"
            )


@dataclass(frozen=True)
class PhantomPairSpec:
    """Concentric three-class phantoms under two acquisition regimes.

    The training domain adds ``base_noise_sigma`` Gaussian noise to the
    clean phantom; the unseen domain applies ``transform`` (gain, then
    contrast exponent, then clamping to [0, 1], then its own noise).  The
    identity transform with matching noise makes the domains statistically
    identical.
    """

    image_size: int = 64
    n_images_per_domain: int = 5
    tissue_means: tuple[float, float, float] = (0.3, 0.5, 0.7)
    transform: AcquisitionTransform = AcquisitionTransform()
    base_noise_sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.image_size < 8:
            raise InvalidConfig(f"image_size must be at least 8, got {self.image_size}")
        if self.n_images_per_domain < 1:
            raise InvalidConfig("n_images_per_domain must be positive")
        if len(self.tissue_means) != 3:
            raise InvalidConfig("exactly three tissue means are required")
        if any(not 0.0 <= m <= 1.0 for m in self.tissue_means):
            raise InvalidConfig("tissue means must lie in [0, 1]")
        if self.base_noise_sigma < 0.0:
            raise InvalidConfig("base_noise_sigma must be non-negative")


def gen_gaussian_pair(spec: GaussianPairSpec) -> tuple[Dataset, Dataset]:
    """Training cloud at the origin, unseen cloud at (shift, 0, ..., 0)."""
    rng = np.random.default_rng(spec.seed)
    x_t = rng.standard_normal((spec.n_per_domain, spec.dim))
    x_u = rng.standard_normal((spec.n_per_domain, spec.dim))
    x_u[:, 0] += spec.shift
    return (
        Dataset(x_t, DomainTag.TRAINING),
        Dataset(x_u, DomainTag.UNSEEN),
    )


def phantom_layout(size: int) -> tuple[np.ndarray, np.ndarray]:
    """Class labels (-1 = background) and foreground mask for the phantom.

    Three concentric regions of equal area inside a circle of radius
    0.45 * size: class 2 innermost, class 0 the outer ring.
    """
    c = (size - 1) / 2.0
    yy, xx = np.ogrid[:size, :size]
    dist2 = (yy - c) ** 2 + (xx - c) ** 2
    radius = 0.45 * size
    mask = dist2 <= radius**2
    inner = radius * np.sqrt(1.0 / 3.0)
    middle = radius * np.sqrt(2.0 / 3.0)
    labels = np.full((size, size), -1, dtype=np.int64)
    labels[mask] = 0
    labels[dist2 <= middle**2] = 1
    labels[dist2 <= inner**2] = 2
    return labels, mask


def _clean_phantom(labels: np.ndarray, tissue_means) -> np.ndarray:
    clean = np.zeros(labels.shape, dtype=np.float64)
    for cls, mean in enumerate(tissue_means):
        clean[labels == cls] = mean
    return clean


def gen_phantom_pair(spec: PhantomPairSpec) -> tuple[list[GrayImage], list[GrayImage]]:
    """Generate the two image lists with masks and per-pixel labels.

    Image i (indexed across the pair: training first, unseen after) draws
    its noise from seed (spec.seed, i), so images and domains are
    independent and each image can be regenerated in isolation.
    """
    labels, mask = phantom_layout(spec.image_size)
    clean = _clean_phantom(labels, spec.tissue_means)
    tf = spec.transform
    distorted = np.clip(
        np.power(np.clip(tf.gain * clean, 0.0, None), tf.gamma), 0.0, 1.0
    )

    def make(base: np.ndarray, sigma: float, index: int, name: str) -> GrayImage:
        rng = np.random.default_rng([spec.seed, index])
        noisy = base + sigma * rng.standard_normal(base.shape)
        return GrayImage(
            pixels=np.clip(noisy, 0.0, 1.0),
            mask=mask,
            labels=labels,
            name=name,
        )

    n = spec.n_images_per_domain
    training = [make(clean, spec.base_noise_sigma, i, f"t{i:03d}") for i in range(n)]
    unseen = [
        make(distorted, tf.noise_sigma, n + i, f"u{i:03d}") for i in range(n)
    ]
    return training, unseen


# ---------------------------------------------------------------------------
# Writers (round-trip through the standard loaders)
# ---------------------------------------------------------------------------


def write_gaussian_pair(spec: GaussianPairSpec, outdir) -> tuple[Path, Path]:
    """Write training.csv / unseen.csv; returns the two paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    training, unseen = gen_gaussian_pair(spec)
    tp = outdir / "training.csv"
    up = outdir / "unseen.csv"
    save_csv(training, tp)
    save_csv(unseen, up)
    return tp, up


def write_phantom_pair(spec: PhantomPairSpec, outdir) -> tuple[Path, Path]:
    """Write training/ and unseen/ image directories with mask and label
    siblings; returns the two directory paths."""
    outdir = Path(outdir)
    tdir = outdir / "training"
    udir = outdir / "unseen"
    training, unseen = gen_phantom_pair(spec)
    for directory, images in ((tdir, training), (udir, unseen)):
        directory.mkdir(parents=True, exist_ok=True)
        for img in images:
            base = directory / f"{img.name}.pgm"
            save_pgm(img.pixels, base)
            save_pgm(img.mask.astype(float), base.with_suffix(".mask.pgm"), maxval=255)
            save_labels_pgm(img.labels, base.with_suffix(".labels.pgm"))
    return tdir, udir
