"""Loaders and patch extraction: CSV tables, P2/P5 portable graymaps,
sliding-window patches with foreground filtering.

Formats:

* CSV: comma separated, UTF-8, '.' decimal separator, optional single
  header row, optional "group" column naming the source of each row.
* PGM: P2 (ASCII) or P5 (binary) per the Netpbm convention, maxval up to
  65535 (two-byte big-endian samples in P5).  Intensities are scaled to
  [0, 1] by the declared maxval.  A sibling file "<name>.mask.pgm" is
  treated as a foreground mask (intensity > 0 = foreground) and
  "<name>.labels.pgm" as per-pixel class labels (value 0 = background,
  k+1 = class k).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Dataset, DomainTag
from .exceptions import (
    EmptyFile,
    ImageTooSmall,
    InvalidConfig,
    NoForegroundPixels,
    ParseError,
    TruncatedFile,
    UnsupportedFormat,
)


@dataclass(frozen=True)
class GrayImage:
    """A grayscale image with optional foreground mask and class labels.

    ``pixels`` is (height, width) row-major with non-negative intensities;
    ``mask`` (same shape, True = foreground) and ``labels`` (same shape,
    -1 = background) are optional.  ``name`` is a provenance label used as
    the group id of patches extracted from this image.
    """

    pixels: np.ndarray
    mask: np.ndarray | None = None
    labels: np.ndarray | None = None
    name: str | None = None

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise InvalidConfig(f"pixels must be a non-empty 2-D grid, got {px.shape}")
        if np.any(~np.isfinite(px)) or px.min() < 0.0:
            raise InvalidConfig("pixel intensities must be finite and non-negative")
        px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)
        if self.mask is not None:
            m = np.asarray(self.mask, dtype=bool).copy()
            if m.shape != px.shape:
                raise InvalidConfig(f"mask shape {m.shape} != image shape {px.shape}")
            m.flags.writeable = False
            object.__setattr__(self, "mask", m)
        if self.labels is not None:
            lb = np.asarray(self.labels, dtype=np.int64).copy()
            if lb.shape != px.shape:
                raise InvalidConfig(f"labels shape {lb.shape} != image shape {px.shape}")
            lb.flags.writeable = False
            object.__setattr__(self, "labels", lb)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class PatchSpec:
    """How patches are taken from an image.

    ``size`` must be odd so each patch has a center pixel.  With
    ``max_patches`` unset, every valid position is used; otherwise up to
    that many positions are drawn without replacement (deterministically
    from ``seed``), always a subset of the all-positions output.
    """

    size: int = 15
    max_patches: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.size < 1 or self.size % 2 == 0:
            raise InvalidConfig(f"patch size must be odd and positive, got {self.size}")
        if self.max_patches is not None and self.max_patches < 1:
            raise InvalidConfig(f"max_patches must be positive, got {self.max_patches}")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _parse_cell(text: str, row: int, col: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(
            f"row {row}, column {col + 1}: could not parse {text!r} as a number"
        ) from None


def load_csv(path, domain: DomainTag = DomainTag.TRAINING) -> Dataset:
    """Load a numeric CSV as a dataset; a "group" column becomes group ids.

    Row/column positions in errors are 1-based file coordinates.
    """
    path = Path(path)
    rows = [r for r in csv.reader(io.StringIO(path.read_text(encoding="utf-8")))]
    rows = [(i, r) for i, r in enumerate(rows, start=1) if any(c.strip() for c in r)]
    if not rows:
        raise EmptyFile(f"{path} contains no data")

    header = [c.strip() for c in rows[0][1]]
    group_col = None
    has_header = any(not _is_float(c) for c in header)
    if has_header:
        for j, cell in enumerate(header):
            if cell.lower() == "group":
                group_col = j
    data_rows = rows[1:] if has_header else rows
    if not data_rows:
        raise EmptyFile(f"{path} has a header but no data rows")

    width = len(data_rows[0][1])
    if has_header and len(header) != width:
        raise ParseError(
            f"row {rows[0][0]}: header has {len(header)} cells, "
            f"data rows have {width}"
        )
    features = []
    groups: list[str] = []
    for line_no, cells in data_rows:
        if len(cells) != width:
            raise ParseError(
                f"row {line_no}: expected {width} cells, got {len(cells)}"
            )
        vals = []
        for j, cell in enumerate(cells):
            if group_col is not None and j == group_col:
                groups.append(cell.strip())
            else:
                vals.append(_parse_cell(cell.strip(), line_no, j))
        features.append(vals)
    return Dataset(
        np.asarray(features, dtype=np.float64),
        domain,
        tuple(groups) if group_col is not None else None,
    )


def _is_float(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset as CSV; group ids (if any) go to a "group" column."""
    path = Path(path)
    with_groups = dataset.group_ids is not None
    lines = []
    header = [f"f{j + 1}" for j in range(dataset.n_features)]
    if with_groups:
        header.append("group")
    lines.append(",".join(header))
    for i in range(dataset.n_samples):
        cells = [repr(float(v)) for v in dataset.features[i]]
        if with_groups:
            cells.append(dataset.group_ids[i])
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# PGM
# ---------------------------------------------------------------------------


def _pgm_tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping '#' comments."""
    i = 0
    n = len(data)
    while i < n:
        c = data[i : i + 1]
        if c in b" \t\r\n":
            i += 1
        elif c == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < n and data[j : j + 1] not in b" \t\r\n#":
                j += 1
            yield data[i:j], j
            i = j


def load_pgm(path) -> GrayImage:
    """Load a P2/P5 graymap, scaling intensities to [0, 1] by the maxval."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 2:
        raise TruncatedFile(f"{path}: file too short for a PGM header")
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise UnsupportedFormat(
            f"{path}: expected magic P2 or P5, got {magic!r}"
        )

    tokens = _pgm_tokens(data[2:])
    header: list[int] = []
    end = 0
    try:
        while len(header) < 3:
            tok, end = next(tokens)
            header.append(int(tok))
    except StopIteration:
        raise TruncatedFile(f"{path}: incomplete PGM header") from None
    except ValueError:
        raise UnsupportedFormat(f"{path}: non-numeric PGM header") from None
    width, height, maxval = header
    if width < 1 or height < 1 or not (0 < maxval < 65536):
        raise UnsupportedFormat(
            f"{path}: invalid dimensions or maxval {width}x{height}, {maxval}"
        )

    count = width * height
    if magic == b"P2":
        raw = np.empty(count, dtype=np.float64)
        got = 0
        try:
            while got < count:
                tok, _ = next(tokens)
                raw[got] = int(tok)
                got += 1
        except StopIteration:
            raise TruncatedFile(
                f"{path}: expected {count} pixel values, found {got}"
            ) from None
        except ValueError:
            raise UnsupportedFormat(f"{path}: non-numeric pixel value") from None
    else:
        start = 2 + end + 1  # single whitespace byte after maxval
        wide = maxval > 255
        need = count * (2 if wide else 1)
        body = data[start : start + need]
        if len(body) < need:
            raise TruncatedFile(
                f"{path}: expected {need} raster bytes, found {len(body)}"
            )
        dtype = ">u2" if wide else np.uint8
        raw = np.frombuffer(body, dtype=dtype).astype(np.float64)

    pixels = (raw / float(maxval)).reshape(height, width)
    return GrayImage(pixels=np.clip(pixels, 0.0, None), name=path.stem)


def save_pgm(pixels, path, maxval: int = 65535) -> None:
    """Write intensities in [0, 1] as a binary (P5) graymap."""
    path = Path(path)
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidConfig(f"expected a 2-D grid, got shape {arr.shape}")
    if not 0 < maxval < 65536:
        raise InvalidConfig(f"maxval must lie in [1, 65535], got {maxval}")
    q = np.rint(np.clip(arr, 0.0, 1.0) * maxval)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode("ascii")
    dtype = ">u2" if maxval > 255 else np.uint8
    path.write_bytes(header + q.astype(dtype).tobytes())


def save_labels_pgm(labels, path) -> None:
    """Write per-pixel class labels as a graymap: 0 = background, k+1 = class k."""
    lb = np.asarray(labels, dtype=np.int64)
    if lb.min() < -1 or lb.max() > 254:
        raise InvalidConfig("labels must lie in [-1, 254]")
    save_pgm((lb + 1) / 255.0, path, maxval=255)


def mask_path_for(image_path) -> Path:
    return Path(image_path).with_suffix(".mask.pgm")


def labels_path_for(image_path) -> Path:
    return Path(image_path).with_suffix(".labels.pgm")


def load_image(path) -> GrayImage:
    """Load a graymap together with its sibling mask/labels files, if any."""
    path = Path(path)
    img = load_pgm(path)
    mask = None
    labels = None
    mp = mask_path_for(path)
    if mp.exists():
        mask = load_pgm(mp).pixels > 0.0
    lp = labels_path_for(path)
    if lp.exists():
        lraw = load_pgm(lp)
        # stored as (class + 1) / maxval; 0 = background
        labels = np.rint(lraw.pixels * 255.0).astype(np.int64) - 1
    return GrayImage(pixels=img.pixels, mask=mask, labels=labels, name=path.stem)


def load_image_dir(path) -> list[GrayImage]:
    """Load all plain .pgm images of a directory (masks/labels attached)."""
    path = Path(path)
    files = sorted(
        p
        for p in path.glob("*.pgm")
        if not p.name.endswith(".mask.pgm") and not p.name.endswith(".labels.pgm")
    )
    if not files:
        raise EmptyFile(f"no .pgm images in {path}")
    return [load_image(p) for p in files]


# ---------------------------------------------------------------------------
# Patch extraction
# ---------------------------------------------------------------------------


def standardize_foreground(image: GrayImage) -> np.ndarray:
    """Intensities shifted/scaled so foreground pixels have mean 0 and
    variance 1; with no mask every pixel counts as foreground."""
    fg = image.mask if image.mask is not None else np.ones_like(image.pixels, bool)
    if not fg.any():
        raise NoForegroundPixels(f"image {image.name or ''} has an empty mask")
    vals = image.pixels[fg]
    mu = float(vals.mean())
    sd = float(vals.std())
    if sd < 1e-15:
        sd = 1.0
    return (image.pixels - mu) / sd


def foreground_centers(image: GrayImage, size: int) -> np.ndarray:
    """(row, col) positions whose centered size x size patch fits and whose
    center pixel is foreground, in row-major order."""
    r = size // 2
    h, w = image.pixels.shape
    if h < size or w < size:
        raise ImageTooSmall(f"image {h}x{w} smaller than patch size {size}")
    fg = image.mask if image.mask is not None else np.ones((h, w), bool)
    inner = np.zeros((h, w), bool)
    inner[r : h - r, r : w - r] = True
    return np.argwhere(fg & inner)


def extract_patches(
    image: GrayImage,
    spec: PatchSpec = PatchSpec(),
    domain: DomainTag = DomainTag.TRAINING,
    group_id: str | None = None,
) -> Dataset:
    """Flatten foreground-centered patches into a feature matrix.

    The image is standardized over its foreground first; a patch is kept
    only when its center pixel is foreground.  Sampling with
    ``spec.max_patches`` draws min(max_patches, available) positions
    without replacement.
    """
    std_pixels = standardize_foreground(image)
    centers = foreground_centers(image, spec.size)
    if centers.shape[0] == 0:
        raise NoForegroundPixels(
            f"image {image.name or ''} has no foreground patch centers"
        )
    if spec.max_patches is not None and spec.max_patches < centers.shape[0]:
        rng = np.random.default_rng(spec.seed)
        keep = np.sort(rng.choice(centers.shape[0], spec.max_patches, replace=False))
        centers = centers[keep]

    r = spec.size // 2
    windows = np.lib.stride_tricks.sliding_window_view(std_pixels, (spec.size, spec.size))
    feats = windows[centers[:, 0] - r, centers[:, 1] - r].reshape(centers.shape[0], -1)
    gid = group_id if group_id is not None else image.name
    groups = (gid,) * centers.shape[0] if gid is not None else None
    return Dataset(feats, domain, groups)


def patch_center_labels(image: GrayImage, spec: PatchSpec = PatchSpec()) -> np.ndarray:
    """Class label of each retained patch center, aligned with
    ``extract_patches`` output (requires ``image.labels``)."""
    if image.labels is None:
        raise InvalidConfig("image carries no labels")
    centers = foreground_centers(image, spec.size)
    if spec.max_patches is not None and spec.max_patches < centers.shape[0]:
        rng = np.random.default_rng(spec.seed)
        keep = np.sort(rng.choice(centers.shape[0], spec.max_patches, replace=False))
        centers = centers[keep]
    return image.labels[centers[:, 0], centers[:, 1]]


def images_to_dataset(
    images: list[GrayImage],
    spec: PatchSpec = PatchSpec(),
    domain: DomainTag = DomainTag.TRAINING,
) -> Dataset:
    """Pool patches of several images; each image is one group.

    With random sampling, image i draws from seed ``spec.seed + i`` so
    images are sampled independently but reproducibly.
    """
    feats = []
    groups = []
    for i, img in enumerate(images):
        per_image = PatchSpec(spec.size, spec.max_patches, spec.seed + i)
        gid = img.name if img.name is not None else f"img{i:03d}"
        ds = extract_patches(img, per_image, domain, gid)
        feats.append(ds.features)
        groups.extend(ds.group_ids)
    return Dataset(np.vstack(feats), domain, tuple(groups))
