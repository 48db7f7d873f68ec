"""Discrete and continuous 2-D lattice fields with masked support.

A field is a rectangular grid where some pixels may be excluded from the
lattice (mask false).  Pixel (i1, i2) means row i1 (top to bottom), column
i2 (left to right); the Python API uses 0-based indices.  A relative
position r = (r1, r2) is added component-wise: the neighbor of (i1, i2) is
(i1 + r1, i2 + r2).

On-disk formats:
  * text grid: whitespace-separated integer labels, "NA" for masked pixels,
    optional "#C=<n>" header line to force the number of colors;
  * PGM (P2 ascii / P5 binary) for discrete fields, pixel value = label;
  * CSV of floats ("NA" for masked) for real-valued fields.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np


class FieldFormatError(ValueError):
    """Raised when a field file or stream cannot be parsed."""


@dataclass(frozen=True)
class DiscreteField:
    """Grid of integer labels in {0..C} with a boolean support mask.

    Masked pixels (mask False) do not belong to the lattice; their label
    entry is normalized to 0 and carries no meaning.
    """

    labels: np.ndarray  # (N, M) int64
    mask: np.ndarray    # (N, M) bool, True = pixel belongs to the lattice
    C: int

    def __post_init__(self):
        labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
        mask = np.ascontiguousarray(np.asarray(self.mask, dtype=bool))
        if labels.ndim != 2 or labels.shape[0] < 1 or labels.shape[1] < 1:
            raise ValueError("labels must be a non-empty 2-D grid")
        if mask.shape != labels.shape:
            raise ValueError("mask dimensions must match labels")
        if not mask.any():
            raise ValueError("field has no unmasked pixel")
        vals = labels[mask]
        if vals.min() < 0:
            raise ValueError("negative labels are not allowed")
        if self.C < 0:
            raise ValueError("C must be non-negative")
        if vals.max() > self.C:
            raise ValueError(
                f"label {int(vals.max())} exceeds C={self.C}")
        labels = np.where(mask, labels, 0)
        labels.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "mask", mask)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def n_sites(self) -> int:
        """Number of pixels in the lattice (unmasked)."""
        return int(self.mask.sum())

    def color_counts(self) -> np.ndarray:
        """Count of each label 0..C over unmasked pixels."""
        return np.bincount(self.labels[self.mask], minlength=self.C + 1)

    @staticmethod
    def from_labels(labels, C: int | None = None) -> "DiscreteField":
        """Build a fully-unmasked field; C defaults to the max label."""
        labels = np.asarray(labels, dtype=np.int64)
        if C is None:
            C = int(labels.max()) if labels.size else 0
        return DiscreteField(labels, np.ones(labels.shape, dtype=bool), C)


@dataclass(frozen=True)
class RealField:
    """Grid of real pixel intensities with the same mask semantics."""

    values: np.ndarray  # (N, M) float64; NaN under the mask
    mask: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        mask = np.ascontiguousarray(np.asarray(self.mask, dtype=bool))
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("values must be a non-empty 2-D grid")
        if mask.shape != values.shape:
            raise ValueError("mask dimensions must match values")
        if not mask.any():
            raise ValueError("field has no unmasked pixel")
        if not np.isfinite(values[mask]).all():
            raise ValueError("unmasked values must be finite")
        values = np.where(mask, values, np.nan)
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def n_sites(self) -> int:
        return int(self.mask.sum())

    @staticmethod
    def from_values(values) -> "RealField":
        values = np.asarray(values, dtype=np.float64)
        return RealField(values, np.isfinite(values))


@dataclass(frozen=True)
class PixelRegion:
    """Boolean companion grid selecting a pixel subset of a field."""

    flags: np.ndarray

    def __post_init__(self):
        flags = np.ascontiguousarray(np.asarray(self.flags, dtype=bool))
        if flags.ndim != 2:
            raise ValueError("region must be a 2-D boolean grid")
        flags.setflags(write=False)
        object.__setattr__(self, "flags", flags)

    def matches(self, shape: tuple[int, int]) -> bool:
        return self.flags.shape == shape


# ---------------------------------------------------------------------------
# text grid format


def read_discrete_field(source) -> DiscreteField:
    """Parse a discrete field from a text stream or string.

    Rows of whitespace-separated tokens; each token is a non-negative
    integer label or "NA" (masked pixel).  A "#C=<n>" line forces the
    number of colors; otherwise C is the maximum observed label.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    forced_c = None
    rows: list[list[str]] = []
    for lineno, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            directive = stripped[1:].replace(" ", "")
            if directive.upper().startswith("C="):
                try:
                    forced_c = int(directive[2:])
                except ValueError:
                    raise FieldFormatError(
                        f"line {lineno}: bad header directive {stripped!r}")
            continue
        rows.append(stripped.split())
    if not rows:
        raise FieldFormatError("empty input")
    width = len(rows[0])
    labels = np.zeros((len(rows), width), dtype=np.int64)
    mask = np.ones((len(rows), width), dtype=bool)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise FieldFormatError(
                f"ragged rows: row {i + 1} has {len(row)} tokens, expected {width}")
        for j, tok in enumerate(row):
            if tok.upper() == "NA":
                mask[i, j] = False
                continue
            try:
                val = int(tok)
            except ValueError:
                raise FieldFormatError(f"bad token {tok!r} at row {i + 1}")
            if val < 0:
                raise FieldFormatError(f"negative label at row {i + 1}")
            labels[i, j] = val
    if not mask.any():
        raise FieldFormatError("field has no unmasked pixel")
    c = int(labels[mask].max()) if forced_c is None else forced_c
    return DiscreteField(labels, mask, c)


def write_discrete_field(field: DiscreteField, sink, header_c: bool = False) -> None:
    """Write a field in the text grid format; round-trips with
    read_discrete_field bit-exactly (labels, mask, dimensions, C when
    ``header_c`` is set or C exceeds the max observed label)."""
    unmasked_max = int(field.labels[field.mask].max())
    if header_c or field.C != unmasked_max:
        sink.write(f"#C={field.C}\n")
    for i in range(field.height):
        toks = [
            str(int(field.labels[i, j])) if field.mask[i, j] else "NA"
            for j in range(field.width)
        ]
        sink.write(" ".join(toks) + "\n")


def read_region(source) -> PixelRegion:
    """Parse a 0/1 text grid into a PixelRegion (1 = selected)."""
    field = read_discrete_field(source)
    if not field.mask.all():
        raise FieldFormatError("region grids cannot contain NA")
    if field.C > 1:
        raise FieldFormatError("region grids must contain only 0 and 1")
    return PixelRegion(field.labels.astype(bool))


def write_region(region: PixelRegion, sink) -> None:
    for i in range(region.flags.shape[0]):
        sink.write(" ".join("1" if v else "0" for v in region.flags[i]) + "\n")


# ---------------------------------------------------------------------------
# PGM (P2 ascii, P5 binary), pixel value = label


def read_pgm(data: bytes) -> DiscreteField:
    """Parse PGM bytes (P2 or P5) into a fully-unmasked discrete field."""
    if len(data) < 2 or data[:2] not in (b"P2", b"P5"):
        raise FieldFormatError("not a P2/P5 PGM file")
    binary = data[:2] == b"P5"

    # header tokens: magic, width, height, maxval (comments start with '#')
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FieldFormatError("truncated PGM header")
        tokens.append(int(data[start:pos]))
    width, height, maxval = tokens
    if width < 1 or height < 1 or maxval < 1:
        raise FieldFormatError("bad PGM dimensions")

    if binary:
        pos += 1  # single whitespace after maxval
        itemsize = 1 if maxval < 256 else 2
        need = width * height * itemsize
        raw = data[pos:pos + need]
        if len(raw) != need:
            raise FieldFormatError("truncated PGM pixel data")
        dtype = np.uint8 if itemsize == 1 else ">u2"
        labels = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    else:
        body = data[pos:].decode("ascii", errors="strict")
        vals = [int(t) for t in body.split()]
        if len(vals) != width * height:
            raise FieldFormatError("PGM pixel count mismatch")
        labels = np.array(vals, dtype=np.int64)
    labels = labels.reshape(height, width)
    return DiscreteField(labels, np.ones_like(labels, dtype=bool), maxval)


def write_pgm(field: DiscreteField, path: str) -> None:
    """Write a discrete field as ascii PGM (P2); masked pixels are not
    representable in PGM and raise."""
    if not field.mask.all():
        raise FieldFormatError("PGM cannot represent masked pixels")
    maxval = max(field.C, 1)
    lines = [f"P2\n{field.width} {field.height}\n{maxval}\n"]
    for i in range(field.height):
        lines.append(" ".join(str(int(v)) for v in field.labels[i]) + "\n")
    with open(path, "w") as fh:
        fh.writelines(lines)


# ---------------------------------------------------------------------------
# CSV of floats for RealField


def read_real_csv(source) -> RealField:
    """Parse comma-separated floats with "NA" for masked pixels."""
    if isinstance(source, str):
        source = io.StringIO(source)
    rows = []
    for line in source:
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rows.append([t.strip() for t in stripped.split(",")])
    if not rows:
        raise FieldFormatError("empty input")
    width = len(rows[0])
    values = np.full((len(rows), width), np.nan)
    mask = np.ones((len(rows), width), dtype=bool)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise FieldFormatError(f"ragged rows at row {i + 1}")
        for j, tok in enumerate(row):
            if tok.upper() == "NA" or tok == "":
                mask[i, j] = False
            else:
                try:
                    values[i, j] = float(tok)
                except ValueError:
                    raise FieldFormatError(f"bad number {tok!r} at row {i + 1}")
    if not mask.any():
        raise FieldFormatError("field has no unmasked pixel")
    return RealField(values, mask)


def write_real_csv(field: RealField, sink) -> None:
    """Write floats with full round-trip precision (repr)."""
    for i in range(field.height):
        toks = [
            repr(float(field.values[i, j])) if field.mask[i, j] else "NA"
            for j in range(field.width)
        ]
        sink.write(",".join(toks) + "\n")
