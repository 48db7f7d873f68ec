"""Potential arrays, parameter restriction families, vector conversions.

A potential array assigns a log-scale weight theta[a, b, k] to observing
the value pair (a, b) at the k-th relative position of an interaction
structure.  theta[0, 0, k] == 0 for every slice (identifiability).

Restriction families tie entries together; the free parameters are the
distinct values.  Free-vector ordering is position-major (slices outer),
with the family's inner order:

  onepar   one shared value for all off-diagonal entries, every slice;
  oneeach  one value per slice (off-diagonal entries of that slice);
  absdif   per slice, one value per absolute difference d = 1..C;
  dif      per slice, one value per signed difference d = -C..-1, 1..C;
  free     per slice, every entry in row-major (a, b) order, skipping
           only the pinned (0, 0) entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interactions import InteractionStructure, read_positions

FAMILIES = ("onepar", "oneeach", "absdif", "dif", "free")

# absolute tolerance when validating externally supplied tensors; arrays
# built by expand_array satisfy their pattern exactly
PATTERN_TOL = 1e-12


def family_dim(family: str, n_positions: int, C: int) -> int:
    """Number of free parameters for a family at given |R| and C."""
    if family == "onepar":
        return 1
    if family == "oneeach":
        return n_positions
    if family == "absdif":
        return n_positions * C
    if family == "dif":
        return n_positions * 2 * C
    if family == "free":
        return n_positions * ((C + 1) ** 2 - 1)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def class_index(family: str, n_positions: int, C: int) -> np.ndarray:
    """Map each (a, b, k) entry to its free-parameter index, or -1 if the
    entry is pinned to zero.  This single map drives expansion,
    summarization and sufficient-statistic aggregation."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    n = C + 1
    cls = np.full((n, n, n_positions), -1, dtype=np.int64)
    a, b = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    for k in range(n_positions):
        if family == "onepar":
            cls[:, :, k] = np.where(a != b, 0, -1)
        elif family == "oneeach":
            cls[:, :, k] = np.where(a != b, k, -1)
        elif family == "absdif":
            d = np.abs(b - a)
            cls[:, :, k] = np.where(d > 0, k * C + d - 1, -1)
        elif family == "dif":
            d = b - a
            inner = np.where(d < 0, d + C, C + d - 1)
            cls[:, :, k] = np.where(d != 0, k * 2 * C + inner, -1)
        else:  # free
            inner = a * n + b - 1  # row-major, all entries after (0, 0)
            cls[:, :, k] = k * (n * n - 1) + inner
            cls[0, 0, k] = -1
    return cls


@dataclass(frozen=True)
class PotentialArray:
    """(C+1) x (C+1) x |R| tensor of potentials tied to a structure and a
    restriction family.  Use expand_array / validate_family to construct."""

    theta: np.ndarray
    structure: InteractionStructure
    C: int
    family: str

    def __post_init__(self):
        theta = np.ascontiguousarray(np.asarray(self.theta, dtype=np.float64))
        n = self.C + 1
        expected = (n, n, len(self.structure))
        if theta.shape != expected:
            raise ValueError(
                f"theta shape {theta.shape} does not match {expected}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def n_params(self) -> int:
        return family_dim(self.family, len(self.structure), self.C)


def expand_array(theta_vec, family: str, structure: InteractionStructure,
                 C: int) -> PotentialArray:
    """Free-parameter vector -> potential array obeying the family pattern.

    Exact inverse of summarize_array.
    """
    if C < 1:
        raise ValueError("C must be at least 1")
    vec = np.asarray(theta_vec, dtype=np.float64).ravel()
    dim = family_dim(family, len(structure), C)
    if vec.size != dim:
        raise ValueError(
            f"family {family!r} with |R|={len(structure)}, C={C} needs "
            f"{dim} parameters, got {vec.size}")
    cls = class_index(family, len(structure), C)
    theta = np.where(cls >= 0, vec[np.clip(cls, 0, None)], 0.0)
    return PotentialArray(theta, structure, C, family)


def summarize_array(pot: PotentialArray) -> np.ndarray:
    """Potential array -> free-parameter vector (inverse of expand_array).

    Raises if the array deviates from its family pattern by more than
    PATTERN_TOL.
    """
    cls = class_index(pot.family, len(pot.structure), pot.C)
    vec = _gather_classes(pot.theta, cls, pot.n_params)
    return vec


def _gather_classes(theta: np.ndarray, cls: np.ndarray, dim: int) -> np.ndarray:
    flat_cls = cls.ravel()
    flat_theta = theta.ravel()
    pinned = flat_theta[flat_cls < 0]
    if pinned.size and np.abs(pinned).max() > PATTERN_TOL:
        raise ValueError(
            "identifiability violated: pinned entries (including theta[0,0,:]) "
            "must be zero")
    vec = np.zeros(dim)
    filled = np.zeros(dim, dtype=bool)
    order = np.argsort(flat_cls, kind="stable")
    for idx in order:
        m = flat_cls[idx]
        if m < 0:
            continue
        if not filled[m]:
            vec[m] = flat_theta[idx]
            filled[m] = True
        elif abs(flat_theta[idx] - vec[m]) > PATTERN_TOL:
            raise ValueError(
                "array violates its restriction family: entries tied to one "
                f"free parameter differ (parameter {m})")
    if not filled.all():
        raise ValueError("family pattern leaves free parameters unconstrained")
    return vec


def validate_family(theta, family: str, structure: InteractionStructure,
                    C: int) -> PotentialArray:
    """Check a raw tensor against a family's pattern (tolerance 1e-12) and
    wrap it; raises ValueError on any violation."""
    pot = PotentialArray(np.asarray(theta, dtype=np.float64), structure, C, family)
    summarize_array(pot)  # raises on pattern violation
    return pot


# ---------------------------------------------------------------------------
# model-spec files: the canonical on-disk form of a (C, family, R, theta) set


def write_model_spec(pot: PotentialArray, sink) -> None:
    vec = summarize_array(pot)
    sink.write("# gridmrf model\n")
    sink.write(f"C {pot.C}\n")
    sink.write(f"family {pot.family}\n")
    sink.write(f"positions {len(pot.structure)}\n")
    for r1, r2 in pot.structure:
        sink.write(f"{r1} {r2}\n")
    sink.write(f"values {vec.size}\n")
    for v in vec:
        sink.write(f"{float(v)!r}\n")


def read_model_spec(source) -> PotentialArray:
    import io
    if isinstance(source, str):
        source = io.StringIO(source)
    lines = [ln.strip() for ln in source
             if ln.strip() and not ln.strip().startswith("#")]
    idx = 0

    def expect(key: str) -> str:
        nonlocal idx
        if idx >= len(lines) or not lines[idx].startswith(key + " "):
            raise ValueError(f"model spec: expected '{key} ...' line")
        val = lines[idx][len(key) + 1:]
        idx += 1
        return val

    c = int(expect("C"))
    family = expect("family")
    n_pos = int(expect("positions"))
    positions = []
    for _ in range(n_pos):
        toks = lines[idx].split()
        positions.append((int(toks[0]), int(toks[1])))
        idx += 1
    structure = InteractionStructure(tuple(positions))
    n_vals = int(expect("values"))
    vals = [float(lines[idx + i]) for i in range(n_vals)]
    return expand_array(np.array(vals), family, structure, c)
