"""Interaction structures: the set of relative positions that interact.

A structure is an ordered list of integer offsets (r1, r2), never
containing (0, 0), with no duplicates and no pair of mutual reflections
(r and -r describe the same interaction, so only one representative is
kept).  Positions generated from a norm ball use the canonical
representative with r1 > 0, or r1 == 0 and r2 > 0; explicitly supplied
positions keep the sign the caller wrote.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

NORM_TYPES = ("L1", "L2", "Linf")

Position = tuple[int, int]


def _norm_value(pos: Position, norm_type: str) -> float:
    r1, r2 = pos
    if norm_type == "L1":
        return abs(r1) + abs(r2)
    if norm_type == "L2":
        return math.hypot(r1, r2)
    if norm_type == "Linf":
        return max(abs(r1), abs(r2))
    raise ValueError(f"unknown norm type {norm_type!r}")


def _in_ball(pos: Position, norm_type: str, max_norm: float) -> bool:
    r1, r2 = pos
    if norm_type == "L1":
        return abs(r1) + abs(r2) <= max_norm
    if norm_type == "Linf":
        return max(abs(r1), abs(r2)) <= max_norm
    # L2: exact arithmetic on r1^2 + r2^2 <= max_norm^2, avoiding float
    # boundary misclassification for radii like sqrt(2)
    if float(max_norm).is_integer():
        bound = Fraction(int(max_norm)) ** 2
    else:
        bound = Fraction(max_norm) ** 2
    return Fraction(r1 * r1 + r2 * r2) <= bound


def _canonical(pos: Position) -> Position:
    r1, r2 = pos
    if r1 > 0 or (r1 == 0 and r2 > 0):
        return pos
    return (-r1, -r2)


@dataclass(frozen=True)
class InteractionStructure:
    """Ordered, reflection-free set of interacting relative positions."""

    positions: tuple[Position, ...]

    def __post_init__(self):
        positions = tuple((int(r1), int(r2)) for r1, r2 in self.positions)
        seen: set[Position] = set()
        for p in positions:
            if p == (0, 0):
                raise ValueError("(0, 0) cannot be an interacting position")
            if p in seen:
                raise ValueError(f"duplicate position {p}")
            if (-p[0], -p[1]) in seen:
                raise ValueError(
                    f"position {p} is a reflection of another position")
            seen.add(p)
        object.__setattr__(self, "positions", positions)

    def __len__(self) -> int:
        return len(self.positions)

    def __iter__(self):
        return iter(self.positions)

    def __str__(self) -> str:
        return " ".join(f"({r1},{r2})" for r1, r2 in self.positions)

    def equivalent(self, other: "InteractionStructure") -> bool:
        """Set equality up to reflection (r ~ -r); ignores order."""
        a = {_canonical(p) for p in self.positions}
        b = {_canonical(p) for p in other.positions}
        return a == b

    def union(self, other) -> "InteractionStructure":
        return union(self, other)

    def difference(self, other) -> "InteractionStructure":
        return difference(self, other)

    def subset(self, indices) -> "InteractionStructure":
        return subset(self, indices)

    def __add__(self, other):
        return union(self, other)

    def __sub__(self, other):
        return difference(self, other)

    def max_row_span(self) -> int:
        return max(abs(r1) for r1, _ in self.positions)


def build_structure(max_norm: float = 1.0, norm_type: str = "L1",
                    extra_positions=()) -> InteractionStructure:
    """Build a structure from a norm ball plus explicit extra positions.

    Norm-ball positions keep one representative per (r, -r) pair, ordered
    lexicographically by (norm, r1, r2).  Extra positions are appended in
    the given order and win over a reflection-conflicting norm position
    (the redundant norm-derived representative is dropped).
    """
    if norm_type not in NORM_TYPES:
        raise ValueError(f"norm_type must be one of {NORM_TYPES}")
    if max_norm < 0:
        raise ValueError("max_norm must be non-negative")

    limit = int(math.floor(max_norm)) if norm_type != "L2" else int(math.floor(max_norm))
    ball: list[Position] = []
    for r1 in range(0, limit + 1):
        lo = 1 if r1 == 0 else -limit
        for r2 in range(lo, limit + 1):
            pos = (r1, r2)
            if pos == (0, 0):
                continue
            if _in_ball(pos, norm_type, max_norm):
                ball.append(pos)
    ball.sort(key=lambda p: (_norm_value(p, norm_type), p[0], p[1]))

    result: list[Position] = list(ball)
    seen_extra: set[Position] = set()
    for raw in extra_positions:
        p = (int(raw[0]), int(raw[1]))
        if p == (0, 0):
            raise ValueError("(0, 0) cannot be an interacting position")
        neg = (-p[0], -p[1])
        if p in seen_extra:
            continue  # repeated extra: harmless, keep first
        if neg in seen_extra:
            raise ValueError(
                f"extra positions {neg} and {p} are reflections of each other")
        seen_extra.add(p)
        # explicit position wins over a norm-derived reflection-equivalent one
        for existing in (p, neg):
            if existing in result:
                result.remove(existing)
        result.append(p)
    return InteractionStructure(tuple(result))


def _as_positions(other) -> tuple[Position, ...]:
    if isinstance(other, InteractionStructure):
        return other.positions
    r1, r2 = other
    return ((int(r1), int(r2)),)


def union(a: InteractionStructure, b) -> InteractionStructure:
    """Set union up to reflection-equivalence; a's representative wins."""
    result = list(a.positions)
    present = set(result)
    for p in _as_positions(b):
        if p == (0, 0):
            raise ValueError("(0, 0) cannot be an interacting position")
        if p in present or (-p[0], -p[1]) in present:
            continue
        result.append(p)
        present.add(p)
    return InteractionStructure(tuple(result))


def difference(a: InteractionStructure, b) -> InteractionStructure:
    """Remove b's positions from a, matching up to reflection."""
    drop = set()
    for p in _as_positions(b):
        drop.add(p)
        drop.add((-p[0], -p[1]))
    kept = tuple(p for p in a.positions if p not in drop)
    return InteractionStructure(kept)


def subset(a: InteractionStructure, indices) -> InteractionStructure:
    """Positions at the given 1-based indices, order preserved."""
    out: list[Position] = []
    seen: set[int] = set()
    for idx in indices:
        idx = int(idx)
        if idx < 1 or idx > len(a):
            raise IndexError(
                f"index {idx} out of range 1..{len(a)}")
        if idx in seen:
            raise ValueError(f"repeated index {idx}")
        seen.add(idx)
        out.append(a.positions[idx - 1])
    return InteractionStructure(tuple(out))


def parse_norm_spec(spec: str) -> tuple[float, str]:
    """Parse the CLI form "norm:<type>:<value>" into (max_norm, norm_type)."""
    parts = spec.split(":")
    if len(parts) != 3 or parts[0] != "norm":
        raise ValueError(
            f"bad structure spec {spec!r}; expected norm:<L1|L2|Linf>:<value>")
    return float(parts[2]), parts[1]


def parse_structure_spec(spec: str) -> InteractionStructure:
    """Build a structure from the CLI form "norm:<type>:<value>"."""
    max_norm, norm_type = parse_norm_spec(spec)
    return build_structure(max_norm, norm_type, ())


def read_positions(source) -> InteractionStructure:
    """Parse the text form: one "r1 r2" pair per line."""
    import io
    if isinstance(source, str):
        source = io.StringIO(source)
    out = []
    for line in source:
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        toks = stripped.split()
        if len(toks) != 2:
            raise ValueError(f"bad position line {stripped!r}")
        out.append((int(toks[0]), int(toks[1])))
    return InteractionStructure(tuple(out))


def write_positions(structure: InteractionStructure, sink) -> None:
    for r1, r2 in structure.positions:
        sink.write(f"{r1} {r2}\n")
