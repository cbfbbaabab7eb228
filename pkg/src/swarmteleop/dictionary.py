"""Heterogeneous configuration dictionaries.

A dictionary is an ordered product of per-parameter alphabets. Strings are
compared lexicographically by character index (alphabet precedence is the
listing order), which induces a total order isomorphic to an evenly spaced
embedding of the dictionary into the unit interval.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources


__all__ = [
    "Alphabet",
    "ArenaSpec",
    "ConfigString",
    "DictionarySpec",
    "PolygonSpec",
    "compare",
    "decode_index",
    "encode_string",
    "load_dictionary",
    "swarm_dictionary",
    "synthetic_dictionary",
    "to_polygon",
    "to_unit",
]


@dataclass(frozen=True)
class Alphabet:
    """One ordered character alphabet. Index order is precedence order."""

    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError(f"alphabet {self.name!r} must have at least one value")

    @property
    def size(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ArenaSpec:
    """Rectangular arena in abstract units (relative to arena height)."""

    width: float = 1.5
    height: float = 1.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("arena extents must be positive")


@dataclass(frozen=True)
class DictionarySpec:
    """Ordered alphabets plus the arena they describe.

    Alphabets are listed most-significant first; the induced string order is
    lexicographic in that listing order.
    """

    alphabets: tuple[Alphabet, ...]
    arena: ArenaSpec = field(default_factory=ArenaSpec)

    def __post_init__(self):
        if not self.alphabets:
            raise ValueError("dictionary needs at least one alphabet")

    @property
    def size(self) -> int:
        """Total number of strings N_d (product of alphabet sizes)."""
        return math.prod(a.size for a in self.alphabets)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.alphabets)

    def strings(self):
        """Iterate all strings in dictionary order."""
        for j in range(1, self.size + 1):
            yield decode_index(j, self)


@dataclass(frozen=True)
class ConfigString:
    """One configuration: per-alphabet character indices, 1-based."""

    sigma: tuple[int, ...]
    spec: DictionarySpec

    def __post_init__(self):
        if len(self.sigma) != len(self.spec.alphabets):
            raise ValueError("character count does not match alphabet count")
        for s, a in zip(self.sigma, self.spec.alphabets):
            if not 1 <= s <= a.size:
                raise ValueError(
                    f"character index {s} out of range for alphabet {a.name!r} "
                    f"(size {a.size})"
                )

    @property
    def index(self) -> int:
        return encode_string(self)

    def values(self) -> tuple[float, ...]:
        """Character payloads (never consulted by ordering logic)."""
        return tuple(a.values[s - 1] for s, a in zip(self.sigma, self.spec.alphabets))


@dataclass(frozen=True)
class PolygonSpec:
    """Regular polygon: vertices equally spaced, one fixed at 12 o'clock."""

    center: tuple[float, float]
    n_sides: int
    radius: float

    def __post_init__(self):
        if self.n_sides < 3:
            raise ValueError("polygon needs at least 3 sides")
        if self.radius <= 0:
            raise ValueError("polygon radius must be positive")

    def vertices(self) -> list[tuple[float, float]]:
        """Vertex coordinates, first vertex at angle +pi/2 from center."""
        cx, cy = self.center
        out = []
        for i in range(self.n_sides):
            ang = math.pi / 2 + 2 * math.pi * i / self.n_sides
            out.append((cx + self.radius * math.cos(ang), cy + self.radius * math.sin(ang)))
        return out


def decode_index(j: int, spec: DictionarySpec) -> ConfigString:
    """Return the j-th string (1-based), most-significant alphabet first."""
    n = spec.size
    if not 1 <= j <= n:
        raise IndexError(f"dictionary index {j} out of range 1..{n}")
    rem = j - 1
    sigma = [0] * len(spec.alphabets)
    for i in range(len(spec.alphabets) - 1, -1, -1):
        size = spec.alphabets[i].size
        sigma[i] = rem % size + 1
        rem //= size
    return ConfigString(tuple(sigma), spec)


def encode_string(s: ConfigString, spec: DictionarySpec | None = None) -> int:
    """Inverse of decode_index."""
    spec = spec if spec is not None else s.spec
    if spec is not s.spec and spec != s.spec:
        raise ValueError("string does not belong to the given dictionary")
    j = 0
    for c, a in zip(s.sigma, spec.alphabets):
        j = j * a.size + (c - 1)
    return j + 1


def compare(a: ConfigString, b: ConfigString) -> tuple[int, int | None]:
    """Order two strings of the same dictionary.

    Returns (order, critical) where order is -1/0/+1 for a preceding,
    equal to, or succeeding b, and critical is the 0-based position of the
    first character that differs (None when equal).
    """
    if a.spec != b.spec:
        raise ValueError("strings come from different dictionaries")
    for pos, (ca, cb) in enumerate(zip(a.sigma, b.sigma)):
        if ca != cb:
            return (-1 if ca < cb else 1), pos
    return 0, None


def to_unit(j: int, spec: DictionarySpec) -> float:
    """Unit-interval point Z_j = (j-1)/N_d; I_j = [Z_j, Z_j + 1/N_d)."""
    n = spec.size
    if not 1 <= j <= n:
        raise IndexError(f"dictionary index {j} out of range 1..{n}")
    return (j - 1) / n


def to_polygon(s: ConfigString, physical_scale: float = 1.0) -> PolygonSpec:
    """Polygon denoted by a string of an (h, v, n, s)-shaped dictionary.

    Expects alphabets in order horizontal, vertical, sides, size; payload
    units are arena-relative and multiplied by physical_scale at this point.
    """
    if len(s.sigma) != 4:
        raise ValueError("polygon dictionaries have exactly 4 alphabets (h, v, n, s)")
    h, v, n, size = s.values()
    return PolygonSpec(
        center=(h * physical_scale, v * physical_scale),
        n_sides=int(n),
        radius=size * physical_scale,
    )


def swarm_dictionary() -> DictionarySpec:
    """The bundled 60-string swarm preset (5 x 2 x 3 x 2)."""
    return load_dictionary(
        json.loads(resources.files("swarmteleop.data").joinpath("swarm60.json").read_text())
    )


def synthetic_dictionary(b: int, r: int) -> DictionarySpec:
    """Uniform dictionary with r alphabets of b characters each (N_d = b^r).

    Payloads are the plain character ranks; only the order matters.
    """
    if b < 1 or r < 1:
        raise ValueError("alphabet size and alphabet count must be positive")
    alphabets = tuple(
        Alphabet(name=f"a{i + 1}", values=tuple(float(k) for k in range(1, b + 1)))
        for i in range(r)
    )
    return DictionarySpec(alphabets=alphabets)


def load_dictionary(config: dict | str) -> DictionarySpec:
    """Build a DictionarySpec from a declarative config (dict or JSON path).

    Schema::

        {
          "alphabets": [{"name": "...", "values": [..ordered scalars..]}, ...],
          "arena": {"width": 1.5, "height": 1.0}
        }

    Alphabets are listed most-significant first.
    """
    if isinstance(config, str):
        with open(config) as fh:
            config = json.load(fh)
    alphabets = tuple(
        Alphabet(name=entry["name"], values=tuple(float(v) for v in entry["values"]))
        for entry in config["alphabets"]
    )
    arena_cfg = config.get("arena", {})
    arena = ArenaSpec(
        width=float(arena_cfg.get("width", 1.5)),
        height=float(arena_cfg.get("height", 1.0)),
    )
    return DictionarySpec(alphabets=alphabets, arena=arena)
