"""Built-in polytopes for the polygon checks, each paired with two primes."""

from __future__ import annotations

from dataclasses import dataclass

import sympy

from .config import Flags, InstanceConfig
from .polytope import build_cone_data, make_polytope

Vector = tuple[int, ...]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    vertices: tuple[Vector, ...]

    @property
    def n(self) -> int:
        return len(self.vertices[0])


def catalog_entries() -> list[CatalogEntry]:
    out = [CatalogEntry(f"interval-{d}", ((0,), (d,))) for d in range(1, 7)]
    out += [CatalogEntry(f"simplex-{d}", ((0, 0), (d, 0), (0, d))) for d in range(1, 4)]
    out.append(CatalogEntry("rectangle-2x1", ((0, 0), (2, 0), (0, 1), (2, 1))))
    out.append(CatalogEntry("triangle-2-3", ((0, 0), (2, 0), (0, 3))))
    return out


def primes_above(bound: int, count: int = 2) -> list[int]:
    out, x = [], bound
    while len(out) < count:
        x = sympy.nextprime(x)
        out.append(int(x))
    return out


def catalog_configs() -> list[InstanceConfig]:
    """Polygon-only configs: every entry with the two smallest primes p > 3D."""
    configs = []
    for entry in catalog_entries():
        cone = build_cone_data(make_polytope(entry.vertices))
        for p in primes_above(3 * cone.D):
            configs.append(
                InstanceConfig(
                    name=f"{entry.name}-p{p}",
                    n=entry.n,
                    vertices=entry.vertices,
                    p=p,
                    b=1,
                    coefficients=(),
                    flags=Flags(direct=False, dwork=False, specialize=(), polygon_only=True),
                    m_max=cone.normalized_volume + 10,
                )
            )
    return configs
