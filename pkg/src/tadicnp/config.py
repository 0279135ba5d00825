"""Instance configuration: JSON ingestion, validation and serialization."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import sympy

from .ledger import DEFAULT_POINT_BUDGET, PrecisionLedger, compute_ledger
from .padic import FiniteField
from .polytope import ConeData, build_cone_data, make_polytope
from .sums import LaurentData

Vector = tuple[int, ...]

GENERATOR = sympy.Symbol("g")


class ConfigError(ValueError):
    pass


def _int(x: Any, what: str) -> int:
    """Integers may be given as JSON numbers or decimal strings."""
    if isinstance(x, bool):
        raise ConfigError(f"{what}: expected an integer, got {x!r}")
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        try:
            return int(x.strip(), 10)
        except ValueError:
            pass
    raise ConfigError(f"{what}: expected an integer, got {x!r}")


def parse_fq_element(value: Any, p: int, b: int) -> tuple[int, ...]:
    """An F_q element as power-basis coordinates.

    Accepts a polynomial string in the generator ``g`` of the canonical
    modulus (``"g^2 + 3*g + 1"``), an integer, or a coordinate list
    (constant term first).
    """
    if isinstance(value, list):
        coords = [_int(c, "coefficient") for c in value]
        if len(coords) > b:
            raise ConfigError(f"coefficient list {value} longer than b = {b}")
        return tuple(c % p for c in coords) + (0,) * (b - len(coords))
    if isinstance(value, int) and not isinstance(value, bool):
        return (value % p,) + (0,) * (b - 1)
    if not isinstance(value, str):
        raise ConfigError(f"cannot read F_q element {value!r}")
    try:
        expr = sympy.sympify(value.replace("^", "**"), locals={"g": GENERATOR})
        poly = sympy.Poly(expr, GENERATOR, domain=sympy.ZZ)
    except (sympy.SympifyError, sympy.PolynomialError, sympy.polys.polyerrors.CoercionFailed, TypeError) as exc:
        raise ConfigError(f"cannot parse F_q element {value!r}: {exc}") from exc
    F = FiniteField(p, b)
    coeffs = [int(c) for c in reversed(poly.all_coeffs())]
    return F.reduce(coeffs)


@dataclass(frozen=True)
class Flags:
    direct: bool = True
    dwork: bool = True
    specialize: tuple[int, ...] = (1,)
    polygon_only: bool = False


@dataclass(frozen=True)
class InstanceConfig:
    name: str
    n: int
    vertices: tuple[Vector, ...]
    p: int
    b: int
    coefficients: tuple[tuple[Vector, tuple[int, ...]], ...]
    M_target: int = 2
    N: int = 8
    K: int = 4
    flags: Flags = field(default_factory=Flags)
    m_max: int | None = None
    point_budget: int = DEFAULT_POINT_BUDGET

    @property
    def q(self) -> int:
        return self.p**self.b

    def cone(self) -> ConeData:
        return build_cone_data(make_polytope(self.vertices))

    def laurent(self) -> LaurentData:
        return LaurentData.from_mapping(self.n, self.b, dict(self.coefficients))

    def ledger(self, D: int) -> PrecisionLedger:
        return compute_ledger(self.p, self.b, self.n, D, self.M_target, self.N, self.K, self.point_budget)

    def bumped(self, extra: int = 1) -> "InstanceConfig":
        """The same instance with M_target and N raised by ``extra``."""
        return InstanceConfig(
            self.name,
            self.n,
            self.vertices,
            self.p,
            self.b,
            self.coefficients,
            self.M_target + extra,
            self.N + extra,
            self.K,
            self.flags,
            self.m_max,
            self.point_budget,
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "vertices": [list(v) for v in self.vertices],
            "p": str(self.p),
            "b": self.b,
            "coefficients": [{"u": list(u), "a": list(a)} for u, a in self.coefficients],
            "precision": {"M_target": self.M_target, "N": self.N, "K": self.K},
            "flags": {
                "direct": self.flags.direct,
                "dwork": self.flags.dwork,
                "specialize": list(self.flags.specialize),
                "polygon_only": self.flags.polygon_only,
            },
            "m_max": self.m_max,
            "point_budget": str(self.point_budget),
        }


def config_from_dict(data: dict, validate: bool = True) -> InstanceConfig:
    try:
        vertices = tuple(tuple(_int(c, "vertex") for c in v) for v in data["vertices"])
        p = _int(data["p"], "p")
    except KeyError as exc:
        raise ConfigError(f"missing field {exc}") from exc
    if not sympy.isprime(p):
        raise ConfigError(f"p = {p} is not prime")
    b = _int(data.get("b", 1), "b")
    if b < 1:
        raise ConfigError("b must be positive")
    n = _int(data.get("n", len(vertices[0]) if vertices else 0), "n")
    if any(len(v) != n for v in vertices):
        raise ConfigError(f"vertices must have {n} coordinates")
    raw_terms = data.get("coefficients", [])
    if isinstance(raw_terms, dict):
        raw_terms = [{"u": [int(c) for c in k.split(",")], "a": v} for k, v in raw_terms.items()]
    terms = {}
    for t in raw_terms:
        u = tuple(_int(c, "exponent") for c in t["u"])
        if len(u) != n:
            raise ConfigError(f"exponent {list(u)} must have {n} coordinates")
        if u in terms:
            raise ConfigError(f"exponent {list(u)} listed twice")
        terms[u] = parse_fq_element(t["a"], p, b)
    prec = data.get("precision", {})
    flags_in = data.get("flags", {})
    flags = Flags(
        direct=bool(flags_in.get("direct", True)),
        dwork=bool(flags_in.get("dwork", True)),
        specialize=tuple(_int(m, "specialize") for m in flags_in.get("specialize", [1])),
        polygon_only=bool(flags_in.get("polygon_only", False)),
    )
    if any(m < 1 for m in flags.specialize):
        raise ConfigError("specialization levels m must be positive")
    m_max = data.get("m_max")
    cfg = InstanceConfig(
        name=str(data.get("name", "instance")),
        n=n,
        vertices=vertices,
        p=p,
        b=b,
        coefficients=tuple(sorted((u, a) for u, a in terms.items())),
        M_target=_int(prec.get("M_target", 2), "M_target"),
        N=_int(prec.get("N", 8), "N"),
        K=_int(prec.get("K", 4), "K"),
        flags=flags,
        m_max=None if m_max is None else _int(m_max, "m_max"),
        point_budget=_int(data.get("point_budget", DEFAULT_POINT_BUDGET), "point_budget"),
    )
    if validate:
        validate_config(cfg)
    return cfg


def validate_config(cfg: InstanceConfig, warn: bool = True) -> ConeData:
    try:
        cone = cfg.cone()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if warn and cfg.p <= 3 * cone.D:
        warnings.warn(
            f"p = {cfg.p} is not > 3D = {3 * cone.D}; bound checks that assume it are skipped",
            stacklevel=2,
        )
    if not cfg.flags.polygon_only:
        if min(cfg.M_target, cfg.N, cfg.K) < 1:
            raise ConfigError("M_target, N and K must be positive")
        try:
            cfg.laurent().validate(cone, cfg.p)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return cone


def load_config(path: str | Path) -> InstanceConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))
