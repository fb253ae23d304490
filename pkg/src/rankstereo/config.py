"""Matcher configuration and the flat ``key = value`` config file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .cost import CostFamily, CostKind, KernelSpec
from .sgm import Penalties

# (P1, P2') per cost family for a 9x9 kernel; kernel-based costs scale with M*N/81
_BASE_PENALTIES = {
    CostFamily.SAD: (300, 4800),
    CostFamily.BT: (10, 120),
    CostFamily.RANK_AD: (8, 96),
    CostFamily.RANK_SAD: (11, 128),
    CostFamily.UNIFIED_RANK: (16, 192),
}


def default_penalties(kind: CostKind, kernel: KernelSpec = KernelSpec()) -> Penalties:
    v = kind.variant
    if v is CostFamily.BLEND_SAD_RT:
        s = default_penalties(CostKind(CostFamily.SAD), kernel)
        r = default_penalties(CostKind(CostFamily.RANK_AD), kernel)
        a = kind.alpha
        return Penalties(round(a * s.p1 + (1 - a) * r.p1), round(a * s.p2_base + (1 - a) * r.p2_base))
    p1, p2 = _BASE_PENALTIES[v]
    if v is not CostFamily.BT:
        scale = kernel.size / 81.0
        p1, p2 = max(1, round(p1 * scale)), max(1, round(p2 * scale))
    return Penalties(p1, max(p1, p2))


@dataclass
class SgmConfig:
    kernel: KernelSpec = field(default_factory=KernelSpec)
    dmax: int = 64
    cost_kind: CostKind = field(default_factory=CostKind)
    p1: int | None = None
    p2: int | None = None
    delta: float = 1.0
    border_margin: int | None = None
    subpixel: bool = True
    median: bool = True
    fill_holes: bool = True
    lr_check: bool = True
    workers: int = 1
    lmax: int = 2**16 - 1

    @property
    def penalties(self) -> Penalties:
        base = default_penalties(self.cost_kind, self.kernel)
        p1 = base.p1 if self.p1 is None else self.p1
        p2 = base.p2_base if self.p2 is None else self.p2
        return Penalties(p1, p2)

    def margins(self):
        """(left, right, top, bottom) evaluation margins."""
        if self.border_margin is not None:
            m = self.border_margin
            return (m, m, m, m)
        ry, rx = self.kernel.radius
        return (self.dmax, rx, ry, ry)

    def replace(self, **changes) -> "SgmConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        pen = self.penalties
        lines = [
            f"kernel = {self.kernel}",
            f"dmax = {self.dmax}",
            f"cost = {self.cost_kind.name}",
            f"alpha = {self.cost_kind.alpha:g}",
            f"p1 = {pen.p1}",
            f"p2 = {pen.p2_base}",
            f"delta = {self.delta:g}",
            f"border_margin = {'/'.join(str(m) for m in self.margins())}",
            f"subpixel = {str(self.subpixel).lower()}",
            f"median = {str(self.median).lower()}",
            f"fill_holes = {str(self.fill_holes).lower()}",
            f"lr_check = {str(self.lr_check).lower()}",
            f"lmax = {self.lmax}",
        ]
        return "\n".join(lines) + "\n"


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        out[key.strip().lower()] = value.strip()
    return out


def apply_settings(cfg: SgmConfig, settings: dict) -> SgmConfig:
    """Return ``cfg`` updated from string settings (config file or flags)."""
    kw = {}
    kind = cfg.cost_kind
    for key, value in settings.items():
        if value is None:
            continue
        value = str(value)
        if key == "kernel":
            kw["kernel"] = KernelSpec.parse(value)
        elif key in ("dmax", "workers", "lmax"):
            kw[key] = int(value)
        elif key in ("p1", "p2"):
            kw[key] = int(value)
        elif key == "cost":
            kind = CostKind(CostFamily(value.lower()), kind.alpha)
        elif key == "alpha":
            kind = CostKind(kind.variant, float(value))
        elif key == "delta":
            kw["delta"] = float(value)
        elif key == "border_margin":
            kw["border_margin"] = int(value)
        elif key in ("subpixel", "median", "fill_holes", "lr_check"):
            if value.lower() not in _BOOL:
                raise ValueError(f"{key}: expected a boolean, got {value!r}")
            kw[key] = _BOOL[value.lower()]
        else:
            raise ValueError(f"unknown config key {key!r}")
    kw["cost_kind"] = kind
    return cfg.replace(**kw)


def load_config(path) -> SgmConfig:
    with open(path) as fh:
        return apply_settings(SgmConfig(), parse_config_text(fh.read()))
