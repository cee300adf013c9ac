"""Unit-cell geometry and onsite-energy textures of the H-shaped ladder cell.

The cell is a horizontal chain of ``n_chain`` sites with four vertical arms.
The two left arms hang off chain column 0, the two right arms off column
``n_chain - 1``.  Arms sit at the same horizontal position as their anchor,
so a period holds ``n_chain`` distinct columns and the lattice constant is
``a = n_chain`` (unit intersite spacing).
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, List, Mapping, Tuple

from .errors import GeometryError, TextureError


class IntercellMode(str, enum.Enum):
    """How neighbouring cells are coupled by ``t_i``."""

    CHAIN_ONLY = "ChainOnly"
    FULL_COLUMN = "FullColumn"

    @classmethod
    def parse(cls, value: "str | IntercellMode") -> "IntercellMode":
        if isinstance(value, cls):
            return value
        key = str(value).replace("_", "").replace("-", "").lower()
        for mode in cls:
            if mode.value.lower() == key:
                return mode
        raise ValueError(f"unknown intercell mode {value!r}")


class Role(str, enum.Enum):
    CHAIN = "Chain"
    ARM_UL = "ArmUL"
    ARM_DL = "ArmDL"
    ARM_UR = "ArmUR"
    ARM_DR = "ArmDR"


ARM_ROLES = (Role.ARM_UL, Role.ARM_DL, Role.ARM_UR, Role.ARM_DR)
# suffix used in CellSpec field names for each arm
_ARM_KEY = {Role.ARM_UL: "ul", Role.ARM_DL: "dl", Role.ARM_UR: "ur", Role.ARM_DR: "dr"}


class GroupName(str, enum.Enum):
    """Two-color Frieze group labels used for the onsite textures."""

    P2MM = "P2mm"
    P2PMPM = "P2'm'm"
    P2MPMP = "P2m'm'"
    P2PMMP = "P2'mm'"
    NO_GROUP = "NoGroup"

    @classmethod
    def parse(cls, value: "str | GroupName") -> "GroupName":
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        aliases = {
            "p2mm": cls.P2MM,
            "p2'm'm": cls.P2PMPM,
            "p2pmpm": cls.P2PMPM,
            "p2m'm'": cls.P2MPMP,
            "p2mpmp": cls.P2MPMP,
            "p2'mm'": cls.P2PMMP,
            "p2pmmp": cls.P2PMMP,
            "nogroup": cls.NO_GROUP,
        }
        try:
            return aliases[text.lower()]
        except KeyError:
            raise ValueError(f"unknown group label {value!r}") from None


# arm onsite signs (ul, dl, ur, dr) for each label
_TEXTURE_SIGNS: Dict[GroupName, Tuple[int, int, int, int]] = {
    GroupName.P2MM: (1, 1, 1, 1),
    GroupName.P2PMPM: (1, -1, 1, -1),
    GroupName.P2MPMP: (1, -1, -1, 1),
    GroupName.P2PMMP: (1, 1, -1, -1),
}


@dataclass(frozen=True)
class CellSpec:
    """Parametric description of one unit cell.

    Energies are in units of ``t_a``.  ``n_arm_*`` may differ from each
    other; the equal-arm case is built with :meth:`equal_arms`.
    """

    n_chain: int
    n_arm_ul: int = 0
    n_arm_dl: int = 0
    n_arm_ur: int = 0
    n_arm_dr: int = 0
    eps0: float = 0.0
    eps_ul: float = 0.0
    eps_dl: float = 0.0
    eps_ur: float = 0.0
    eps_dr: float = 0.0
    t_c: float = 1.0
    t_a: float = 1.0
    t_i: float = 0.1
    intercell_mode: IntercellMode = IntercellMode.FULL_COLUMN

    def __post_init__(self):
        object.__setattr__(self, "intercell_mode", IntercellMode.parse(self.intercell_mode))
        for name in ("n_chain", "n_arm_ul", "n_arm_dl", "n_arm_ur", "n_arm_dr"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise GeometryError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
            if value < 0:
                raise GeometryError(f"{name} must be non-negative, got {value}")
        for name in ("eps0", "eps_ul", "eps_dl", "eps_ur", "eps_dr", "t_c", "t_a", "t_i"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.t_a <= 0:
            raise ValueError(f"t_a is the energy unit and must be positive, got {self.t_a}")

    @classmethod
    def equal_arms(cls, n_arm: int, n_chain: int, **kwargs) -> "CellSpec":
        return cls(n_chain=n_chain, n_arm_ul=n_arm, n_arm_dl=n_arm,
                   n_arm_ur=n_arm, n_arm_dr=n_arm, **kwargs)

    def arm_length(self, role: Role) -> int:
        return getattr(self, f"n_arm_{_ARM_KEY[role]}")

    def arm_onsite(self, role: Role) -> float:
        return getattr(self, f"eps_{_ARM_KEY[role]}")

    @property
    def n_sites(self) -> int:
        return self.n_chain + sum(self.arm_length(r) for r in ARM_ROLES)

    def with_(self, **changes) -> "CellSpec":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["intercell_mode"] = self.intercell_mode.value
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CellSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise KeyError(unknown[0])
        return cls(**dict(data))


@dataclass(frozen=True)
class Site:
    index: int
    role: Role
    column: int
    row: int
    x_frac: float


@dataclass(frozen=True)
class CellGeometry:
    sites: Tuple[Site, ...]
    lattice_constant: float
    n_chain: int

    def __len__(self) -> int:
        return len(self.sites)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def x_frac(self) -> List[float]:
        return [s.x_frac for s in self.sites]

    def lookup(self) -> Dict[Tuple[Role, int], int]:
        """Map ``(role, row)`` to site index; chain sites are keyed by column."""
        table = {}
        for s in self.sites:
            key = (s.role, s.column if s.role is Role.CHAIN else s.row)
            table[key] = s.index
        return table

    def arm_sites(self, role: Role) -> List[Site]:
        return [s for s in self.sites if s.role is role]

    def chain_sites(self) -> List[Site]:
        return [s for s in self.sites if s.role is Role.CHAIN]


def build_geometry(spec: CellSpec) -> CellGeometry:
    """Lay out the sites of one cell in the fixed chain-first order.

    Chain sites come first, left to right, then each arm from the site next
    to the chain out to the tip, in the order UL, DL, UR, DR.
    """
    nc = spec.n_chain
    if nc < 2:
        raise GeometryError(f"n_chain must be >= 2 so arms attach to distinct ends, got {nc}")
    sites: List[Site] = []
    for col in range(nc):
        sites.append(Site(len(sites), Role.CHAIN, col, 0, col / nc))
    for role in ARM_ROLES:
        column = 0 if role in (Role.ARM_UL, Role.ARM_DL) else nc - 1
        sign = 1 if role in (Role.ARM_UL, Role.ARM_UR) else -1
        for depth in range(1, spec.arm_length(role) + 1):
            sites.append(Site(len(sites), role, column, sign * depth, column / nc))
    return CellGeometry(sites=tuple(sites), lattice_constant=float(nc), n_chain=nc)


@dataclass(frozen=True)
class GroupPreset:
    """Requested two-color group and detuning magnitude ``|eps|``.

    A zero detuning collapses every texture onto the parent group P2mm.
    """

    label: GroupName
    detuning: float

    def __post_init__(self):
        object.__setattr__(self, "label", GroupName.parse(self.label))
        detuning = float(self.detuning)
        if not math.isfinite(detuning) or detuning < 0:
            raise TextureError(f"detuning must be a finite non-negative number, got {self.detuning}")
        object.__setattr__(self, "detuning", detuning)
        if detuning == 0.0:
            object.__setattr__(self, "label", GroupName.P2MM)


def texture_signs(label: GroupName) -> Tuple[int, int, int, int]:
    """Arm onsite signs ``(ul, dl, ur, dr)`` for a group label."""
    label = GroupName.parse(label)
    if label not in _TEXTURE_SIGNS:
        raise TextureError(f"no onsite texture realizes {label.value}")
    return _TEXTURE_SIGNS[label]


def apply_texture(spec: CellSpec, preset: GroupPreset) -> CellSpec:
    if preset.detuning < 0:
        raise TextureError("detuning must be non-negative")
    s_ul, s_dl, s_ur, s_dr = texture_signs(preset.label)
    e = preset.detuning
    return replace(spec, eps_ul=s_ul * e, eps_dl=s_dl * e, eps_ur=s_ur * e, eps_dr=s_dr * e)


def textured(n_arm: int, n_chain: int, label, detuning: float, **kwargs) -> CellSpec:
    """Equal-arm cell with the texture of ``label`` at magnitude ``detuning``."""
    return apply_texture(CellSpec.equal_arms(n_arm, n_chain, **kwargs), GroupPreset(label, detuning))
