"""Level systems: labeled levels plus a coupling graph of drivable transitions.

Energies are angular frequencies in units of the reference Rabi frequency.
Each transition carries a dipole strength d (dimensionless, so that
pulse area times d is an angle) and an `addressable` flag; non-addressable
transitions exist only as decay-capable edges and are never offered to the
pulse compiler.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SystemModelError


@dataclass(frozen=True)
class Level:
    label: str
    energy: float = 0.0


@dataclass(frozen=True)
class Transition:
    from_level: str
    to_level: str
    dipole_strength: float = 1.0
    addressable: bool = True

    @property
    def pair(self) -> frozenset:
        return frozenset((self.from_level, self.to_level))


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class LevelSystem:
    """Ordered levels and the transitions that couple them.

    The level order fixes the basis used by every matrix in the package.
    """

    levels: tuple[Level, ...]
    transitions: tuple[Transition, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        report = validate(self)
        if not report.ok:
            raise SystemModelError("; ".join(report.violations))

    @property
    def dim(self) -> int:
        return len(self.levels)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lv.label for lv in self.levels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise SystemModelError(f"unknown level {label!r}") from None

    def energy(self, label: str) -> float:
        return self.levels[self.index(label)].energy

    def canonical_pair(self, a: str, b: str) -> tuple[str, str]:
        """Order a level pair by basis position."""
        return (a, b) if self.index(a) < self.index(b) else (b, a)

    def transition(self, a: str, b: str) -> Transition:
        want = frozenset((a, b))
        for tr in self.transitions:
            if tr.pair == want:
                return tr
        raise SystemModelError(f"no transition between {a!r} and {b!r}")

    def has_transition(self, a: str, b: str) -> bool:
        want = frozenset((a, b))
        return any(tr.pair == want for tr in self.transitions)

    def dipole(self, a: str, b: str) -> float:
        return self.transition(a, b).dipole_strength

    def transition_frequency(self, a: str, b: str) -> float:
        """Derived transition frequency |E_a - E_b|."""
        return abs(self.energy(a) - self.energy(b))


def validate(system: LevelSystem) -> ValidationReport:
    """Check system invariants; returns every violation found."""
    violations: list[str] = []
    labels = [lv.label for lv in system.levels]
    seen = set()
    for label in labels:
        if label in seen:
            violations.append(f"duplicate level label {label!r}")
        seen.add(label)
    pairs = set()
    for tr in system.transitions:
        name = f"{tr.from_level}-{tr.to_level}"
        if tr.from_level == tr.to_level:
            violations.append(f"transition {name} connects a level to itself")
        for end in (tr.from_level, tr.to_level):
            if end not in seen:
                violations.append(f"transition {name} references undeclared level {end!r}")
        if tr.dipole_strength <= 0:
            violations.append(f"transition {name} has non-positive dipole strength {tr.dipole_strength}")
        if tr.pair in pairs:
            violations.append(f"duplicate transition on pair {name}")
        pairs.add(tr.pair)
    return ValidationReport(ok=not violations, violations=tuple(violations))


def addressable_edges(system: LevelSystem) -> set[tuple[str, str]]:
    """Unordered level pairs the compiler may drive, canonically ordered."""
    return {
        system.canonical_pair(tr.from_level, tr.to_level)
        for tr in system.transitions
        if tr.addressable
    }


def four_level_system(
    d_g1e1: float = 1.0,
    d_g1e2: float = 1.0,
    d_g2e2: float = 1.0,
    d_g2e1: float = 1.0,
) -> LevelSystem:
    """The standard memory atom: degenerate ground pair, two distinct excited levels.

    Basis order (g1, g2, e1, e2). Drivable edges are g1-e1, g1-e2 and g2-e2;
    g2-e1 is kept as a non-addressable, decay-capable edge. The ground pair
    has no transition at all, so nothing can ever drive or decay across it.
    Excited energies are arbitrary nonzero values: resonant rotating-frame
    dynamics never sees them, they only encode the non-degeneracy.
    """
    return LevelSystem(
        levels=(
            Level("g1", 0.0),
            Level("g2", 0.0),
            Level("e1", 100.0),
            Level("e2", 120.0),
        ),
        transitions=(
            Transition("g1", "e1", d_g1e1, addressable=True),
            Transition("g1", "e2", d_g1e2, addressable=True),
            Transition("g2", "e2", d_g2e2, addressable=True),
            Transition("g2", "e1", d_g2e1, addressable=False),
        ),
    )
