"""Tally observed dump sites against a vulnerability map."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

from .raster import point_to_cell
from .scoring import VulnClass, VulnerabilityMap


@dataclass(frozen=True)
class ObservedSite:
    x: float
    y: float
    identifier: str
    observed: Optional[str] = None  # ISO date, informational only


@dataclass
class ValidationReport:
    total: int = 0
    outside_buffer: int = 0
    per_class: Dict[VulnClass, int] = field(default_factory=lambda: {c: 0 for c in VulnClass})

    @property
    def validated(self) -> int:
        return self.total - self.outside_buffer

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "outside_buffer": self.outside_buffer,
            "validated": self.validated,
            "per_class": {c.label: self.per_class[c] for c in VulnClass},
        }


def validate_sites(sites: Iterable[ObservedSite], vmap: VulnerabilityMap) -> ValidationReport:
    """Sample the class grid under each site.

    A site off the grid or on a nodata cell is counted as outside the buffer;
    there is no snapping to nearby scored cells.
    """
    report = ValidationReport()
    classes = vmap.classes
    valid = classes.valid()
    for site in sites:
        report.total += 1
        cell = point_to_cell((site.x, site.y), vmap.header)
        if cell is None or not valid[cell]:
            report.outside_buffer += 1
            continue
        report.per_class[VulnClass(int(classes.data[cell]))] += 1
    return report
