"""Anomaly category taxonomy shared across the pipeline and dataset schema."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError

CATEGORIES: tuple[str, ...] = (
    "Fire",
    "Arson",
    "Burning",
    "Smoke",
    "Stealing",
    "Burglary",
    "Robbery",
    "Shoplifting",
    "Fighting",
    "Assault",
    "Abuse",
    "Riots",
    "Road Accident",
    "Traffic Violation",
    "Pedestrian Incident",
    "Explosion",
    "Vandalism",
    "Water Incident",
    "Animal Hurting",
    "Shooting",
    "Arrest",
)

NORMAL = "Normal"

ALL_LABELS: tuple[str, ...] = CATEGORIES + (NORMAL,)


@dataclass(frozen=True)
class AnomalyTaxonomy:
    """Ordered anomaly categories plus the implicit "Normal" label."""

    categories: tuple[str, ...] = field(default=CATEGORIES)

    def __post_init__(self):
        if len(set(self.categories)) != len(self.categories) or not self.categories:
            raise ConfigError("taxonomy categories must be nonempty and unique")

    @property
    def labels(self) -> tuple[str, ...]:
        return self.categories + (NORMAL,)

    def is_valid_label(self, label: str) -> bool:
        return label in self.labels


DEFAULT_TAXONOMY = AnomalyTaxonomy()
