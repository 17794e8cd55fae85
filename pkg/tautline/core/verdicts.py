"""Pass/fail records returned by every check in the package."""

from dataclasses import dataclass, field
from typing import Any, Dict, Tuple


@dataclass(frozen=True)
class Verdict:
    """Outcome of one executable check.

    ``residual`` is the measured quantity the check compared against its
    tolerance, kept for debugging. ``inconclusive`` marks probes that could
    neither confirm nor refute the property.
    """

    name: str
    ok: bool
    residual: float = 0.0
    violations: Tuple[str, ...] = ()
    details: Dict[str, Any] = field(default_factory=dict)
    inconclusive: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "ok": self.ok,
            "inconclusive": self.inconclusive,
            "residual": self.residual,
            "violations": list(self.violations),
            "details": self.details,
        }


def combine(name: str, parts, **details) -> Verdict:
    """Folds several verdicts into one that passes iff all of them pass."""
    parts = list(parts)
    violations = tuple(v for part in parts for v in part.violations)
    return Verdict(
        name=name,
        ok=all(part.ok for part in parts),
        residual=max((part.residual for part in parts), default=0.0),
        violations=violations,
        details={**details, "checks": [part.to_dict() for part in parts]},
        inconclusive=any(part.inconclusive for part in parts),
    )
