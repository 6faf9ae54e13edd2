"""Verification reports: independent named checks, each with its own status.

A check is Valid, Invalid, or Indeterminate. Indeterminate means the check
could not be completed (typically a network failure) and is never collapsed
into a false Valid or Invalid. The overall outcome is Valid only when every
check is Valid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class CheckStatus(str, Enum):
    VALID = "Valid"
    INVALID = "Invalid"
    INDETERMINATE = "Indeterminate"


@dataclass
class CheckResult:
    status: CheckStatus
    reason: str
    detail: str = ""

    def to_json(self) -> dict:
        return {"status": self.status.value, "reason": self.reason, "detail": self.detail}


def _overall(statuses: list[CheckStatus]) -> CheckStatus:
    if any(s is CheckStatus.INVALID for s in statuses):
        return CheckStatus.INVALID
    if any(s is CheckStatus.INDETERMINATE for s in statuses):
        return CheckStatus.INDETERMINATE
    return CheckStatus.VALID


@dataclass
class VerificationReport:
    """Outcome of verifying one credential."""

    checks: dict[str, CheckResult] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    issuer: str = ""
    credential_id: str = ""
    claims: dict = field(default_factory=dict)

    @property
    def overall(self) -> CheckStatus:
        return _overall([c.status for c in self.checks.values()])

    @property
    def valid(self) -> bool:
        return self.overall is CheckStatus.VALID

    def reasons(self) -> list[str]:
        return [c.reason for c in self.checks.values() if c.status is not CheckStatus.VALID]

    def to_json(self) -> dict:
        return {
            "overall": self.overall.value,
            "issuer": self.issuer,
            "credentialId": self.credential_id,
            "claims": self.claims,
            "checks": {name: check.to_json() for name, check in self.checks.items()},
            "notes": self.notes,
        }


@dataclass
class PresentationReport:
    """Outcome of verifying a presentation and every credential inside it."""

    checks: dict[str, CheckResult] = field(default_factory=dict)
    credential_reports: list[VerificationReport] = field(default_factory=list)
    holder: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def issuers(self) -> list[str]:
        """Issuer DIDs of the embedded credentials: the trust anchors."""
        seen = []
        for report in self.credential_reports:
            if report.issuer and report.issuer not in seen:
                seen.append(report.issuer)
        return seen

    @property
    def overall(self) -> CheckStatus:
        statuses = [c.status for c in self.checks.values()]
        statuses += [r.overall for r in self.credential_reports]
        return _overall(statuses)

    @property
    def valid(self) -> bool:
        return self.overall is CheckStatus.VALID

    def reasons(self) -> list[str]:
        out = [c.reason for c in self.checks.values() if c.status is not CheckStatus.VALID]
        for report in self.credential_reports:
            out.extend(report.reasons())
        return out

    def to_json(self) -> dict:
        return {
            "overall": self.overall.value,
            "holder": self.holder,
            "issuers": self.issuers,
            "checks": {name: check.to_json() for name, check in self.checks.items()},
            "credentials": [r.to_json() for r in self.credential_reports],
            "notes": self.notes,
        }
