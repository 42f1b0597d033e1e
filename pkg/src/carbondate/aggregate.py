"""Combine per-method evidence into a single creation-date estimate.

The estimate is simply the minimum over all successful method estimates;
absence (no method succeeded) is a valid answer, not an error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .core import CanonicalUri, render_iso_timestamp, truncate_to_day
from .sources import (
    METHOD_ARCHIVES,
    METHOD_BACKLINKS,
    METHOD_LAST_MODIFIED,
    METHOD_SEARCH_INDEX,
    METHOD_SHORTENER,
    METHOD_SOCIAL,
    EvidenceResult,
)

# Archival evidence is the baseline method, hence first in tie-breaking.
TIE_BREAK_ORDER = (
    METHOD_ARCHIVES,
    METHOD_LAST_MODIFIED,
    METHOD_SHORTENER,
    METHOD_SOCIAL,
    METHOD_BACKLINKS,
    METHOD_SEARCH_INDEX,
)


class DuplicateMethod(ValueError):
    """Two evidence entries claimed the same method."""


@dataclass(frozen=True)
class CreationEstimate:
    uri: CanonicalUri
    estimated: Optional[int]
    winning_method: Optional[str]
    evidence: tuple[EvidenceResult, ...]

    def by_method(self) -> dict[str, EvidenceResult]:
        return {e.method: e for e in self.evidence}


def aggregate(uri: CanonicalUri, evidence: list[EvidenceResult]) -> CreationEstimate:
    """Minimum over ok estimates; ties broken by the fixed method order."""
    seen: set[str] = set()
    for e in evidence:
        if e.method in seen:
            raise DuplicateMethod(e.method)
        seen.add(e.method)
    ok = {e.method: e.estimate for e in evidence if e.status == "ok"}
    if not ok:
        return CreationEstimate(
            uri=uri, estimated=None, winning_method=None, evidence=tuple(evidence)
        )
    estimated = min(ok.values())
    winner = next(
        m for m in TIE_BREAK_ORDER if ok.get(m) == estimated
    )
    return CreationEstimate(
        uri=uri, estimated=estimated, winning_method=winner, evidence=tuple(evidence)
    )


def _render_value(result: Optional[EvidenceResult]) -> str:
    if result is None or result.status != "ok":
        return ""
    assert result.estimate is not None
    if result.granularity == "day":
        return truncate_to_day(result.estimate).isoformat()
    return render_iso_timestamp(result.estimate)


def render_report(ce: CreationEstimate, style: str = "legacy") -> dict:
    """Shape the estimate as the service's JSON document.

    legacy style uses the historical key names; generic style uses the
    method registry names. Absent values are empty strings so the schema
    stays fixed-shape.
    """
    by_method = ce.by_method()
    archives = by_method.get(METHOD_ARCHIVES)
    if ce.estimated is None:
        estimated = ""
    else:
        win = by_method.get(ce.winning_method or "")
        if win is not None and win.granularity == "day":
            estimated = truncate_to_day(ce.estimated).isoformat()
        else:
            estimated = render_iso_timestamp(ce.estimated)
    by_archive = {}
    if archives is not None and archives.status == "ok":
        by_archive = {
            host: render_iso_timestamp(t)
            for host, t in sorted(archives.detail.get("by_archive", {}).items())
        }
    if style == "legacy":
        return {
            "URI": ce.uri.display(),
            "Estimated Creation Date": estimated,
            "Last Modified": _render_value(by_method.get(METHOD_LAST_MODIFIED)),
            "Bitly": _render_value(by_method.get(METHOD_SHORTENER)),
            "Topsy.com": _render_value(by_method.get(METHOD_SOCIAL)),
            "Backlinks": _render_value(by_method.get(METHOD_BACKLINKS)),
            "Google.com": _render_value(by_method.get(METHOD_SEARCH_INDEX)),
            "Archives": {
                "Earliest": _render_value(archives),
                "By Archive": by_archive,
            },
        }
    if style == "generic":
        return {
            "uri": ce.uri.display(),
            "estimated": estimated,
            "winning_method": ce.winning_method or "",
            "last_modified": _render_value(by_method.get(METHOD_LAST_MODIFIED)),
            "shortener": _render_value(by_method.get(METHOD_SHORTENER)),
            "social": _render_value(by_method.get(METHOD_SOCIAL)),
            "backlinks": _render_value(by_method.get(METHOD_BACKLINKS)),
            "search_index": _render_value(by_method.get(METHOD_SEARCH_INDEX)),
            "archives": {
                "earliest": _render_value(archives),
                "by_archive": by_archive,
            },
        }
    raise ValueError(f"unknown report style: {style!r}")


def render_report_json(ce: CreationEstimate, style: str = "legacy") -> str:
    return json.dumps(render_report(ce, style=style), indent=2)
