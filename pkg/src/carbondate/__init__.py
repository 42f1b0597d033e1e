"""carbondate: estimate the creation date of web resources by polling
independent sources of evidence and taking the earliest plausible one."""

from .aggregate import CreationEstimate, aggregate, render_report
from .core import (
    CanonicalUri,
    MalformedUri,
    PlausibilityWindow,
    UnparsableDate,
    filter_plausible,
    normalize_uri,
    parse_http_date,
    truncate_to_day,
)
from .replay import Cassette, ReplayTransport, UnmatchedInteraction
from .sources import ALL_METHODS, EvidenceResult, SourceContext, gather_evidence
from .synth import SyntheticWorld, generate_world

__all__ = [
    "ALL_METHODS",
    "CanonicalUri",
    "Cassette",
    "CreationEstimate",
    "EvidenceResult",
    "MalformedUri",
    "PlausibilityWindow",
    "ReplayTransport",
    "SourceContext",
    "SyntheticWorld",
    "UnmatchedInteraction",
    "UnparsableDate",
    "aggregate",
    "filter_plausible",
    "gather_evidence",
    "generate_world",
    "normalize_uri",
    "parse_http_date",
    "render_report",
    "truncate_to_day",
]

__version__ = "0.1.0"
