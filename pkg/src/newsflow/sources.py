"""News-outlet registry and the questionable/reliable classification heuristic.

Two provider schemas are merged. MBFC outlets carry a categorical bias label:
anything in {Questionable, Conspiracy-Pseudoscience} is questionable, every
other category reliable. NG outlets carry a 0-100 trust score classified
against a 60-point threshold; humor and platform entries stay unknown. The
NG boundary itself is configurable: the default treats exactly 60 as
questionable (reliable requires a score strictly above 60), the lenient
variant accepts 60 as reliable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional

from .corpus.domains import extract_domain, normalize_host, registered_domain
from .corpus.model import Corpus
from .errors import UsageError

__all__ = [
    "Label",
    "CredibilityLabel",
    "Provider",
    "OutletRecord",
    "OutletRegistry",
    "classify_outlet",
    "load_registry",
    "label_posts",
    "MBFC_BIAS_VALUES",
    "NG_SPECIAL_VALUES",
    "REGISTRY_HEADER",
]


class Label(str, Enum):
    QUESTIONABLE = "questionable"
    RELIABLE = "reliable"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


CredibilityLabel = Label  # alias: the label type as seen by downstream modules


class Provider(str, Enum):
    MBFC = "MBFC"
    NG = "NG"


MBFC_BIAS_VALUES = (
    "Right", "Right-Center", "Least-Biased", "Left-Center", "Left",
    "Questionable", "Conspiracy-Pseudoscience", "Pro-Science",
)
_MBFC_QUESTIONABLE = {"Questionable", "Conspiracy-Pseudoscience"}
NG_SPECIAL_VALUES = ("humor", "platform")
NG_THRESHOLD = 60.0

REGISTRY_HEADER = ("domain", "provider", "mbfc_bias", "mbfc_bias_score",
                   "ng_score", "ng_special")


@dataclass(frozen=True)
class OutletRecord:
    """One registered news domain with the fields of exactly one provider."""

    domain: str
    provider: Provider
    mbfc_bias: Optional[str] = None
    mbfc_bias_score: Optional[float] = None  # stored, never used by the heuristic
    ng_score: Optional[float] = None
    ng_special: Optional[str] = None

    def __post_init__(self):
        if self.provider == Provider.MBFC:
            if self.mbfc_bias is None or self.ng_score is not None or self.ng_special:
                raise UsageError(f"MBFC record must carry only MBFC fields: {self.domain}")
            if self.mbfc_bias not in MBFC_BIAS_VALUES:
                raise UsageError(f"unknown MBFC bias {self.mbfc_bias!r} for {self.domain}")
            if self.mbfc_bias_score is not None and not 0.0 <= self.mbfc_bias_score <= 10.0:
                raise UsageError(f"MBFC bias score out of [0, 10] for {self.domain}")
        else:
            if self.mbfc_bias is not None or self.mbfc_bias_score is not None:
                raise UsageError(f"NG record must carry only NG fields: {self.domain}")
            if self.ng_special is not None:
                if self.ng_special not in NG_SPECIAL_VALUES:
                    raise UsageError(f"unknown NG special {self.ng_special!r} for {self.domain}")
            elif self.ng_score is None:
                raise UsageError(f"NG record needs a score or a special tag: {self.domain}")
            if self.ng_score is not None and not 0.0 <= self.ng_score <= 100.0:
                raise UsageError(f"NG score out of [0, 100] for {self.domain}")


def classify_outlet(record: OutletRecord, ng_reliable_strict: bool = True) -> Label:
    """Credibility label for one outlet record. Total over valid records."""
    if record.provider == Provider.MBFC:
        if record.mbfc_bias in _MBFC_QUESTIONABLE:
            return Label.QUESTIONABLE
        return Label.RELIABLE
    if record.ng_special is not None:
        return Label.UNKNOWN
    score = record.ng_score
    if ng_reliable_strict:
        return Label.RELIABLE if score > NG_THRESHOLD else Label.QUESTIONABLE
    return Label.RELIABLE if score >= NG_THRESHOLD else Label.QUESTIONABLE


@dataclass
class OutletRegistry:
    """Immutable-after-load mapping from registered domain to outlet + label."""

    records: dict[str, OutletRecord]
    labels: dict[str, Label]
    rejected_rows: list[tuple[int, str]] = field(default_factory=list)
    cross_provider_duplicates: int = 0

    def __contains__(self, domain: str) -> bool:
        return domain in self.records

    def __len__(self) -> int:
        return len(self.records)

    def label(self, domain: str) -> Label:
        return self.labels.get(domain, Label.UNKNOWN)

    def counts(self) -> dict:
        by_label = {label.value: 0 for label in Label}
        by_provider = {p.value: 0 for p in Provider}
        for domain, record in self.records.items():
            by_label[self.labels[domain].value] += 1
            by_provider[record.provider.value] += 1
        return {
            "total": len(self.records),
            "by_label": by_label,
            "by_provider": by_provider,
            "rejected_rows": len(self.rejected_rows),
            "cross_provider_duplicates": self.cross_provider_duplicates,
        }


def _normalize_registry_domain(raw: str) -> Optional[str]:
    domain = extract_domain(raw)
    if domain is not None:
        return domain
    host = normalize_host(raw)
    return registered_domain(host) if host else None


def load_registry(path, ng_reliable_strict: bool = True,
                  delimiter: str = ",") -> OutletRegistry:
    """Load a delimiter-separated registry file.

    Rows missing both providers' fields are rejected (with their row number);
    when one domain appears under both providers the MBFC row wins.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = list(csv.DictReader(handle, delimiter=delimiter))
    if not rows:
        raise UsageError(f"registry file is empty: {path}")

    records: dict[str, OutletRecord] = {}
    labels: dict[str, Label] = {}
    rejected: list[tuple[int, str]] = []
    cross_dups = 0
    for number, row in enumerate(rows, start=2):  # header is line 1
        domain = _normalize_registry_domain((row.get("domain") or "").strip())
        provider_raw = (row.get("provider") or "").strip().upper()
        if domain is None or provider_raw not in ("MBFC", "NG"):
            rejected.append((number, "bad domain or provider"))
            continue
        try:
            if provider_raw == "MBFC":
                bias = (row.get("mbfc_bias") or "").strip()
                score_raw = (row.get("mbfc_bias_score") or "").strip()
                record = OutletRecord(
                    domain=domain, provider=Provider.MBFC,
                    mbfc_bias=bias or None,
                    mbfc_bias_score=float(score_raw) if score_raw else None,
                )
            else:
                score_raw = (row.get("ng_score") or "").strip()
                special = (row.get("ng_special") or "").strip()
                record = OutletRecord(
                    domain=domain, provider=Provider.NG,
                    ng_score=float(score_raw) if score_raw else None,
                    ng_special=special or None,
                )
        except (UsageError, ValueError) as exc:
            rejected.append((number, str(exc)))
            continue
        if domain in records:
            existing = records[domain]
            if existing.provider == record.provider:
                continue  # plain duplicate row, first wins
            cross_dups += 1
            if existing.provider == Provider.MBFC:
                continue  # MBFC precedence
        records[domain] = record
        labels[domain] = classify_outlet(record, ng_reliable_strict=ng_reliable_strict)

    if not records:
        raise UsageError(f"registry file has no usable rows: {path}")
    return OutletRegistry(records=records, labels=labels, rejected_rows=rejected,
                          cross_provider_duplicates=cross_dups)


def label_posts(corpus: Corpus, registry: OutletRegistry) -> tuple[dict[str, Label], dict]:
    """Label every post by the registry domains its links point at.

    Each registered link casts a vote with its outlet label; humor/platform
    (unknown) outlets cast no vote. Majority wins, ties and vote-less posts
    stay unknown. Returns the per-post labels plus a coverage report.
    """
    labels: dict[str, Label] = {}
    categorized = 0
    for post_id, post in corpus.posts.items():
        votes = {Label.QUESTIONABLE: 0, Label.RELIABLE: 0}
        for url in post.urls:
            domain = extract_domain(url)
            if domain is None or domain not in registry:
                continue
            vote = registry.label(domain)
            if vote in votes:
                votes[vote] += 1
        if votes[Label.QUESTIONABLE] > votes[Label.RELIABLE]:
            label = Label.QUESTIONABLE
        elif votes[Label.RELIABLE] > votes[Label.QUESTIONABLE]:
            label = Label.RELIABLE
        else:
            label = Label.UNKNOWN
        labels[post_id] = label
        if label is not Label.UNKNOWN:
            categorized += 1
    coverage = {
        "posts": len(corpus.posts),
        "categorized": categorized,
        "uncategorized": len(corpus.posts) - categorized,
        "questionable": sum(1 for v in labels.values() if v is Label.QUESTIONABLE),
        "reliable": sum(1 for v in labels.values() if v is Label.RELIABLE),
    }
    return labels, coverage
