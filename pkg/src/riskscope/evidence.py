"""Curated scientific-evidence knowledge base.

Entries are authored offline, verified by hand, and served verbatim; the
runtime never synthesizes evidence text. The file carries a checksum over
its canonical form so accidental edits and drift are caught at load."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path

SOURCE_TYPES = ("journal", "guideline", "systematic-review", "epidemiological")
KINDS = ("importance", "range")

_MARKER_RE = re.compile(r"\[(\d+)\]")


class KBError(ValueError):
    """Knowledge-base file is malformed; message names the offending entry."""


class EvidenceNotFound(LookupError):
    pass


@dataclass(frozen=True)
class Citation:
    marker: str
    title: str
    source_type: str
    year: int
    locator: str

    def to_dict(self) -> dict:
        return {
            "marker": self.marker,
            "title": self.title,
            "source_type": self.source_type,
            "year": self.year,
            "locator": self.locator,
        }


@dataclass(frozen=True)
class RangeInfo:
    normal: tuple[float, float]
    diagnostic: tuple[float, float]
    units: str

    def to_dict(self) -> dict:
        return {"normal": list(self.normal), "diagnostic": list(self.diagnostic), "units": self.units}


@dataclass(frozen=True)
class EvidenceEntry:
    feature: str
    kind: str
    summary: str
    citations: tuple[Citation, ...]
    range_info: RangeInfo | None = None

    def to_dict(self) -> dict:
        doc = {
            "feature": self.feature,
            "kind": self.kind,
            "summary": self.summary,
            "citations": [c.to_dict() for c in self.citations],
        }
        if self.range_info is not None:
            doc["range"] = self.range_info.to_dict()
        return doc


class KnowledgeBase:
    def __init__(self, version: str, entries: list[EvidenceEntry], checksum: str):
        self.version = version
        self.checksum = checksum
        self._entries = {(e.feature, e.kind): e for e in entries}

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> tuple[EvidenceEntry, ...]:
        return tuple(self._entries.values())

    def recompute_checksum(self) -> str:
        return compute_checksum(self.version, [e.to_dict() for e in self._entries.values()])


def compute_checksum(version: str, entry_dicts: list[dict]) -> str:
    canonical = json.dumps({"version": version, "entries": entry_dicts}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _parse_interval(raw, where: str) -> tuple[float, float]:
    if not isinstance(raw, list) or len(raw) != 2:
        raise KBError(f"{where}: interval must be a [low, high] pair")
    lo, hi = float(raw[0]), float(raw[1])
    if lo > hi:
        raise KBError(f"{where}: interval low {lo} exceeds high {hi}")
    return lo, hi


def _parse_entry(raw: dict, index: int) -> EvidenceEntry:
    feature = raw.get("feature")
    kind = raw.get("kind")
    where = f"entry {index} ({feature!r}, {kind!r})"
    if not feature or not isinstance(feature, str):
        raise KBError(f"{where}: missing feature name")
    if kind not in KINDS:
        raise KBError(f"{where}: kind must be one of {KINDS}")
    summary = raw.get("summary")
    if not summary or not isinstance(summary, str):
        raise KBError(f"{where}: missing summary text")

    citations = []
    seen_markers: set[str] = set()
    for c in raw.get("citations", []):
        marker = c.get("marker")
        if not marker or marker in seen_markers:
            raise KBError(f"{where}: citation markers must be present and unique, got {marker!r}")
        seen_markers.add(marker)
        if c.get("source_type") not in SOURCE_TYPES:
            raise KBError(f"{where}: citation {marker} source_type must be one of {SOURCE_TYPES}")
        if not c.get("title") or not c.get("locator"):
            raise KBError(f"{where}: citation {marker} needs a title and locator")
        citations.append(Citation(marker, c["title"], c["source_type"], int(c["year"]), c["locator"]))

    for num in _MARKER_RE.findall(summary):
        if f"[{num}]" not in seen_markers:
            raise KBError(f"{where}: summary cites [{num}] but no such citation exists")

    range_info = None
    if kind == "range":
        payload = raw.get("range")
        if not isinstance(payload, dict):
            raise KBError(f"{where}: kind=range requires a range payload")
        range_info = RangeInfo(
            normal=_parse_interval(payload.get("normal"), where + " normal"),
            diagnostic=_parse_interval(payload.get("diagnostic"), where + " diagnostic"),
            units=str(payload.get("units", "")),
        )
    elif "range" in raw:
        raise KBError(f"{where}: range payload is only valid on kind=range entries")
    return EvidenceEntry(feature, kind, summary, tuple(citations), range_info)


def parse_entries(raw_entries: list[dict]) -> list[EvidenceEntry]:
    """Validate raw entry dicts into their normalized in-memory form."""
    entries = [_parse_entry(e, i) for i, e in enumerate(raw_entries)]
    keys = [(e.feature, e.kind) for e in entries]
    if len(set(keys)) != len(keys):
        dupes = sorted({k for k in keys if keys.count(k) > 1})
        raise KBError(f"duplicate entry keys {dupes}")
    return entries


def load_kb(path: str | Path) -> KnowledgeBase:
    path = Path(path)
    if not path.exists():
        raise KBError(f"knowledge base file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise KBError(f"{path}: invalid JSON ({exc})") from None
    version = doc.get("version")
    if not version:
        raise KBError(f"{path}: missing version")
    raw_entries = doc.get("entries")
    if not isinstance(raw_entries, list):
        raise KBError(f"{path}: entries must be a list")
    try:
        entries = parse_entries(raw_entries)
    except KBError as exc:
        raise KBError(f"{path}: {exc}") from None
    expected = compute_checksum(version, [e.to_dict() for e in entries])
    stated = doc.get("checksum")
    if stated != expected:
        raise KBError(f"{path}: checksum mismatch (stated {stated!r}, computed {expected!r})")
    return KnowledgeBase(version, entries, expected)


def get_evidence(kb: KnowledgeBase, feature: str, kind: str) -> EvidenceEntry:
    if kind not in KINDS:
        raise EvidenceNotFound(f"unknown evidence kind {kind!r}")
    entry = kb._entries.get((feature, kind))
    if entry is None:
        raise EvidenceNotFound(f"no {kind} evidence for feature {feature!r}")
    return entry
