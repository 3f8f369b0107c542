"""Protocol classification catalog: the 61-entry rating table and the
candidate-filtering pipeline that yields the six-protocol shortlist and the
final three-protocol selection.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path


class Rating(enum.Enum):
    FULL = "full"
    PARTIAL = "partial"
    FAIL = "fail"


class Exclusion(enum.Enum):
    NONE = "none"
    SCALABILITY = "scalability"
    SELF_ORG = "self_org"
    COMM_COMPAT = "comm_compat"
    LOCATION = "location"
    SUPERSEDED = "superseded"


CRITERIA = ("scalability", "self_org", "trustlessness", "comm_compat", "multipath")

HEADER = ("name",) + CRITERIA + ("exclusion", "exclusion_note")

# The final implemented-and-evaluated trio.
SELECTED = ("E-TORA", "TERP", "M-DART")


class CatalogError(ValueError):
    """Malformed or inconsistent catalog data."""


@dataclass(frozen=True)
class ProtocolEntry:
    name: str
    ratings: dict[str, Rating]
    exclusion: Exclusion
    exclusion_note: str

    def excluded(self) -> bool:
        return self.exclusion is not Exclusion.NONE


@dataclass(frozen=True)
class Catalog:
    entries: tuple[ProtocolEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def names(self) -> list[str]:
        return [e.name for e in self.entries]


def default_path() -> Path:
    return Path(str(resources.files("pcnsim").joinpath("data/catalog.csv")))


def load_catalog(path: str | Path | None = None) -> Catalog:
    """Load and validate a catalog CSV; entries keep file order."""
    p = Path(path) if path is not None else default_path()
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise CatalogError(f"cannot read catalog file {p}: {exc}") from exc
    return parse_catalog(text)


def parse_catalog(text: str) -> Catalog:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CatalogError("catalog file has no header row")
    if tuple(header) != HEADER:
        raise CatalogError(f"bad catalog header: expected {','.join(HEADER)}")

    entries: list[ProtocolEntry] = []
    seen: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(HEADER):
            raise CatalogError(f"row {lineno}: expected {len(HEADER)} columns, got {len(row)}")
        name = row[0]
        if not name:
            raise CatalogError(f"row {lineno}: empty protocol name")
        if name in seen:
            raise CatalogError(f"row {lineno}: duplicate protocol name {name!r}")
        seen.add(name)
        ratings = {}
        for i, crit in enumerate(CRITERIA, start=1):
            try:
                ratings[crit] = Rating(row[i])
            except ValueError:
                raise CatalogError(f"row {lineno}: bad {crit} rating {row[i]!r}") from None
        try:
            exclusion = Exclusion(row[6])
        except ValueError:
            raise CatalogError(f"row {lineno}: bad exclusion {row[6]!r}") from None
        note = row[7]
        if exclusion is not Exclusion.NONE and not note:
            raise CatalogError(f"row {lineno}: excluded entry {name!r} has no exclusion note")
        entries.append(ProtocolEntry(name, ratings, exclusion, note))
    return Catalog(tuple(entries))


def serialize_catalog(catalog: Catalog) -> str:
    """Inverse of parse_catalog; round-trips the shipped file byte-for-byte."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    for e in catalog.entries:
        writer.writerow(
            [e.name]
            + [e.ratings[c].value for c in CRITERIA]
            + [e.exclusion.value, e.exclusion_note]
        )
    return out.getvalue()


def shortlist(catalog: Catalog) -> list[str]:
    """Names of all non-excluded entries, in table order."""
    return [e.name for e in catalog.entries if not e.excluded()]


def selected(catalog: Catalog) -> list[str]:
    """The fixed three-protocol selection; checked to be a shortlist subset."""
    shortset = set(shortlist(catalog))
    missing = [n for n in SELECTED if n not in shortset]
    if missing:
        raise CatalogError(f"selection not a subset of the shortlist: {missing} not shortlisted")
    return list(SELECTED)
