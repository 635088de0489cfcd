"""Exposure-guideline tables and the exceedance assessment.

Three tables ship built in: the mean and median rows of a published
compendium of maximum permissible SPLs for airborne high-frequency noise
(assessed against Z-weighted levels), and a low-frequency-noise disturbance
reference curve (assessed against A-weighted levels). Exceedance is a
strict greater-than: a measured level exactly at the limit does not flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bands import ThirdOctaveSpectrum, _index_for_nominal, tob_centers
from .errors import ContractError, DomainError
from .weighting import A, Weighting, Z

_HFN_CENTERS = (8000.0, 10000.0, 12500.0, 16000.0, 20000.0, 25000.0,
                31500.0, 40000.0, 50000.0)

_HFN_MEAN = (80.00, 83.08, 82.67, 83.89, 96.91, 111.08, 113.91, 114.09, 115.28)
_HFN_MEDIAN = (80.0, 80.0, 80.0, 80.0, 105.0, 110.0, 110.0, 110.0, 110.0)

_LFN_CENTERS = (10.0, 12.5, 16.0, 20.0, 25.0, 31.5, 40.0, 50.0, 63.0,
                80.0, 100.0, 125.0, 160.0)
_LFN_LIMITS = (92.0, 87.0, 83.0, 74.0, 64.0, 56.0, 49.0, 43.0, 42.0,
               40.0, 38.0, 36.0, 34.0)


@dataclass(frozen=True)
class GuidelineTable:
    """Frequency -> limit curve with its required weighting and statistic."""

    name: str
    weighting_required: Weighting
    rows: tuple[tuple[float, float], ...]
    statistic: str = "single"

    def __post_init__(self):
        if not self.rows:
            raise DomainError("guideline table needs at least one row")
        if self.statistic not in ("mean", "median", "single"):
            raise DomainError(f"unknown statistic {self.statistic!r}")
        for center, _ in self.rows:
            _index_for_nominal(center)

    def limit(self, center: float) -> float | None:
        for c, lim in self.rows:
            if c == round(float(center), 6):
                return lim
        return None


def builtin_tables() -> list[GuidelineTable]:
    """The three embedded tables: hfn-mean, hfn-median, lfn-curve."""
    return [
        GuidelineTable("hfn-mean", Z, tuple(zip(_HFN_CENTERS, _HFN_MEAN)), "mean"),
        GuidelineTable("hfn-median", Z, tuple(zip(_HFN_CENTERS, _HFN_MEDIAN)), "median"),
        GuidelineTable("lfn-curve", A, tuple(zip(_LFN_CENTERS, _LFN_LIMITS)), "single"),
    ]


def builtin_table(name: str) -> GuidelineTable:
    for table in builtin_tables():
        if table.name == name:
            return table
    raise DomainError(f"no builtin guideline table named {name!r}")


@dataclass(frozen=True)
class LimitCheck:
    table: str
    statistic: str
    limit_db: float
    exceeded: bool


@dataclass
class BandAssessment:
    center_hz: float
    measured_db: float
    weighting: str
    limits: list[LimitCheck]

    @property
    def any_exceeded(self) -> bool:
        return any(check.exceeded for check in self.limits)


@dataclass
class ExposureReport:
    """Per-band exceedance outcome plus per-table exceedance counts."""

    entries: list[BandAssessment]
    summary: dict[str, int]

    @property
    def any_exceeded(self) -> bool:
        return any(count > 0 for count in self.summary.values())

    def exceeded_bands(self, table: str | None = None) -> list[float]:
        out = []
        for entry in self.entries:
            for check in entry.limits:
                if check.exceeded and (table is None or check.table == table):
                    out.append(entry.center_hz)
                    break
        return out

    def to_dict(self, spectrum_ref: dict | None = None) -> dict:
        return {
            "spectrum_ref": spectrum_ref or {},
            "entries": [
                {
                    "center_hz": e.center_hz,
                    "measured_db": e.measured_db,
                    "weighting": e.weighting,
                    "any_exceeded": e.any_exceeded,
                    "limits": [
                        {
                            "table": c.table,
                            "statistic": c.statistic,
                            "limit_db": c.limit_db,
                            "exceeded": c.exceeded,
                        }
                        for c in e.limits
                    ],
                }
                for e in self.entries
            ],
            "summary": dict(self.summary),
            "any_exceeded": self.any_exceeded,
        }


def _weighting_compatible(spectrum: Weighting, required: Weighting) -> bool:
    # hp-weighted levels may be assessed against Z-based limits: above its
    # cutoff the hp curve is unity gain, exactly like Z. A vs Z stays a hard
    # error because the curves differ by tens of dB in the assessed bands.
    if spectrum.kind == required.kind:
        return True
    return required.kind == "z" and spectrum.kind == "hp"


def assess(spectrum: ThirdOctaveSpectrum,
           tables: list[GuidelineTable]) -> ExposureReport:
    """Compare every measured band against every table covering it.

    The spectrum's weighting must match each table's required weighting
    (hp passes for Z-required tables); a mismatch raises ContractError
    rather than silently converting.
    """
    if not tables:
        raise DomainError("need at least one guideline table")
    for table in tables:
        if not _weighting_compatible(spectrum.weighting, table.weighting_required):
            raise ContractError(
                f"table {table.name!r} requires {table.weighting_required.label}-weighted "
                f"levels, spectrum is {spectrum.weighting.label}-weighted"
            )

    entries = []
    summary = {table.name: 0 for table in tables}
    for center, measured in spectrum.bands.items():
        checks = []
        for table in tables:
            limit = table.limit(center)
            if limit is None:
                continue
            exceeded = measured > limit
            if exceeded:
                summary[table.name] += 1
            checks.append(LimitCheck(table.name, table.statistic, limit, exceeded))
        if checks:
            entries.append(
                BandAssessment(center, measured, spectrum.weighting.label, checks)
            )
    return ExposureReport(entries=entries, summary=summary)


def audible_leakage(spectrum: ThirdOctaveSpectrum, target_band: float,
                    lo: float, hi: float) -> tuple[float, float]:
    """Loudest band in [lo, hi] outside the stimulus band.

    ``target_band`` is excluded from the search; the caller chooses
    [lo, hi] so that the range itself excludes the stimulus region
    (leakage reports conventionally run from well below to well above the
    tested bands).
    """
    target = round(float(target_band), 6)
    _index_for_nominal(target)
    candidates = [
        (center, level)
        for center, level in spectrum.bands.items()
        if lo <= center <= hi and center != target
    ]
    if not candidates:
        raise DomainError(f"no bands inside [{lo}, {hi}] Hz to search")
    return max(candidates, key=lambda item: item[1])


def load_guideline_csv(path) -> GuidelineTable:
    """Read a user-supplied guideline curve.

    Format: comment lines ``# name=...`` and ``# weighting=...`` (optional
    ``# statistic=...``), then a ``center_hz,limit_db`` header and rows.
    Centers must be nominal third-octave labels; duplicates are rejected.
    Errors carry 1-based line numbers.
    """
    from .weighting import parse_weighting

    meta: dict[str, str] = {}
    rows: list[tuple[float, float]] = []
    seen: set[float] = set()
    header_seen = False

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            if not header_seen:
                if line.replace(" ", "") != "center_hz,limit_db":
                    raise DomainError(
                        f"{path}:{lineno}: expected header 'center_hz,limit_db'"
                    )
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise DomainError(f"{path}:{lineno}: expected two columns")
            try:
                center = round(float(parts[0]), 6)
                limit = float(parts[1])
            except ValueError:
                raise DomainError(f"{path}:{lineno}: non-numeric row") from None
            try:
                _index_for_nominal(center)
            except DomainError:
                raise DomainError(
                    f"{path}:{lineno}: {center:g} is not a nominal third-octave center"
                ) from None
            if center in seen:
                raise DomainError(f"{path}:{lineno}: duplicate center {center:g}")
            seen.add(center)
            rows.append((center, limit))

    if "name" not in meta or "weighting" not in meta:
        raise DomainError(f"{path}: missing '# name=' or '# weighting=' metadata")
    if not rows:
        raise DomainError(f"{path}: no data rows")
    return GuidelineTable(
        name=meta["name"],
        weighting_required=parse_weighting(meta["weighting"]),
        rows=tuple(sorted(rows)),
        statistic=meta.get("statistic", "single"),
    )
