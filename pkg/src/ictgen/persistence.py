"""Trace files, config files and the external contact importer.

Trace file layout::

    #n_users=100
    #D_sim=100
    #D_day=86400
    #granularity=300
    #seed=7
    #variant=piecewise
    #version=0.1.0
    i,j,start,end
    3,41,900,1500
    ...

Rows are sorted by ``(start, i, j)`` and times are integer seconds.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

from .config import SimConfig
from .errors import AssemblyError, ConfigurationError, ContactImportError, ParseError
from .sampling import GammaParams
from .trace import ContactEvent, Trace, TraceMeta, sort_key, validate_events

TRACE_COLUMNS = ("i", "j", "start", "end")
_META_KEYS = ("n_users", "D_sim", "D_day", "granularity", "seed", "variant", "version")


def _read_text(source) -> str:
    if hasattr(source, "read"):
        return source.read()
    return Path(source).read_text(encoding="utf-8")


def _write_text(text: str, destination) -> int:
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8", newline="")
    return len(text.encode("utf-8"))


# --- traces -------------------------------------------------------------------


def trace_to_text(trace: Trace) -> str:
    m = trace.meta
    values = (m.n_users, m.d_sim, m.d_day, m.granularity,
              "" if m.seed is None else m.seed, m.variant, m.version)
    lines = [f"#{k}={v}" for k, v in zip(_META_KEYS, values)]
    lines.append(",".join(TRACE_COLUMNS))
    lines.extend(f"{ev.i},{ev.j},{ev.start},{ev.end}" for ev in trace.events)
    return "\n".join(lines) + "\n"


def write_trace(trace: Trace, destination) -> int:
    """Write ``trace``; returns the number of bytes written."""
    return _write_text(trace_to_text(trace), destination)


def _int(text: str, what: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{what} is not an integer: {text!r}", line) from None


def read_trace(source) -> Trace:
    text = _read_text(source)
    meta: dict[str, str] = {}
    events: list[ContactEvent] = []
    pair_end: dict[tuple[int, int], int] = {}
    header_seen = False
    last_key = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if header_seen:
                raise ParseError("metadata after the column header", lineno)
            key, sep, value = line[1:].partition("=")
            if not sep or key.strip() not in _META_KEYS:
                raise ParseError(f"bad metadata line {raw!r}", lineno)
            meta[key.strip()] = value.strip()
            continue
        if not header_seen:
            if tuple(c.strip() for c in line.split(",")) != TRACE_COLUMNS:
                raise ParseError(f"expected column header {','.join(TRACE_COLUMNS)!r}", lineno)
            missing = [k for k in _META_KEYS if k not in meta]
            if missing:
                raise ParseError(f"missing metadata {missing}", lineno)
            header_seen = True
            m = TraceMeta(
                n_users=_int(meta["n_users"], "n_users", lineno),
                d_sim=_int(meta["D_sim"], "D_sim", lineno),
                d_day=_int(meta["D_day"], "D_day", lineno),
                granularity=_int(meta["granularity"], "granularity", lineno),
                seed=_int(meta["seed"], "seed", lineno) if meta["seed"] else None,
                variant=meta["variant"],
                version=meta["version"],
            )
            if m.granularity <= 0 or m.n_users < 1 or m.d_sim < 1 or m.d_day <= 0:
                raise ParseError("metadata values out of range", lineno)
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, got {len(fields)}", lineno)
        ev = ContactEvent(*(_int(f.strip(), name, lineno) for f, name in zip(fields, TRACE_COLUMNS)))
        key = sort_key(ev)
        if last_key is not None and key <= last_key:
            raise ParseError("rows are not strictly sorted by (start, i, j)", lineno)
        last_key = key
        try:
            validate_events([ev], m)
        except AssemblyError as exc:
            raise ParseError(str(exc), lineno) from None
        prev_end = pair_end.get((ev.i, ev.j))
        if prev_end is not None and ev.start <= prev_end:
            raise ParseError(f"pair {(ev.i, ev.j)}: contact overlaps the previous one", lineno)
        pair_end[(ev.i, ev.j)] = ev.end
        events.append(ev)
    if not header_seen:
        raise ParseError("no column header found")
    return Trace(tuple(events), m)


# --- importer -----------------------------------------------------------------


@dataclass(frozen=True)
class ImportSpec:
    """How to read an external contact CSV.

    The four ``*_col`` names select columns of the input header. Times are
    shifted by ``-time_origin`` and snapped outward to the ``granularity``
    grid. ``n_users`` / ``d_sim`` default to the smallest values that fit.
    Non-integer user labels are renumbered in sorted order when ``relabel``.
    """

    granularity: int
    i_col: str = "i"
    j_col: str = "j"
    start_col: str = "start"
    end_col: str = "end"
    d_day: int = 86400
    d_sim: int | None = None
    n_users: int | None = None
    time_origin: float = 0.0
    relabel: bool = False


def import_contacts(source, spec: ImportSpec) -> Trace:
    g = spec.granularity
    if g <= 0 or spec.d_day % g:
        raise ContactImportError("granularity must be > 0 and divide d_day")
    text = _read_text(source)
    body = "".join(ln for ln in text.splitlines(keepends=True) if not ln.lstrip().startswith("#"))
    reader = csv.DictReader(io.StringIO(body))
    cols = (spec.i_col, spec.j_col, spec.start_col, spec.end_col)
    header = reader.fieldnames or []
    unknown = [c for c in cols if c not in header]
    if unknown:
        raise ContactImportError(f"columns {unknown} not in input header {header}")
    raw = []
    for lineno, row in enumerate(reader, start=2):
        try:
            s = float(row[spec.start_col]) - spec.time_origin
            e = float(row[spec.end_col]) - spec.time_origin
        except (TypeError, ValueError):
            raise ContactImportError(f"line {lineno}: non-numeric time") from None
        if not (math.isfinite(s) and math.isfinite(e)):
            raise ContactImportError(f"line {lineno}: non-finite time")
        if e < s:
            raise ContactImportError(f"line {lineno}: negative duration ({s}, {e})")
        if s < 0:
            raise ContactImportError(f"line {lineno}: contact before the time origin")
        raw.append((row[spec.i_col].strip(), row[spec.j_col].strip(), s, e, lineno))

    if spec.relabel:
        labels = sorted({a for a, *_ in raw} | {b for _, b, *_ in raw})
        ids = {lab: k for k, lab in enumerate(labels)}
    else:
        ids = None
    per_pair: dict[tuple[int, int], list[list[int]]] = {}
    max_id = -1
    for a, b, s, e, lineno in raw:
        try:
            u, v = (ids[a], ids[b]) if ids else (int(a), int(b))
        except ValueError:
            raise ContactImportError(f"line {lineno}: non-integer user id (use relabel=True)") from None
        if u == v or u < 0 or v < 0:
            raise ContactImportError(f"line {lineno}: invalid user pair ({a}, {b})")
        u, v = min(u, v), max(u, v)
        max_id = max(max_id, v)
        start = math.floor(s / g)
        end = max(math.ceil(e / g), start + 1)
        per_pair.setdefault((u, v), []).append([start, end])

    n_users = spec.n_users if spec.n_users is not None else max(max_id + 1, 2)
    if max_id >= n_users:
        raise ContactImportError(f"user id {max_id} >= n_users={n_users}")
    last_end = max((e for spans in per_pair.values() for _, e in spans), default=0) * g
    d_sim = spec.d_sim if spec.d_sim is not None else max(1, math.ceil(last_end / spec.d_day))
    horizon = d_sim * spec.d_day // g

    events = []
    for (u, v), spans in per_pair.items():
        spans.sort()
        merged: list[list[int]] = []
        for s, e in spans:
            if s >= horizon:
                continue
            e = min(e, horizon)
            if merged and s <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], e)
            else:
                merged.append([s, e])
        events.extend(ContactEvent(u, v, s * g, e * g) for s, e in merged)
    events.sort(key=sort_key)
    meta = TraceMeta(n_users=n_users, d_sim=d_sim, d_day=spec.d_day, granularity=g,
                     seed=None, variant="imported", version="")
    validate_events(events, meta)
    return Trace(tuple(events), meta)


# --- config -------------------------------------------------------------------

# file key -> (SimConfig field, parser)
_CONFIG_KEYS = {
    "users": ("n_users", "int"),
    "d_sim_days": ("d_sim", "int"),
    "d_day_s": ("d_day", "int"),
    "mu_day_s": ("mu_day", "float"),
    "sigma_day_s": ("sigma_day", "float"),
    "granularity_s": ("granularity", "int"),
    "T_s": ("T", "float"),
    "gamma_a": (None, "float"),
    "gamma_b": (None, "float"),
    "T_e": ("T_e", "float"),
    "alpha_ict": ("alpha_ict", "float"),
    "alpha_c": ("alpha_c", "float"),
    "seed": ("seed", "int"),
    "variant": ("variant", "str"),
    "periodic": ("periodic", "bool"),
}
REQUIRED_CONFIG_KEYS = (
    "users", "d_sim_days", "d_day_s", "mu_day_s", "sigma_day_s", "granularity_s",
    "T_s", "gamma_a", "gamma_b", "T_e",
)


def _parse_value(key, kind, text, lineno):
    try:
        if kind == "int":
            try:
                return int(text)
            except ValueError:
                pass
            val = float(text)
            if not val.is_integer():
                raise ValueError
            return int(val)
        if kind == "float":
            return float(text)
        if kind == "bool":
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        return text
    except ValueError:
        raise ParseError(f"{key}: cannot parse {text!r} as {kind}", lineno) from None


def parse_config(text: str) -> SimConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ParseError(f"expected key=value, got {raw!r}", lineno)
        if key not in _CONFIG_KEYS:
            raise ParseError(f"unknown config key {key!r}", lineno)
        if key in values:
            raise ParseError(f"duplicate config key {key!r}", lineno)
        values[key] = _parse_value(key, _CONFIG_KEYS[key][1], value, lineno)
    missing = [k for k in REQUIRED_CONFIG_KEYS if k not in values]
    if missing:
        raise ParseError(f"missing required config key(s): {', '.join(missing)}")
    kwargs = {_CONFIG_KEYS[k][0]: v for k, v in values.items() if _CONFIG_KEYS[k][0]}
    try:
        kwargs["gamma"] = GammaParams(values["gamma_a"], values["gamma_b"])
        return SimConfig(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"invalid config: {exc}") from None


def load_config(source) -> SimConfig:
    return parse_config(_read_text(source))


def config_to_text(config: SimConfig) -> str:
    rows = [
        ("users", config.n_users),
        ("d_sim_days", config.d_sim),
        ("d_day_s", config.d_day),
        ("mu_day_s", repr(float(config.mu_day))),
        ("sigma_day_s", repr(float(config.sigma_day))),
        ("granularity_s", config.granularity),
        ("T_s", repr(float(config.T))),
        ("gamma_a", repr(float(config.gamma.shape))),
        ("gamma_b", repr(float(config.gamma.rate))),
        ("T_e", repr(float(config.T_e))),
        ("alpha_ict", repr(float(config.alpha_ict))),
        ("alpha_c", repr(float(config.alpha_c))),
    ]
    if config.seed is not None:
        rows.append(("seed", config.seed))
    rows.append(("variant", config.variant))
    rows.append(("periodic", "true" if config.periodic else "false"))
    return "".join(f"{k}={v}\n" for k, v in rows)


def write_config(config: SimConfig, destination) -> int:
    return _write_text(config_to_text(config), destination)
