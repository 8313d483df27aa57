"""JSON scenario / sweep configuration.

Schema (every key optional; defaults in brackets)::

    {
      "sr": {"eta": 2.2, "mu": 2, "n_antennas": 2, "avg_snr_db": 0.0, "format": "I"},
      "se": {... same keys as sr ...},
      "rd": {"preset": "test-vector-A",            # or explicit omega/lambda/a/b/c
             "detection": "HD", "avg_snr_db": 15.0},
      "n_s": 1,
      "target_rate_bits": 0.01,
      "presets": "water.json",                     # optional PresetTable file
      "sweep": {"variable": "phi_r_db", "grid": [0, 10, 20],
                "metrics": ["SOP_L"], "engines": ["analytic", "mc"],
                "mc_samples": 100000}
    }

Average SNRs may be given linearly (``avg_snr``) or in dB (``avg_snr_db``),
never both.  dB values are converted here and nowhere else.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .battery import TEST_VECTORS
from .errors import ParseError, ValidationError
from .params import MeggParams, RfLinkParams, SystemConfig, db_to_linear

SWEEP_VARIABLES = (
    "phi_r_db", "phi_e_db", "phi_d_db", "psi_r_db", "n_s", "n_r", "n_e",
    "eta_r", "eta_e", "mu_r", "mu_e", "target_rate",
)
SWEEP_METRICS = ("ASC", "SOP_L", "SPSC")
ENGINES = ("analytic", "mc")

_RF_DEFAULT = {"eta": 2.2, "mu": 2, "n_antennas": 2, "avg_snr_db": 0.0, "format": "I"}
_RD_DEFAULT = {"preset": "test-vector-A", "detection": "HD", "avg_snr_db": 15.0}
_MEGG_FIELDS = ("omega", "lambda", "a", "b", "c")


class PresetTable:
    """Named (omega, lambda, a, b, c) records for the optical hop.

    Ships empty: measured water-condition values must come from a user file
    ``{"<label>": {"omega": .., "lambda": .., "a": .., "b": .., "c": ..}}``.
    """

    def __init__(self, records: dict[str, dict[str, float]] | None = None):
        self._records: dict[str, dict[str, float]] = {}
        for label, rec in (records or {}).items():
            self.add(label, rec)

    def add(self, label: str, rec: dict):
        missing = [k for k in _MEGG_FIELDS if k not in rec]
        if missing:
            raise ValidationError(f"preset {label!r} lacks {', '.join(missing)}")
        vals = {k: float(rec[k]) for k in _MEGG_FIELDS}
        # validate against the MeggParams invariants
        MeggParams(vals["omega"], vals["lambda"], vals["a"], vals["b"], vals["c"])
        self._records[label] = vals

    def __contains__(self, label):
        return label in self._records

    def __len__(self):
        return len(self._records)

    def get(self, label: str) -> dict[str, float]:
        return dict(self._records[label])

    @classmethod
    def from_file(cls, path) -> "PresetTable":
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc.msg}", line=exc.lineno) from None
        if not isinstance(data, dict):
            raise ParseError(f"{path}: top level must be an object", line=1)
        return cls(data)


@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    variable: str | None = None
    grid: tuple = ()
    metrics: tuple = SWEEP_METRICS
    engines: tuple = ("analytic",)
    mc_samples: int = 100_000
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.variable is not None:
            if self.variable not in SWEEP_VARIABLES:
                raise ValidationError(f"unknown sweep variable {self.variable!r}")
            g = [float(v) for v in self.grid]
            if not g:
                raise ValidationError("sweep grid is empty")
            steps = [b - a for a, b in zip(g, g[1:])]
            if not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
                raise ValidationError("sweep grid must be strictly monotone")
            object.__setattr__(self, "grid", tuple(g))
        for m in self.metrics:
            if m not in SWEEP_METRICS:
                raise ValidationError(f"unknown metric {m!r}; expected {SWEEP_METRICS}")
        for e in self.engines:
            if e not in ENGINES:
                raise ValidationError(f"unknown engine {e!r}; expected {ENGINES}")
        if not self.metrics or not self.engines:
            raise ValidationError("metrics and engines must be nonempty")
        if "mc" in self.engines and int(self.mc_samples) < 1000:
            raise ValidationError("mc_samples must be >= 1000 when the mc engine is selected")
        object.__setattr__(self, "metrics", tuple(self.metrics))
        object.__setattr__(self, "engines", tuple(self.engines))
        object.__setattr__(self, "mc_samples", int(self.mc_samples))


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


class _Reader:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source

    def fail(self, msg: str, key: str):
        raise ParseError(f"{self.source}: {msg}", line=_line_of(self.text, key), field=key)

    def obj(self, parent: dict, key: str) -> dict:
        v = parent.get(key, {})
        if not isinstance(v, dict):
            self.fail(f"'{key}' must be an object", key)
        return v

    def number(self, d: dict, key: str, where: str):
        v = d[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"{where}.{key} must be a number, got {v!r}", key)
        return v

    def check_keys(self, d: dict, allowed, where: str):
        for k in d:
            if k not in allowed:
                self.fail(f"unknown field {where}.{k}", k)


def _snr(reader: _Reader, d: dict, where: str, default_db: float) -> float:
    has_lin, has_db = "avg_snr" in d, "avg_snr_db" in d
    if has_lin and has_db:
        reader.fail(f"{where}: give avg_snr or avg_snr_db, not both", "avg_snr_db")
    if has_lin:
        return float(reader.number(d, "avg_snr", where))
    if has_db:
        return db_to_linear(float(reader.number(d, "avg_snr_db", where)))
    return db_to_linear(default_db)


def _rf(reader: _Reader, d: dict, where: str) -> RfLinkParams:
    reader.check_keys(d, ("eta", "mu", "n_antennas", "avg_snr", "avg_snr_db", "format"), where)
    merged = {**_RF_DEFAULT, **{k: v for k, v in d.items() if k not in ("avg_snr", "avg_snr_db")}}
    for k in ("eta", "mu", "n_antennas"):
        reader.number(merged, k, where)
    snr = _snr(reader, d, where, _RF_DEFAULT["avg_snr_db"])
    try:
        return RfLinkParams(merged["eta"], merged["mu"], merged["n_antennas"], snr, merged["format"])
    except ValidationError as exc:
        raise type(exc)(f"{where}: {exc}") from None


def _rd(reader: _Reader, d: dict, presets: PresetTable) -> MeggParams:
    reader.check_keys(d, ("preset", "detection", "avg_snr", "avg_snr_db") + _MEGG_FIELDS, "rd")
    explicit = [k for k in _MEGG_FIELDS if k in d]
    if explicit:
        if len(explicit) != len(_MEGG_FIELDS):
            missing = sorted(set(_MEGG_FIELDS) - set(explicit))
            reader.fail(f"rd: explicit mEGG parameters need all of {_MEGG_FIELDS}; missing {missing}",
                        explicit[0])
        vec = {k: float(reader.number(d, k, "rd")) for k in _MEGG_FIELDS}
        label = d.get("preset")
    else:
        label = d.get("preset", _RD_DEFAULT["preset"])
        if label in presets:
            vec = presets.get(label)
        elif label in TEST_VECTORS:
            v = TEST_VECTORS[label]
            vec = {"omega": v["omega"], "lambda": v["lam"], "a": v["a"], "b": v["b"], "c": v["c"]}
        else:
            reader.fail(f"rd: unknown preset {label!r}", "preset")
    snr = _snr(reader, d, "rd", _RD_DEFAULT["avg_snr_db"])
    try:
        return MeggParams(vec["omega"], vec["lambda"], vec["a"], vec["b"], vec["c"],
                          d.get("detection", _RD_DEFAULT["detection"]), snr, label)
    except ValidationError as exc:
        raise type(exc)(f"rd: {exc}") from None


def parse_config(text: str, source: str = "<config>", base_dir: Path | None = None) -> SweepSpec:
    """Parse configuration text into a SweepSpec (``variable=None`` for a single point)."""
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: {exc.msg}", line=exc.lineno) from None
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be an object", line=1)
    reader = _Reader(text, source)
    reader.check_keys(data, ("sr", "se", "rd", "n_s", "target_rate_bits", "presets", "sweep", "name"), "")

    presets = PresetTable()
    if "presets" in data:
        ppath = Path(data["presets"])
        if base_dir is not None and not ppath.is_absolute():
            ppath = base_dir / ppath
        presets = PresetTable.from_file(ppath)

    sr = _rf(reader, reader.obj(data, "sr"), "sr")
    se = _rf(reader, reader.obj(data, "se"), "se")
    rd = _rd(reader, reader.obj(data, "rd"), presets)
    n_s = data.get("n_s", 1)
    rate = data.get("target_rate_bits", 0.01)
    for key, v in (("n_s", n_s), ("target_rate_bits", rate)):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            reader.fail(f"{key} must be a number, got {v!r}", key)
    base = SystemConfig(sr, se, rd, n_s, rate)

    sw = reader.obj(data, "sweep")
    reader.check_keys(sw, ("variable", "grid", "metrics", "engines", "mc_samples"), "sweep")
    grid = sw.get("grid", [])
    if not isinstance(grid, list):
        reader.fail("sweep.grid must be a list", "grid")
    for v in grid:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            reader.fail(f"sweep.grid entries must be finite numbers, got {v!r}", "grid")
    variable = sw.get("variable")
    if variable is None and grid:
        reader.fail("sweep.grid given without sweep.variable", "grid")
    return SweepSpec(
        base=base,
        variable=variable,
        grid=tuple(grid),
        metrics=tuple(sw.get("metrics", SWEEP_METRICS)),
        engines=tuple(sw.get("engines", ("analytic",))),
        mc_samples=sw.get("mc_samples", 100_000),
    )


def load_config(path) -> SweepSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return parse_config(text, str(path), path.parent)


def load_system_config(path) -> SystemConfig:
    return load_config(path).base
