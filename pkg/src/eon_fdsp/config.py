"""Run configuration files.

An INI document with these sections (all keys optional)::

    [run]
    topology = germany50          ; bundled name or path relative to this file
    slot_count = 256
    slot_width_ghz = 12.5
    guard_slots = 1
    k = 5
    requests_per_run = 5000
    failure_at = 3000
    failure_count = 4
    replications = 10
    seed = 1
    policies = fdsp, fdfs
    output = results
    threads = 0                   ; 0 means one worker per CPU

    [traffic]
    loads = 50:1000:50            ; start:stop:step (inclusive) or a comma list
    mean_holding_s = 3600
    priority_weights = 25, 40, 35
    bit_rates = 100, 200, 400

    [modulation]                  ; format name = bits/s/Hz per polarization
    PM-QPSK = 2
    PM-16QAM = 3
    PM-64QAM = 6

    [reach]                       ; bit rate = reach in km per format, same order
    100 = 5190, 2324, 876
    200 = 2595, 1162, 438
    400 = 1298, 581, 219
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from eon_fdsp.rsa import DEFAULT_FORMATS, DEFAULT_REACH_KM, ModulationFormat, ReachTable


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _number(x: float):
    return int(x) if float(x).is_integer() else x


def parse_loads(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigError(f"bad load range {text!r}; expected start:stop:step")
        start, stop, step = parts
        n = int(round((stop - start) / step))
        loads = [start + i * step for i in range(n + 1) if start + i * step <= stop + 1e-9]
    else:
        loads = list(_floats(text))
    return tuple(_number(x) for x in loads)


@dataclass(frozen=True)
class RunConfig:
    topology: str = "germany50"
    slot_count: int = 256
    slot_width_ghz: float = 12.5
    guard_slots: int = 1
    k: int = 5
    formats: tuple[ModulationFormat, ...] = DEFAULT_FORMATS
    reach_km: dict = field(default_factory=lambda: dict(DEFAULT_REACH_KM))
    loads: tuple[float, ...] = tuple(range(50, 1001, 50))
    mean_holding_s: float = 3600.0
    priority_weights: tuple[float, float, float] = (25, 40, 35)
    bit_rates: tuple[int, ...] = (100, 200, 400)
    requests_per_run: int = 5000
    failure_at: int = 3000
    failure_count: int = 4
    replications: int = 10
    seed: int = 1
    policies: tuple[str, ...] = ("fdsp", "fdfs")
    output: str = "results"
    threads: int = 0

    def validate(self) -> RunConfig:
        if not self.failure_at < self.requests_per_run:
            raise ConfigError("failure_at must be smaller than requests_per_run")
        if self.failure_at < 0:
            raise ConfigError("failure_at must be non-negative")
        if not self.loads or any(x <= 0 for x in self.loads):
            raise ConfigError("loads must be positive")
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        if not 1 <= self.failure_count:
            raise ConfigError("failure_count must be at least 1")
        if self.k < 1 or self.slot_count < 1 or self.guard_slots < 0:
            raise ConfigError("k and slot_count must be positive, guard_slots non-negative")
        if self.threads < 0:
            raise ConfigError("threads must be non-negative")
        if self.mean_holding_s <= 0:
            raise ConfigError("mean_holding_s must be positive")
        if len(self.priority_weights) != 3 or any(w <= 0 for w in self.priority_weights):
            raise ConfigError("priority_weights needs three positive values")
        if not self.policies or any(p not in ("fdsp", "fdfs") for p in self.policies):
            raise ConfigError(f"unknown policy in {self.policies}")
        try:
            table = self.reach_table()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        missing = set(self.bit_rates) - set(table.bit_rates)
        if missing:
            raise ConfigError(f"no reach data for bit rates {sorted(missing)}")
        return self

    def reach_table(self) -> ReachTable:
        return ReachTable(self.reach_km, self.formats)

    def worker_count(self) -> int:
        return self.threads or os.cpu_count() or 1

    def with_overrides(self, **changes) -> RunConfig:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_text(self) -> str:
        """Normalized INI rendering; parsing it back gives an equal config."""
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["run"] = {
            "topology": self.topology,
            "slot_count": str(self.slot_count),
            "slot_width_ghz": repr(self.slot_width_ghz),
            "guard_slots": str(self.guard_slots),
            "k": str(self.k),
            "requests_per_run": str(self.requests_per_run),
            "failure_at": str(self.failure_at),
            "failure_count": str(self.failure_count),
            "replications": str(self.replications),
            "seed": str(self.seed),
            "policies": ", ".join(self.policies),
            "output": self.output,
            "threads": str(self.threads),
        }
        cp["traffic"] = {
            "loads": ", ".join(str(x) for x in self.loads),
            "mean_holding_s": repr(self.mean_holding_s),
            "priority_weights": ", ".join(str(_number(w)) for w in self.priority_weights),
            "bit_rates": ", ".join(str(b) for b in self.bit_rates),
        }
        cp["modulation"] = {f.name: str(_number(f.se_per_pol)) for f in self.formats}
        rates = sorted({rate for rate, _ in self.reach_km})
        cp["reach"] = {
            str(rate): ", ".join(str(_number(self.reach_km[rate, f.name])) for f in self.formats) for rate in rates
        }
        lines = []
        for name in cp.sections():
            lines.append(f"[{name}]")
            lines.extend(f"{key} = {value}" for key, value in cp[name].items())
            lines.append("")
        return "\n".join(lines)


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    unknown = set(cp.sections()) - {"run", "traffic", "modulation", "reach"}
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    kw: dict = {}
    try:
        if cp.has_section("run"):
            run = cp["run"]
            ints = ("slot_count", "guard_slots", "k", "requests_per_run", "failure_at",
                    "failure_count", "replications", "seed", "threads")
            for key in run:
                if key in ints:
                    kw[key] = int(run[key])
                elif key == "slot_width_ghz":
                    kw[key] = float(run[key])
                elif key == "policies":
                    kw[key] = tuple(p.strip().lower() for p in run[key].split(",") if p.strip())
                elif key in ("topology", "output"):
                    kw[key] = run[key].strip()
                else:
                    raise ConfigError(f"unknown key [run] {key}")
            topo = kw.get("topology")
            if topo and base_dir is not None and not Path(topo).is_absolute() and (base_dir / topo).exists():
                kw["topology"] = str(base_dir / topo)
        if cp.has_section("traffic"):
            tr = cp["traffic"]
            for key in tr:
                if key == "loads":
                    kw[key] = parse_loads(tr[key])
                elif key == "mean_holding_s":
                    kw[key] = float(tr[key])
                elif key == "priority_weights":
                    kw[key] = tuple(_number(x) for x in _floats(tr[key]))
                elif key == "bit_rates":
                    kw[key] = tuple(int(x) for x in _floats(tr[key]))
                else:
                    raise ConfigError(f"unknown key [traffic] {key}")
        formats = DEFAULT_FORMATS
        if cp.has_section("modulation"):
            formats = tuple(ModulationFormat(name, _number(float(v))) for name, v in cp["modulation"].items())
            kw["formats"] = formats
        if cp.has_section("reach"):
            reach = {}
            for rate, values in cp["reach"].items():
                row = _floats(values)
                if len(row) != len(formats):
                    raise ConfigError(f"[reach] {rate} needs {len(formats)} values")
                for fmt, km in zip(formats, row):
                    reach[int(rate), fmt.name] = _number(km)
            kw["reach_km"] = reach
        elif "formats" in kw:
            raise ConfigError("a custom [modulation] section needs a matching [reach] section")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    return RunConfig(**kw).validate()


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), base_dir=path.parent)
