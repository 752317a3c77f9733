"""Run configuration: flat dotted ``key = value`` text files.

Example::

    # minimal
    run.strategies = uniform, ddsc
    run.epochs = 40
    run.seeds = 20
    schedule.lambda_min = 0.2

``run.seeds`` is either a count ``N`` (seeds ``0..N-1``) or a comma list.
"""

from dataclasses import dataclass, field, fields, replace
import hashlib

from .bench.data import SyntheticDatasetSpec
from .bench.runner import ModelConfig
from .bench.strategies import STRATEGIES
from .schedule import ScheduleConfig

REQUIRED = ("run.strategies", "run.epochs", "run.seeds")


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class RunSettings:
    strategies: tuple = ()
    epochs: int = 0
    seeds: tuple = ()
    out: str = ""
    checkpoints: bool = False


@dataclass(frozen=True)
class RunConfig:
    dataset: SyntheticDatasetSpec = field(default_factory=SyntheticDatasetSpec)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    run: RunSettings = field(default_factory=RunSettings)

    def digest(self) -> str:
        text = dump_config(self, include_out=False)
        return hashlib.sha1(text.encode()).hexdigest()[:10]


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


def parse_seeds(text):
    text = str(text).strip()
    if "," in text:
        return tuple(int(s) for s in text.split(",") if s.strip())
    n = int(text)
    if n < 1:
        raise ValueError("seed count must be >= 1")
    return tuple(range(n))


def _parse_strategies(text):
    names = tuple(s.strip() for s in str(text).split(",") if s.strip())
    if not names:
        raise ValueError("empty strategy list")
    for s in names:
        if s not in STRATEGIES:
            raise ValueError(f"unknown strategy {s!r} (choose from {', '.join(STRATEGIES)})")
    if len(set(names)) != len(names):
        raise ValueError("duplicate strategy")
    return names


_SECTIONS = {
    "dataset": SyntheticDatasetSpec,
    "schedule": ScheduleConfig,
    "model": ModelConfig,
    "run": RunSettings,
}
_SPECIAL = {
    "run.seeds": parse_seeds,
    "run.strategies": _parse_strategies,
    "run.checkpoints": _parse_bool,
}


def known_keys():
    keys = []
    for sec, cls in _SECTIONS.items():
        for f in fields(cls):
            if sec == "schedule" and f.name == "T":
                continue  # comes from run.epochs
            keys.append(f"{sec}.{f.name}")
    return keys


def _coerce(key, text):
    if key in _SPECIAL:
        return _SPECIAL[key](text)
    sec, name = key.split(".", 1)
    typ = {f.name: f.type for f in fields(_SECTIONS[sec])}[name]
    typ = typ if isinstance(typ, type) else {"int": int, "float": float, "str": str, "bool": bool}[typ]
    if typ is bool:
        return _parse_bool(text)
    if typ is int:
        return int(text)
    if typ is float:
        return float(text)
    return str(text)


def read_config_text(text, source="<config>"):
    """Parse ``key = value`` lines into a dict of raw strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(" #", 1)[0].strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}", f"expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
            value = value[1:-1]
        if key in out:
            raise ConfigError(key, "duplicate key")
        out[key] = value
    return out


def build_config(raw: dict) -> RunConfig:
    """Validate raw string values and resolve defaults."""
    allowed = set(known_keys())
    for key in raw:
        if key not in allowed:
            raise ConfigError(key, "unknown key")
    for key in REQUIRED:
        if key not in raw or str(raw[key]).strip() == "":
            raise ConfigError(key, "missing required field")
    values = {sec: {} for sec in _SECTIONS}
    for key, text in raw.items():
        sec, name = key.split(".", 1)
        try:
            values[sec][name] = _coerce(key, text)
        except (ValueError, KeyError) as exc:
            raise ConfigError(key, f"invalid value {text!r}: {exc}") from None

    run = RunSettings(**values["run"])
    if run.epochs < 1:
        raise ConfigError("run.epochs", "must be >= 1")
    dataset = SyntheticDatasetSpec(**values["dataset"])
    model = ModelConfig(**values["model"])
    for sec, obj in (("dataset", dataset), ("model", model)):
        try:
            obj.validate()
        except ValueError as exc:
            name, _, msg = str(exc).partition(": ")
            raise ConfigError(f"{sec}.{name}", msg) from None
    try:
        schedule = ScheduleConfig(T=run.epochs, **values["schedule"])
    except ValueError as exc:
        name, _, msg = str(exc).partition(": ")
        raise ConfigError(f"schedule.{name}", msg) from None
    if dataset.n_train_per_cell < 1:
        raise ConfigError("dataset.label_fraction", "leaves empty (class, device) cells; "
                          "increase dataset.n_per_class_device")
    return RunConfig(dataset, schedule, model, run)


def _fmt_value(v):
    if isinstance(v, bool):
        return "on" if v else "off"
    if isinstance(v, tuple):
        return ", ".join(str(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_config(cfg: RunConfig, include_out=True) -> str:
    """Resolved config as flat dotted keys, readable by :func:`read_config_text`."""
    lines = []
    for sec in _SECTIONS:
        obj = getattr(cfg, sec)
        for f in fields(obj):
            key = f"{sec}.{f.name}"
            if key == "schedule.T" or (key == "run.out" and not include_out):
                continue
            value = getattr(obj, f.name)
            if key == "run.seeds":
                value = tuple(value)
                # a single explicit seed needs the trailing comma to stay a list
                lines.append(f"{key} = {', '.join(map(str, value))}{',' if len(value) == 1 else ''}")
                continue
            lines.append(f"{key} = {_fmt_value(value)}")
    return "\n".join(lines) + "\n"


def with_out(cfg: RunConfig, out: str) -> RunConfig:
    return replace(cfg, run=replace(cfg.run, out=str(out)))
