"""INI-style run configuration with [network], [estimator], [sweep] and [train] sections.

Example::

    [network]
    input_dim = 8
    widths = 4, 4
    budgets = 1, 1, 1
    activation = tanh
    input_bound = 1

    [sweep]
    types = I, II, III
    rho = 0.1, 0.25, 0.5, 1.0
    n = 32, 128
    k = 0, 1, 2

Unknown sections or keys raise ``ConfigError``.
"""

import configparser
import io
from dataclasses import dataclass, field, fields

from ..bounds import LossSpec
from ..estimator import EstimatorConfig
from ..masks import DropoutType
from ..network import NetworkSpec
from .training import TrainConfig

DISTRIBUTIONS = ("unit_sphere", "scaled_gaussian_projected")


class ConfigError(ValueError):
    pass


def _floats(text):
    return tuple(float(v) for v in _items(text))


def _ints(text):
    return tuple(int(v) for v in _items(text))


def _items(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _join(values):
    return ", ".join(repr(v) if isinstance(v, float) else str(v) for v in values)


NETWORK_KEYS = {
    "input_dim": int,
    "widths": _ints,
    "budgets": _floats,
    "activation": str,
    "input_bound": float,
}

ESTIMATOR_KEYS = {
    "n_epsilon_draws": int,
    "n_restarts": int,
    "ascent_steps": int,
    "step_size": float,
    "step_decay": float,
    "n_outer_replicates": int,
    "use_absconv_reduction": _bool,
    "rng_seed": int,
}

SWEEP_KEYS = {
    "types": lambda t: tuple(DropoutType.parse(v).value for v in _items(t)),
    "rho": _floats,
    "n": _ints,
    "k": _ints,
    "width": int,
    "distribution": str,
    "master_seed": int,
    "output": str,
}

TRAIN_KEYS = {
    "epochs": int,
    "learning_rate": float,
    "batch_size": int,
    "n_train": int,
    "n_test": int,
    "dropout_type": lambda t: None if t.strip().lower() in ("none", "") else t.strip(),
    "keep_probability": float,
    "init_scale": float,
    "noise": float,
    "loss": str,
    "y_bound": float,
    "p_min": float,
    "delta": float,
    "trials": int,
    "master_seed": int,
}

SECTIONS = {
    "network": NETWORK_KEYS,
    "estimator": ESTIMATOR_KEYS,
    "sweep": SWEEP_KEYS,
    "train": TRAIN_KEYS,
}


@dataclass(frozen=True)
class SweepConfig:
    spec: NetworkSpec
    dropout_types: tuple = ("I", "II", "III")
    rho_grid: tuple = (0.1, 0.25, 0.5, 1.0)
    n_grid: tuple = (32, 128)
    k_grid: tuple = (0, 1, 2)
    width: int = None
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    distribution: str = "unit_sphere"
    master_seed: int = 0
    output_path: str = None

    def __post_init__(self):
        for name in ("dropout_types", "rho_grid", "n_grid", "k_grid"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"{name} must be non-empty")
        if any(not 0 < r <= 1 for r in self.rho_grid):
            raise ConfigError("every rho must lie in (0, 1]")
        if any(n < 1 for n in self.n_grid):
            raise ConfigError("every n must be >= 1")
        if any(k < 0 for k in self.k_grid):
            raise ConfigError("every k must be >= 0")
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigError(f"unknown distribution {self.distribution!r}; expected {DISTRIBUTIONS}")
        object.__setattr__(
            self, "dropout_types", tuple(DropoutType.parse(t).value for t in self.dropout_types)
        )

    def spec_for_depth(self, k):
        return self.spec.with_depth(k, self.width)


@dataclass(frozen=True)
class GapConfig:
    spec: NetworkSpec
    train: TrainConfig
    delta: float = 0.05
    trials: int = 100
    master_seed: int = 0


def _parse_section(parser, section, keys):
    if not parser.has_section(section):
        return {}
    out = {}
    for key, raw in parser.items(section):
        if key not in keys:
            raise ConfigError(f"unknown key {key!r} in [{section}]")
        try:
            out[key] = keys[key](raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {section}.{key}: {raw!r} ({exc})") from None
    return out


def read_config(text):
    """Parse config text into a dict of typed per-section dicts."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser.read_string(text)
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
    return {name: _parse_section(parser, name, keys) for name, keys in SECTIONS.items()}


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return read_config(fh.read())


def spec_from_section(values):
    if "input_dim" not in values:
        raise ConfigError("[network] needs input_dim")
    try:
        return NetworkSpec(**values)
    except ValueError as exc:
        raise ConfigError(f"invalid [network]: {exc}") from None


def spec_to_text(spec):
    """Serialize a NetworkSpec as a [network] section."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser["network"] = {
        "input_dim": str(spec.input_dim),
        "widths": _join(spec.widths),
        "budgets": _join(spec.budgets),
        "activation": spec.activation,
        "input_bound": repr(spec.input_bound),
    }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def spec_from_text(text):
    return spec_from_section(read_config(text)["network"])


def sweep_config(sections, seed=None, output=None):
    spec = spec_from_section(sections["network"])
    est = EstimatorConfig(**sections["estimator"])
    sw = dict(sections["sweep"])
    kwargs = {
        "spec": spec,
        "estimator": est,
        "dropout_types": sw.pop("types", SweepConfig.dropout_types),
        "rho_grid": sw.pop("rho", SweepConfig.rho_grid),
        "n_grid": sw.pop("n", SweepConfig.n_grid),
        "k_grid": sw.pop("k", SweepConfig.k_grid),
        "output_path": sw.pop("output", None),
    }
    kwargs.update(sw)
    if seed is not None:
        kwargs["master_seed"] = seed
    if output is not None:
        kwargs["output_path"] = output
    return SweepConfig(**kwargs)


def gap_config(sections, seed=None):
    spec = spec_from_section(sections["network"])
    tr = dict(sections["train"])
    loss = LossSpec(
        kind=tr.pop("loss", "square"),
        y_bound=tr.pop("y_bound", 1.0),
        p_min=tr.pop("p_min", 1e-6),
    )
    delta = tr.pop("delta", 0.05)
    trials = tr.pop("trials", 100)
    master = tr.pop("master_seed", 0)
    if seed is not None:
        master = seed
    return GapConfig(spec=spec, train=TrainConfig(loss=loss, **tr), delta=delta, trials=trials, master_seed=master)


def echo(obj):
    """Plain-data echo of a config dataclass, for JSON summaries."""
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: echo(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [echo(v) for v in obj]
    return obj
