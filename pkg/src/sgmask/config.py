"""Run-config files: INI sections of flat ``key = value`` pairs.

Lists are comma separated. Relative paths resolve against the config file's
directory. See README.md for the full key reference.
"""
from __future__ import annotations

import configparser
from dataclasses import replace
from pathlib import Path

from .baselines import DEFAULT_CENTRAL, DEFAULT_DRAWS, DEFAULT_WIDTHS, VDParams
from .core import DesignConfig, Line, lines_for_rate
from .decoders import Decoder, DecoderSpec
from .metrics import METRIC_IDS, MetricSpec
from .phantom import add_image_noise, phantom_suite, read_volume, split_dataset, suite_specs


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


class RunConfig:
    def __init__(self, parser: configparser.ConfigParser, base: Path):
        self.parser = parser
        self.base = base

    @classmethod
    def load(cls, path) -> RunConfig:
        path = Path(path)
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ConfigError("--config", str(exc)) from None
        return cls(parser, path.resolve().parent)

    @classmethod
    def from_string(cls, text: str, base=".") -> RunConfig:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        parser.read_string(text)
        return cls(parser, Path(base).resolve())

    # ------------------------------------------------------------------ getters

    def has(self, section, key=None) -> bool:
        if not self.parser.has_section(section):
            return False
        return key is None or self.parser.has_option(section, key)

    def raw(self, section, key, default=None):
        if self.has(section, key):
            return self.parser.get(section, key).strip()
        if default is None:
            raise ConfigError(f"{section}.{key}", "missing")
        return default

    def get_int(self, section, key, default=None) -> int:
        val = self.raw(section, key, None if default is None else str(default))
        try:
            return int(val)
        except ValueError:
            raise ConfigError(f"{section}.{key}", f"expected an integer, got {val!r}") from None

    def get_float(self, section, key, default=None) -> float:
        val = self.raw(section, key, None if default is None else repr(default))
        try:
            return float(val)
        except ValueError:
            raise ConfigError(f"{section}.{key}", f"expected a number, got {val!r}") from None

    def get_list(self, section, key, conv=str, default=None) -> list:
        if not self.has(section, key):
            if default is None:
                raise ConfigError(f"{section}.{key}", "missing")
            return list(default)
        text = self.parser.get(section, key)
        items = [s.strip() for s in text.replace("\n", ",").split(",") if s.strip()]
        try:
            return [conv(s) for s in items]
        except ValueError:
            raise ConfigError(f"{section}.{key}", f"cannot parse list {text.strip()!r}") from None

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base / p

    # ----------------------------------------------------------------- objects

    def metric(self, override=None) -> MetricSpec:
        ident = override or self.raw("metric", "id", "psnr")
        if ident.lower() not in METRIC_IDS:
            raise ConfigError("metric.id", f"unknown metric {ident!r}")
        return MetricSpec(ident)

    def decoder(self) -> Decoder:
        if not self.has("decoder"):
            return Decoder(DecoderSpec("zf"))
        try:
            return Decoder(DecoderSpec.from_config(self.parser["decoder"]))
        except KeyError:
            raise ConfigError("decoder.id", "missing") from None
        except ValueError as exc:
            raise ConfigError("decoder", str(exc)) from None

    def volumes(self, role: str):
        """Training or test volumes from files, or a generated phantom suite."""
        if self.has("data", role):
            out = []
            for p in self.get_list("data", role):
                full = self.path(p)
                if not full.exists():
                    raise FileNotFoundError(f"volume file not found: {full}")
                out.append(read_volume(full))
            return self._maybe_noise(out, role)
        n_train = self.get_int("data", "train_count", 3)
        n_test = self.get_int("data", "test_count", 2)
        N = self.get_int("data", "N", 32)
        T = self.get_int("data", "T", 8)
        seed = self.get_int("data", "phantom_seed", 0)
        vols = phantom_suite(n_train + n_test, N, T, seed=seed)
        train, test = split_dataset(vols, n_train, n_test)
        return self._maybe_noise(train if role == "train" else test, role)

    def _maybe_noise(self, vols, role):
        sigma = self.get_float("data", "noise_sigma", 0.0) if self.has("data") else 0.0
        if sigma == 0.0:
            return vols
        seed = self.get_int("data", "noise_seed", 0)
        offset = 0 if role == "train" else 10_000
        return [add_image_noise(v, sigma, seed + offset + i) for i, v in enumerate(vols)]

    def design(self, dims, seed_override=None) -> tuple:
        """Return (DesignConfig at the largest budget, list of budgets)."""
        N, T = dims
        sec = "design"
        if not self.has(sec):
            raise ConfigError("design", "section missing")
        variant = self.raw(sec, "variant", "SG").upper()
        mode = self.raw(sec, "training_mode", "v2").lower()
        if self.has(sec, "budget"):
            budgets = [self.get_int(sec, "budget")]
        else:
            rates = self.get_list(sec, "rates", float)
            if not rates:
                raise ConfigError("design.rates", "empty list")
            for r in rates:
                if not 0 <= r <= 1:
                    raise ConfigError("design.rates", f"rate {r} outside [0, 1]")
            budgets = sorted(lines_for_rate(r, N, T) for r in rates)
        warm = []
        if self.has(sec, "warm_start"):
            for pair in self.raw(sec, "warm_start").split(";"):
                if pair.strip():
                    try:
                        t, y = pair.split()
                        warm.append(Line(int(t), int(y)))
                    except ValueError:
                        raise ConfigError("design.warm_start", f"bad pair {pair.strip()!r}") from None
        seed = seed_override if seed_override is not None else self.get_int(sec, "seed", 0)
        try:
            cfg = DesignConfig(
                variant=variant,
                training_mode=mode,
                n=max(budgets),
                k=self.get_int(sec, "k", N),
                l=self.get_int(sec, "l", 1),
                seed=seed,
                warm_start=tuple(warm),
            )
        except ValueError as exc:
            raise ConfigError("design", str(exc)) from None
        return cfg, budgets

    def grid(self, section, rate):
        widths = self.get_list(section, "widths", float, DEFAULT_WIDTHS)
        central = self.get_list(section, "central", int, DEFAULT_CENTRAL)
        try:
            return [VDParams(w, c, rate) for w in widths for c in central]
        except ValueError as exc:
            raise ConfigError(f"{section}.widths", str(exc)) from None

    def draws(self, section) -> int:
        return self.get_int(section, "draws", DEFAULT_DRAWS)


def phantom_specs(cfg: RunConfig):
    """Phantom specs from a ``[phantom]`` section (used by the phantom command)."""
    sec = "phantom"
    specs = suite_specs(
        cfg.get_int(sec, "count", 1),
        cfg.get_int(sec, "N", 32),
        cfg.get_int(sec, "T", 8),
        seed=cfg.get_int(sec, "seed", 0),
    )
    overrides = {}
    for key in ("orbit_radius", "disk_radius", "angular_step", "jitter"):
        if cfg.has(sec, key):
            overrides[key] = cfg.get_float(sec, key)
    return [replace(s, **overrides) for s in specs] if overrides else specs
