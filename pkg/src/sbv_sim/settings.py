"""

    sbv-sim: Sub-band vectoring simulator for multi-operator VDSL2

    Settings module

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.


    This module reads experiment configuration files and cable/FEXT
    parameter files. A file can include other files using the $include
    directive, making it easier to share a cable calibration between
    several experiments.

    Sections are identified like so: [ section_name ]

    Comments start with # signs.

    Each line within a section is a key = value assignment. Keys may
    also be given in dotted form (scenario.f_max = 52.8e6), which is
    accepted anywhere in the file, including before the first section
    header. Unknown sections and unknown keys are errors.

    Parameter files have no sections; all keys belong to the single
    implicit 'params' section.

"""

from typing import Dict, FrozenSet, List, Mapping, NamedTuple, Optional

import logging
import threading

from .basics import ConfigError, LineReader


LOGGER = logging.getLogger(__name__)

# A set of all strings that should be interpreted as True
TRUE = frozenset(("true", "True", "1", "yes", "Yes"))
# ...and as False
FALSE = frozenset(("false", "False", "0", "no", "No"))

CABLE_PARAM_KEYS = frozenset(("name", "a0", "a1", "a2", "valid_f_max_hz"))
FEXT_PARAM_KEYS = frozenset(
    (
        "k99_db",
        "f0_hz",
        "l0_m",
        "freq_exponent",
        "length_exponent",
        "fluct_mean_db",
        "fluct_std_db",
    )
)

SECTION_KEYS: Mapping[str, FrozenSet[str]] = {
    "scenario": frozenset(
        (
            "n_operators",
            "n_disturbers",
            "cab_nt_distance",
            "f_max",
            "r_v_db",
            "r_v_band_db",
            "p_upper_dbm",
            "p_total_dbm",
            "gamma_db",
            "n0_dbm_hz",
            "bit_min",
            "bit_max",
            "lower_band_vectored",
            "integer_bits",
            "delta_f",
            "symbol_rate",
            "disturber_distances",
            "extrapolate",
        )
    ),
    "cable": CABLE_PARAM_KEYS | {"params_file"},
    "fext": FEXT_PARAM_KEYS,
    "plan": frozenset(
        ("policy", "slot_width_hz", "swap", "guard_tones", "partition_lower_band")
    ),
    "experiment": frozenset(
        (
            "kind",
            "distances",
            "f_max",
            "loads",
            "n_operators",
            "r_v_db",
            "slot_widths",
            "trials",
            "master_seed",
            "output",
            "workers",
            "d_min",
            "d_max",
            "d_step",
            "delta0",
            "target_bps",
        )
    ),
}

PARAM_KEYS: Mapping[str, FrozenSet[str]] = {
    "params": CABLE_PARAM_KEYS | FEXT_PARAM_KEYS,
}


class ConfigValue(NamedTuple):

    """A raw configuration value and where it came from"""

    text: str
    fname: Optional[str]
    line: int


def _error(msg: str, key: str, cv: Optional[ConfigValue]) -> ConfigError:
    e = ConfigError(msg, key=key)
    if cv is not None:
        e.set_pos(cv.fname, cv.line)
    return e


class Settings:

    """The key-value content of one configuration file, by section"""

    # Guards the package resource reads of the shipped defaults
    _lock = threading.Lock()

    def __init__(self, sections: Mapping[str, FrozenSet[str]] = SECTION_KEYS) -> None:
        self._keys = sections
        self.values: Dict[str, Dict[str, ConfigValue]] = {s: {} for s in sections}
        self._rdr: Optional[LineReader] = None

    def _assign(self, section: Optional[str], s: str) -> None:
        """Handle a single key = value line"""
        a = s.split("=", maxsplit=1)
        if len(a) != 2:
            raise ConfigError("Expected 'key = value', got '{0}'".format(s))
        key = a[0].strip().lower()
        val = a[1].strip()
        if "." in key:
            prefix, _, rest = key.partition(".")
            if prefix not in self._keys:
                raise ConfigError("Unknown section name '{0}'".format(prefix), key=key)
            section, key = prefix, rest
        if section is None:
            raise ConfigError("No section for config line '{0}'".format(s), key=key)
        if key not in self._keys[section]:
            raise ConfigError(
                "Unknown configuration parameter '{0}' in section [{1}]".format(
                    key, section
                ),
                key=key,
            )
        if not val:
            raise ConfigError("Missing value for '{0}'".format(key), key=key)
        d = self.values[section]
        if key in d:
            raise ConfigError(
                "Multiple definition of '{0}' in {1} section".format(key, section),
                key=key,
            )
        assert self._rdr is not None
        d[key] = ConfigValue(val, self._rdr.fname(), self._rdr.line())

    def _handle_scenario(self, s: str) -> None:
        """Handle config parameters in the scenario section"""
        self._assign("scenario", s)

    def _handle_cable(self, s: str) -> None:
        """Handle config parameters in the cable section"""
        self._assign("cable", s)

    def _handle_fext(self, s: str) -> None:
        """Handle config parameters in the fext section"""
        self._assign("fext", s)

    def _handle_plan(self, s: str) -> None:
        """Handle config parameters in the plan section"""
        self._assign("plan", s)

    def _handle_experiment(self, s: str) -> None:
        """Handle config parameters in the experiment section"""
        self._assign("experiment", s)

    def _handle_params(self, s: str) -> None:
        """Handle lines of a cable/FEXT parameter file"""
        self._assign("params", s)

    def _parse(self, rdr: LineReader, default_section: Optional[str]) -> None:
        CONFIG_HANDLERS = {
            "scenario": self._handle_scenario,
            "cable": self._handle_cable,
            "fext": self._handle_fext,
            "plan": self._handle_plan,
            "experiment": self._handle_experiment,
            "params": self._handle_params,
        }
        section = default_section
        self._rdr = rdr
        try:
            for s in rdr.lines():
                # Ignore comments
                ix = s.find("#")
                if ix >= 0:
                    s = s[0:ix]
                s = s.strip()
                if not s:
                    # Blank line: ignore
                    continue
                if s[0] == "[" and s[-1] == "]":
                    # New section
                    name = s[1:-1].strip().lower()
                    if name in self._keys and name in CONFIG_HANDLERS:
                        section = name
                        continue
                    raise ConfigError("Unknown section name '{0}'".format(name))
                try:
                    if section is None:
                        self._assign(None, s)
                    else:
                        CONFIG_HANDLERS[section](s)
                except ConfigError as e:
                    # Add file name and line number information to the exception
                    # if it's not already there
                    e.set_pos(rdr.fname(), rdr.line())
                    raise e
        except ConfigError as e:
            e.set_pos(rdr.fname(), rdr.line())
            raise e
        finally:
            self._rdr = None

    @classmethod
    def read(
        cls,
        fname: Optional[str] = None,
        *,
        text: Optional[str] = None,
        package_name: Optional[str] = None,
    ) -> "Settings":
        """Read an experiment configuration from a file or a string"""
        settings = cls(SECTION_KEYS)
        rdr = LineReader(fname, text=text, package_name=package_name)
        settings._parse(rdr, None)
        LOGGER.debug(
            "Read configuration from %s: %s",
            rdr.fname(),
            {k: sorted(v) for k, v in settings.values.items() if v},
        )
        return settings

    @classmethod
    def read_params(
        cls,
        fname: Optional[str] = None,
        *,
        text: Optional[str] = None,
        package_name: Optional[str] = None,
    ) -> "Settings":
        """Read a flat cable/FEXT parameter file"""
        settings = cls(PARAM_KEYS)
        rdr = LineReader(fname, text=text, package_name=package_name)
        if package_name:
            with Settings._lock:
                settings._parse(rdr, "params")
        else:
            settings._parse(rdr, "params")
        return settings

    def section(self, section: str) -> Dict[str, ConfigValue]:
        return self.values.get(section, {})

    def get(self, section: str, key: str) -> Optional[ConfigValue]:
        return self.values.get(section, {}).get(key)

    def has(self, section: str, key: str) -> bool:
        return self.get(section, key) is not None

    def get_str(self, section: str, key: str, default: Optional[str] = None) -> Optional[str]:
        cv = self.get(section, key)
        return default if cv is None else cv.text

    def get_float(
        self, section: str, key: str, default: Optional[float] = None
    ) -> Optional[float]:
        cv = self.get(section, key)
        if cv is None:
            return default
        return parse_float(cv, key)

    def get_int(self, section: str, key: str, default: Optional[int] = None) -> Optional[int]:
        cv = self.get(section, key)
        if cv is None:
            return default
        return parse_int(cv, key)

    def get_bool(
        self, section: str, key: str, default: Optional[bool] = None
    ) -> Optional[bool]:
        cv = self.get(section, key)
        if cv is None:
            return default
        return parse_bool(cv, key)

    def get_list(self, section: str, key: str) -> Optional[List[str]]:
        """Return a comma-separated value as a list of stripped items"""
        cv = self.get(section, key)
        if cv is None:
            return None
        items = [item.strip() for item in cv.text.split(",")]
        if not all(items):
            raise _error("Empty item in list '{0}'".format(cv.text), key, cv)
        return items

    def get_floats(self, section: str, key: str) -> Optional[List[float]]:
        cv = self.get(section, key)
        if cv is None:
            return None
        items = self.get_list(section, key) or []
        return [parse_float(cv._replace(text=item), key) for item in items]

    def error(self, section: str, key: str, msg: str) -> ConfigError:
        """Return a ConfigError for the given key, positioned at
        the line where the key was defined, if it was"""
        return _error(msg, key, self.get(section, key))


def parse_float(cv: ConfigValue, key: str) -> float:
    try:
        return float(cv.text)
    except ValueError:
        raise _error("Invalid number '{0}'".format(cv.text), key, cv)


def parse_int(cv: ConfigValue, key: str) -> int:
    try:
        return int(cv.text)
    except ValueError:
        pass
    # Accept integral floats such as 1e3
    f = parse_float(cv, key)
    if not f.is_integer():
        raise _error("Invalid integer '{0}'".format(cv.text), key, cv)
    return int(f)


def parse_bool(cv: ConfigValue, key: str) -> bool:
    if cv.text in TRUE:
        return True
    if cv.text in FALSE:
        return False
    raise _error("Invalid boolean '{0}'".format(cv.text), key, cv)
