"""Scenario files: flat sectioned key = value text with decimal reals.

parse -> serialize -> parse is the identity on the typed config; floats
use the shortest round-trip decimal form. Every key has a default, so a
minimal file with just [grid], [hamiltonian] and [initial_state] runs.
"""

import configparser
import io
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigParseError, ConfigurationError


@dataclass(frozen=True)
class GridSection:
    n_q: int = 128
    n_p: int = 128
    q_min: float = -8.0
    q_max: float = 8.0
    p_min: float = -8.0
    p_max: float = 8.0
    boundary: str = "periodic"


@dataclass(frozen=True)
class HamiltonianSection:
    mass: float = 1.0
    hbar: float = 1.0
    potential: tuple = (0.0, 0.0, 0.5)
    potential_level2: tuple = None       # hierarchy override, falls back to potential
    label: str = "scenario"


@dataclass(frozen=True)
class InitialStateSection:
    name: str = "coherent"
    q0: float = 0.0
    p0: float = 0.0
    sigma: float = None
    squeeze: float = None
    parity: str = "even"
    purity: float = 0.5
    file: str = None                     # .npy complex array overriding the library


@dataclass(frozen=True)
class OpenSystemSection:
    gamma: float = 0.0
    diffusion: float = 0.0


@dataclass(frozen=True)
class EvolveSection:
    dt: float = None                     # None = derive from the stability bound
    t_final: float = 1.0
    integrator: str = "rk4"
    snapshot_stride: int = 10
    compression_epsilon: float = None
    resolution_epsilon: float = None


@dataclass(frozen=True)
class DiagnosticsSection:
    vanishing_moments: int = 3
    packet_depth: int = 4
    loc_hi: float = 0.05
    loc_lo: float = 0.005
    entropy_lo: float = None             # None = 0.3 * log(cell count)
    entropy_hi: float = None             # None = 0.7 * log(cell count)
    purity_hi: float = 0.95
    purity_lo: float = 0.6
    neg_hi: float = 0.05
    neg_lo: float = 0.01


@dataclass(frozen=True)
class HierarchySection:
    levels: int = 0                      # 0 = plain single-state run
    w0: float = 1.0
    pair_n: int = 32
    pair_q_min: float = -5.0
    pair_q_max: float = 5.0
    pair_p_min: float = -5.0
    pair_p_max: float = 5.0


@dataclass(frozen=True)
class OutputSection:
    directory: str = None                # None = env root / runs/<label>-<id>
    formats: tuple = ("wigr", "csv")


@dataclass(frozen=True)
class ScenarioConfig:
    grid: GridSection = field(default_factory=GridSection)
    hamiltonian: HamiltonianSection = field(default_factory=HamiltonianSection)
    initial_state: InitialStateSection = field(default_factory=InitialStateSection)
    open_system: OpenSystemSection = field(default_factory=OpenSystemSection)
    evolve: EvolveSection = field(default_factory=EvolveSection)
    diagnostics: DiagnosticsSection = field(default_factory=DiagnosticsSection)
    hierarchy: HierarchySection = field(default_factory=HierarchySection)
    output: OutputSection = field(default_factory=OutputSection)

    def with_value(self, dotted, raw):
        """Return a copy with section.key replaced by a parsed raw string."""
        try:
            section_name, key = dotted.split(".")
        except ValueError:
            raise ConfigurationError(
                "parameter path must look like section.key, got %r" % dotted
            ) from None
        section = getattr(self, section_name, None)
        if section is None:
            raise ConfigParseError("unknown section", field=section_name)
        spec = {f.name: f for f in fields(section)}
        if key not in spec:
            raise ConfigParseError("unknown key", field=dotted)
        value = _parse_value(section_name, key, raw, getattr(section, key))
        return replace(self, **{section_name: replace(section, **{key: value})})


_SECTIONS = {f.name: f.default_factory for f in fields(ScenarioConfig)}

_NONE_WORDS = {"none", "auto", ""}

# keys that hold optional floats / strings / tuples
_TUPLE_KEYS = {("hamiltonian", "potential"), ("hamiltonian", "potential_level2"),
               ("output", "formats")}


def _parse_value(section, key, raw, default):
    raw = raw.strip()
    if (section, key) in _TUPLE_KEYS:
        if raw.lower() in _NONE_WORDS:
            return None if key != "formats" and key != "potential" else default
        items = [x.strip() for x in raw.split(",") if x.strip()]
        if key == "formats":
            return tuple(items)
        try:
            return tuple(float(x) for x in items)
        except ValueError:
            raise ConfigParseError("bad coefficient list %r" % raw,
                                   field="%s.%s" % (section, key)) from None
    proto = default
    if proto is None:
        # optional scalar: strings stay strings, everything else is float
        if raw.lower() in _NONE_WORDS:
            return None
        if key in ("directory", "file"):
            return raw
        try:
            return float(raw)
        except ValueError:
            raise ConfigParseError("expected a number, got %r" % raw,
                                   field="%s.%s" % (section, key)) from None
    if isinstance(proto, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(proto, int):
        try:
            return int(raw)
        except ValueError:
            raise ConfigParseError("expected an integer, got %r" % raw,
                                   field="%s.%s" % (section, key)) from None
    if isinstance(proto, float):
        if raw.lower() in _NONE_WORDS:
            return None
        try:
            return float(raw)
        except ValueError:
            raise ConfigParseError("expected a number, got %r" % raw,
                                   field="%s.%s" % (section, key)) from None
    return raw


def parse_scenario(text):
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";")
    )
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        raise ConfigParseError(str(exc).splitlines()[0], line=line) from None

    sections = {}
    for name in parser.sections():
        if name not in _SECTIONS:
            raise ConfigParseError("unknown section [%s]" % name, field=name)
        proto = _SECTIONS[name]()
        known = {f.name for f in fields(proto)}
        updates = {}
        for key, raw in parser.items(name):
            if key not in known:
                raise ConfigParseError(
                    "unknown key", field="%s.%s" % (name, key)
                )
            updates[key] = _parse_value(name, key, raw, getattr(proto, key))
        sections[name] = replace(proto, **updates)
    return ScenarioConfig(**sections)


def _format_value(value):
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_scenario(config):
    out = io.StringIO()
    for section_field in fields(config):
        section = getattr(config, section_field.name)
        out.write("[%s]\n" % section_field.name)
        for f in fields(section):
            out.write("%s = %s\n" % (f.name, _format_value(getattr(section, f.name))))
        out.write("\n")
    return out.getvalue()


def load_scenario(path):
    with open(path) as fh:
        return parse_scenario(fh.read())
