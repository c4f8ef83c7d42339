"""Problem files: signatures, vector fields and maps in a sectioned text format.

Example::

    # Euler field on a four-coordinate domain
    [signature]
    x: 0
    xi1: 1
    xi2: 1
    z: 2

    [config]
    weight_cap = 4

    [field E]
    xi1 = xi1
    xi2 = xi2
    z = 2*z

Section headers:

* ``[signature]`` or ``[signature N]``: ``name: degree`` lines, order
  significant.  The unnamed signature is called ``M``.
* ``[field X]`` or ``[field X on N]``: ``coordinate = expression`` lines.
  Omitted components are zero.  ``degree: k`` fixes the field degree, which
  is otherwise inferred.
* ``[map phi: M -> N]``: one ``target coordinate = expression`` line per
  target coordinate, expressions over the source.
* ``[config]``: ``key = value`` overrides of :class:`~gradedflow.config.Config`.

``#`` starts a comment.  Errors carry the offending line number.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field

from .config import DEFAULT, Config
from .errors import DegreeError, ExpressionError, GradedFlowError, ParseError, ValidationError
from .graded import Coordinate, GradedSignature, parse_graded
from .gradedmap import GradedMap
from .vectorfield import VectorField

DEFAULT_SIGNATURE = "M"

_HEADER = re.compile(r"^\[\s*(?P<body>[^\]]*?)\s*\]$")
_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_SIG_HEADER = re.compile(rf"^signature(?:\s+(?P<name>{_NAME}))?$")
_FIELD_HEADER = re.compile(rf"^field\s+(?P<name>{_NAME})(?:\s+on\s+(?P<sig>{_NAME}))?$")
_MAP_HEADER = re.compile(rf"^map\s+(?P<name>{_NAME})\s*:\s*(?P<src>{_NAME})\s*->\s*(?P<tgt>{_NAME})$")


@dataclass
class ProblemSpec:
    signatures: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict)
    field_signature: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)
    map_signatures: dict = field(default_factory=dict)
    config: Config = DEFAULT

    def signature(self, name=None):
        name = DEFAULT_SIGNATURE if name is None else name
        if name not in self.signatures:
            raise ValidationError(f"unknown signature {name!r}")
        return self.signatures[name]

    def field(self, name):
        if name not in self.fields:
            raise ValidationError(f"unknown vector field {name!r}; defined: {sorted(self.fields)}")
        return self.fields[name]

    def map(self, name):
        if name not in self.maps:
            raise ValidationError(f"unknown map {name!r}; defined: {sorted(self.maps)}")
        return self.maps[name]


@dataclass
class _Section:
    kind: str
    line: int
    header: dict
    entries: list = field(default_factory=list)  # (line, key, sep, value)


def _strip_comment(line):
    i = line.find("#")
    return line if i < 0 else line[:i]


def _split_sections(text):
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            body = " ".join(m.group("body").split())
            for kind, pat in (("signature", _SIG_HEADER), ("field", _FIELD_HEADER), ("map", _MAP_HEADER)):
                h = pat.match(body)
                if h:
                    current = _Section(kind, lineno, h.groupdict())
                    break
            else:
                if body == "config":
                    current = _Section("config", lineno, {})
                else:
                    raise ParseError(f"unknown section [{body}]", lineno)
            sections.append(current)
            continue
        if current is None:
            raise ParseError("entry outside of any section", lineno)
        eq, colon = line.find("="), line.find(":")
        if eq < 0 and colon < 0:
            raise ParseError(f"expected 'key = value' or 'key: value', got {line!r}", lineno)
        if colon >= 0 and (eq < 0 or colon < eq):
            key, sep, value = line[:colon], ":", line[colon + 1 :]
        else:
            key, sep, value = line[:eq], "=", line[eq + 1 :]
        key, value = key.strip(), value.strip()
        if not re.fullmatch(_NAME, key):
            raise ParseError(f"invalid key {key!r}", lineno)
        if not value:
            raise ParseError(f"missing value for {key!r}", lineno)
        current.entries.append((lineno, key, sep, value))
    return sections


def _parse_int(value, lineno, what):
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {value!r}", lineno) from None


def _config_value(default, value, lineno, key):
    try:
        if isinstance(default, bool):
            if value.lower() not in ("true", "false"):
                raise ValueError
            return value.lower() == "true"
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, tuple):
            # base_points: "1.0, 2.0; 0.5, 0.5"
            return tuple(
                tuple(float(v) for v in pt.split(",")) for pt in value.split(";") if pt.strip()
            )
    except ValueError:
        raise ParseError(f"bad value {value!r} for config key {key!r}", lineno) from None
    raise ParseError(f"unsupported config key {key!r}", lineno)


def _parse_config(sections):
    defaults = {f.name: getattr(DEFAULT, f.name) for f in dataclasses.fields(Config)}
    changes = {}
    for sec in sections:
        for lineno, key, sep, value in sec.entries:
            if key not in defaults:
                raise ParseError(f"unknown config key {key!r}", lineno)
            if sep != "=":
                raise ParseError(f"config entries use '=', got {key}{sep}", lineno)
            changes[key] = _config_value(defaults[key], value, lineno, key)
    return DEFAULT.replace(**changes)


def _parse_signature(sec):
    coords = []
    for lineno, key, sep, value in sec.entries:
        if sep != ":":
            raise ParseError(f"signature entries are 'name: degree', got {key}{sep}", lineno)
        coords.append(Coordinate(key, _parse_int(value, lineno, "degree")))
    try:
        return GradedSignature(coords)
    except ValueError as exc:
        raise ValidationError(str(exc), sec.line) from None


def _reraise(exc, lineno):
    """Attach a line number to an error from expression handling."""
    if isinstance(exc, ParseError) and exc.line is None:
        raise type(exc)(str(exc), lineno) from None
    if isinstance(exc, (ExpressionError, DegreeError)):
        raise ValidationError(str(exc), lineno) from None
    raise exc


def _parse_field(sec, sig, cap):
    degree = None
    exprs = []
    seen = set()
    for lineno, key, sep, value in sec.entries:
        if sep == ":":
            if key != "degree":
                raise ParseError(f"unknown field directive {key!r}", lineno)
            degree = _parse_int(value, lineno, "degree")
            continue
        if key not in sig.names:
            raise ValidationError(f"undeclared coordinate {key!r}", lineno)
        if key in seen:
            raise ValidationError(f"component {key!r} given twice", lineno)
        seen.add(key)
        exprs.append((lineno, key, value))
    comps = {}
    for lineno, key, value in exprs:
        want = None if degree is None else degree + sig.degree(key)
        try:
            comps[key] = parse_graded(sig, value, cap, want, where=f"component {key!r}")
        except GradedFlowError as exc:
            _reraise(exc, lineno)
    if degree is None:
        degree = 0
        for lineno, key, _ in exprs:
            f = comps[key]
            if f.terms:
                degree = f.degree - sig.degree(key)
                break
    lines = {key: lineno for lineno, key, _ in exprs}
    for key, f in comps.items():
        if f.terms and f.degree != degree + sig.degree(key):
            raise ValidationError(
                f"component {key!r} has degree {f.degree}, the degree law needs {degree + sig.degree(key)}",
                lines[key],
            )
    try:
        return VectorField(sig, degree, comps, cap)
    except GradedFlowError as exc:
        _reraise(exc, sec.line)


def _parse_map(sec, source, target, cap):
    pb = {}
    for lineno, key, sep, value in sec.entries:
        if sep != "=":
            raise ParseError(f"map entries are 'coordinate = expression', got {key}{sep}", lineno)
        if key not in target.names:
            raise ValidationError(f"undeclared target coordinate {key!r}", lineno)
        if key in pb:
            raise ValidationError(f"pullback of {key!r} given twice", lineno)
        try:
            pb[key] = parse_graded(source, value, cap, target.degree(key), where=f"pullback of {key!r}")
        except GradedFlowError as exc:
            _reraise(exc, lineno)
    try:
        return GradedMap(source, target, pb, cap)
    except GradedFlowError as exc:
        _reraise(exc, sec.line)


def loads(text):
    """Parse problem text into a validated :class:`ProblemSpec`."""
    sections = _split_sections(text)
    spec = ProblemSpec()
    spec.config = _parse_config([s for s in sections if s.kind == "config"])
    cap = spec.config.weight_cap
    for sec in sections:
        if sec.kind != "signature":
            continue
        name = sec.header["name"] or DEFAULT_SIGNATURE
        if name in spec.signatures:
            raise ValidationError(f"signature {name!r} declared twice", sec.line)
        spec.signatures[name] = _parse_signature(sec)
    for sec in sections:
        if sec.kind not in ("field", "map"):
            continue
        name = sec.header["name"]
        if name in spec.fields or name in spec.maps:
            raise ValidationError(f"name {name!r} defined twice", sec.line)
        if sec.kind == "field":
            sname = sec.header["sig"] or DEFAULT_SIGNATURE
            if sname not in spec.signatures:
                raise ValidationError(f"unknown signature {sname!r}", sec.line)
            spec.fields[name] = _parse_field(sec, spec.signatures[sname], cap)
            spec.field_signature[name] = sname
        else:
            src, tgt = sec.header["src"], sec.header["tgt"]
            for s in (src, tgt):
                if s not in spec.signatures:
                    raise ValidationError(f"unknown signature {s!r}", sec.line)
            spec.maps[name] = _parse_map(sec, spec.signatures[src], spec.signatures[tgt], cap)
            spec.map_signatures[name] = (src, tgt)
    return spec


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _fmt_config_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return "; ".join(", ".join(repr(float(x)) for x in pt) for pt in v)
    return str(v)


def dumps(spec):
    """Render a spec in the problem-file format; ``loads(dumps(s))`` recovers ``s``."""
    out = []
    for name, sig in spec.signatures.items():
        out.append("[signature]" if name == DEFAULT_SIGNATURE else f"[signature {name}]")
        out.extend(f"{c.name}: {c.degree}" for c in sig.coords)
        out.append("")
    changed = [
        (f.name, getattr(spec.config, f.name))
        for f in dataclasses.fields(Config)
        if getattr(spec.config, f.name) != getattr(DEFAULT, f.name)
    ]
    if changed:
        out.append("[config]")
        out.extend(f"{k} = {_fmt_config_value(v)}" for k, v in changed)
        out.append("")
    for name, X in spec.fields.items():
        sname = spec.field_signature.get(name, DEFAULT_SIGNATURE)
        out.append(f"[field {name}]" if sname == DEFAULT_SIGNATURE else f"[field {name} on {sname}]")
        out.append(f"degree: {X.degree}")
        for c in X.sig.coords:
            f = X.components[c.name]
            if f.terms:
                out.append(f"{c.name} = {f.to_string()}")
        out.append("")
    for name, phi in spec.maps.items():
        src, tgt = spec.map_signatures[name]
        out.append(f"[map {name}: {src} -> {tgt}]")
        out.extend(f"{n} = {phi.pullbacks[n].to_string()}" for n in phi.target.names)
        out.append("")
    return "\n".join(out)


def semantically_equal(a, b, config=DEFAULT):
    """Same signatures and pointwise-equal field components and map pullbacks."""
    if a.signatures != b.signatures or a.config != b.config:
        return False
    if set(a.fields) != set(b.fields) or set(a.maps) != set(b.maps):
        return False
    for name, X in a.fields.items():
        Y = b.fields[name]
        if X.sig != Y.sig or X.degree != Y.degree:
            return False
        for n in X.sig.names:
            if not X.components[n].equal_sampled(Y.components[n], config=config):
                return False
    for name, phi in a.maps.items():
        psi = b.maps[name]
        if phi.source != psi.source or phi.target != psi.target:
            return False
        for n in phi.target.names:
            f, g = phi.pullbacks[n], psi.pullbacks[n]
            if not f.equal_sampled(g, config=config):
                return False
    return True
