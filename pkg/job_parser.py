"""
Input files and command flags into validated jobs.

File formats (blank lines and `#` comments are ignored):

    hypersurface   GF(p^k;m0,...,mk) / vars N / deg d / polynomial (may wrap)
    curve          GF(...) / degree d / one row of d+1 elements per coordinate,
                   coefficients of s^d, s^(d-1) t, ..., t^d
    table          GF(...) / one `t -> x` row per parameter point
    certificate    JSON as written by `certificate_to_dict`

Points are written `(c0:c1:...)` with elements as integers or `[c0,c1,...]`.
"""
import json
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from loguru import logger

from chord import DescentCertificate, TableRow
from errors import (
    GeometryError,
    ParseError,
    ReducibleModulus,
    ValidationError,
    ZeroForm,
)
from gf import FiniteField, extension, format_element, format_field, parse_element, parse_field
from incidence import ConjugateSecant, Line, Plane
from models import Job, canonical_json, content_digest
from mpoly import format_poly, parse_poly
from projvar import Hypersurface, ProjPoint, RationalCurveMap
from settings import Settings

_VARS_RE = re.compile(r"^\s*vars\s+(\d+)\s*$")
_DEG_RE = re.compile(r"^\s*deg(?:ree)?\s+(\d+)\s*$")


def _content_lines(text: str) -> List[Tuple[int, str]]:
    return [(i + 1, line) for i, line in enumerate(text.splitlines())
            if line.strip() and not line.strip().startswith("#")]


def _field_at(text: str, line: int) -> FiniteField:
    try:
        return parse_field(text.strip())
    except ReducibleModulus as e:
        raise ValidationError(str(e), line=line, column=1)
    except ParseError:
        raise ParseError(f"bad field literal {text.strip()!r}", line=line, column=1)
    except GeometryError as e:
        raise ValidationError(str(e), line=line, column=1)


def _header_int(pattern: re.Pattern, entry: Tuple[int, str], what: str) -> int:
    line, text = entry
    match = pattern.match(text)
    if not match:
        raise ParseError(f"expected `{what} <int>`, got {text.strip()!r}", line=line, column=1)
    return int(match.group(1))


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------

def parse_point(text: str, field: FiniteField, line: int = 1, column: int = 1) -> ProjPoint:
    body = text.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    if not body:
        raise ParseError("empty point", line=line, column=column)
    coords = []
    offset = column
    for part in body.split(":"):
        try:
            coords.append(parse_element(field, part))
        except (ValueError, GeometryError):
            raise ParseError(f"bad coordinate {part.strip()!r}", line=line, column=offset)
        offset += len(part) + 1
    try:
        return ProjPoint.of(field, coords)
    except ZeroForm:
        raise ValidationError("the zero vector is not a projective point", line=line, column=column)


def format_point(p: ProjPoint) -> str:
    return repr(p)


def point_row(p: ProjPoint) -> str:
    """Census row `[c0,...]`; extension-field coordinates as coefficient lists."""
    if p.field.k == 1:
        return canonical_json(list(p.coords))
    return canonical_json(p.to_list())


def census_text(header: Dict[str, Any], rows: Sequence[str]) -> str:
    return "\n".join([canonical_json(header)] + list(rows)) + "\n"


# ---------------------------------------------------------------------------
# hypersurfaces
# ---------------------------------------------------------------------------

def read_hypersurface(text: str) -> Hypersurface:
    lines = _content_lines(text)
    if len(lines) < 4:
        last = lines[-1][0] if lines else 1
        raise ParseError("a hypersurface file needs field, vars, deg and polynomial lines", line=last, column=1)
    field = _field_at(lines[0][1], lines[0][0])
    nvars = _header_int(_VARS_RE, lines[1], "vars")
    degree = _header_int(_DEG_RE, lines[2], "deg")
    if nvars < 2:
        raise ValidationError(f"{nvars} variables do not define a hypersurface", line=lines[1][0], column=6)
    first = lines[3][0]
    P = parse_poly(" ".join(t for _, t in lines[3:]), field, nvars, line=first)
    if P.is_zero():
        raise ValidationError("the polynomial is zero", line=first, column=1)
    if P.degree != degree:
        raise ValidationError(f"polynomial has degree {P.degree}, header says {degree}", line=first, column=1)
    return Hypersurface(P)


def write_hypersurface(X: Hypersurface) -> str:
    return f"{format_field(X.field)}\nvars {X.nvars}\ndeg {X.degree}\n{format_poly(X.equation)}\n"


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------

def read_curve(text: str) -> RationalCurveMap:
    lines = _content_lines(text)
    if len(lines) < 3:
        raise ParseError("a curve file needs field, degree and coefficient rows", line=len(text.splitlines()), column=1)
    field = _field_at(lines[0][1], lines[0][0])
    degree = _header_int(_DEG_RE, lines[1], "degree")
    rows = []
    for line, row_text in lines[2:]:
        tokens = row_text.split()
        if len(tokens) != degree + 1:
            raise ValidationError(f"expected {degree + 1} coefficients, got {len(tokens)}", line=line, column=1)
        row, column = [], 1
        for token in tokens:
            try:
                row.append(parse_element(field, token))
            except (ValueError, GeometryError):
                raise ParseError(f"bad coefficient {token!r}", line=line, column=column)
            column += len(token) + 1
        rows.append(row)
    try:
        return RationalCurveMap.from_matrix(field, rows)
    except GeometryError as e:
        raise ValidationError(str(e), line=lines[2][0], column=1)


def write_curve(f: RationalCurveMap) -> str:
    rows = [" ".join(format_element(f.field, c) if f.field.k > 1 else str(c) for c in row)
            for row in f.matrix()]
    return "\n".join([format_field(f.field), f"degree {f.degree}"] + rows) + "\n"


def curve_to_dict(f: Optional[RationalCurveMap]) -> Optional[Dict[str, Any]]:
    if f is None:
        return None
    return {"field": format_field(f.field), "degree": f.degree,
            "matrix": [[format_element(f.field, c) for c in row] for row in f.matrix()]}


def curve_from_dict(data: Optional[Dict[str, Any]]) -> Optional[RationalCurveMap]:
    if data is None:
        return None
    field = parse_field(data["field"])
    rows = [[parse_element(field, c) for c in row] for row in data["matrix"]]
    return RationalCurveMap.from_matrix(field, rows, check=False)


# ---------------------------------------------------------------------------
# set-map tables
# ---------------------------------------------------------------------------

def read_table(text: str) -> Tuple[FiniteField, List[TableRow]]:
    lines = _content_lines(text)
    if not lines:
        raise ParseError("empty table", line=1, column=1)
    field = _field_at(lines[0][1], lines[0][0])
    rows = []
    for line, row_text in lines[1:]:
        if "->" not in row_text:
            raise ParseError("expected `t -> x`", line=line, column=1)
        left, right = row_text.split("->", 1)
        t = parse_point(left, field, line, 1)
        x = parse_point(right, field, line, len(left) + 3)
        if t.dim != 1:
            raise ValidationError(f"parameter {t} is not a point of P^1", line=line, column=1)
        rows.append((t, x))
    return field, rows


# ---------------------------------------------------------------------------
# descent certificates
# ---------------------------------------------------------------------------

def certificate_to_dict(certificate: DescentCertificate) -> Dict[str, Any]:
    base = certificate.base
    ext = extension(base, 2)
    return {
        "base": format_field(base),
        "ext": format_field(ext),
        "table": [[format_point(t), format_point(x)] for t, x in certificate.table],
        "secants": [{
            "line": [[format_element(s.line.field, c) for c in row]
                     for row in s.line.rows],
            "line_field": format_field(s.line.field),
            "direction": format_point(s.direction),
            "s": format_point(s.s),
            "s_conj": format_point(s.s_conj),
            "tried": s.tried,
        } for s in certificate.secants],
        "lift": [[format_point(t), format_point(s)] for t, s in certificate.lift],
        "phi2": curve_to_dict(certificate.phi2),
        "phi": curve_to_dict(certificate.phi),
        "transcript": certificate.transcript,
    }


def certificate_from_dict(data: Dict[str, Any]) -> DescentCertificate:
    try:
        base = parse_field(data["base"])
        ext = parse_field(data["ext"])
        table = [(parse_point(t, base), parse_point(x, base)) for t, x in data["table"]]
        secants = []
        for s in data["secants"]:
            line_field = parse_field(s["line_field"])
            rows = [[parse_element(line_field, c) for c in row] for row in s["line"]]
            secants.append(ConjugateSecant(
                line=Line.from_rows(line_field, rows),
                direction=parse_point(s["direction"], base),
                s=parse_point(s["s"], ext),
                s_conj=parse_point(s["s_conj"], ext),
                tried=int(s["tried"]),
            ))
        lift = [(parse_point(t, ext), parse_point(s, ext)) for t, s in data["lift"]]
        return DescentCertificate(base, table, secants, lift,
                                  curve_from_dict(data.get("phi2")), curve_from_dict(data.get("phi")),
                                  list(data.get("transcript", [])))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed certificate: {str(e)}", line=1, column=1)


def read_certificate(text: str) -> DescentCertificate:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"certificate is not JSON: {e.msg}", line=e.lineno, column=e.colno)
    return certificate_from_dict(data)


READERS = {
    "surface": read_hypersurface,
    "curve": read_curve,
    "phi2": read_curve,
    "table": read_table,
    "certificate": read_certificate,
}

# command -> (required input roles, required flags)
COMMANDS: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    "field": ((), ("field",)),
    "poly": ((), ("field", "text")),
    "variety.count": (("surface",), ()),
    "variety.probe": (("surface",), ()),
    "variety.windows": (("surface",), ()),
    "lines.census": (("surface",), ()),
    "lines.through": (("surface",), ("point",)),
    "lines.classify": (("surface",), ()),
    "chord.third-point": (("surface",), ("point", "point2")),
    "chord.descend": (("surface", "phi2"), ()),
    "chord.descend-set-map": (("surface", "table"), ()),
    "chord.weil-restrict": ((), ("q", "a")),
    "chord.verify-certificate": (("surface", "certificate"), ()),
    "chord.unirational": (("surface",), ("point", "point2")),
    "curves.verify": (("surface", "curve"), ()),
    "curves.splitting": (("surface", "curve"), ()),
    "curves.search": (("surface",), ("degree",)),
    "curves.interpolate": ((), ("field", "through", "degree")),
    "curves.equations": (("surface",), ("degree",)),
    "gallery.build": ((), ("id",)),
    "gallery.verify": ((), ()),
    "gallery.search": ((), ("q", "m")),
}


class JobParser:
    def __init__(self, settings: Settings):
        """
        Turn CLI arguments into validated jobs

        Args:
            settings (Settings): supplies defaults for budget, kmax and dmax
        """
        self.settings = settings

    def parse_inputs(self, command: str, paths: Optional[Dict[str, str]] = None,
                     flags: Optional[Dict[str, Any]] = None) -> Job:
        """
        Read the named input files and validate them together with the flags

        Args:
            command (str): dotted command name, e.g. "curves.search"
            paths (dict): input role -> file path
            flags (dict): flag name -> raw value

        Returns:
            Job: parameters are plain JSON values; parsed objects live in job.objects
        """
        sources = {}
        for role, path in (paths or {}).items():
            if path is None:
                continue
            try:
                text = Path(path).read_text(encoding="utf-8")
            except OSError as e:
                raise ParseError(f"cannot read {path}: {e.strerror}", line=0, column=0)
            sources[role] = (str(path), text)
        return self.parse_job(command, sources, flags or {})

    def parse_job(self, command: str, sources: Dict[str, Tuple[str, str]], flags: Dict[str, Any]) -> Job:
        if command not in COMMANDS:
            raise ValidationError(f"unknown command {command!r}")
        roles, required = COMMANDS[command]
        params = {k: v for k, v in flags.items() if v is not None and v != []}
        for role in roles:
            if role not in sources:
                raise ValidationError(f"{command} needs a {role} file")
        for name in required:
            if name not in params:
                raise ValidationError(f"{command} needs --{name.replace('_', '-')}")
        objects: Dict[str, Any] = {}
        for role, (path, text) in sources.items():
            try:
                objects[role] = READERS[role](text)
            except (ParseError, ValidationError) as e:
                logger.error(f"Error parsing {path}: {str(e)}")
                raise
        objects.update(self._flag_objects(objects, params))
        job = Job(
            command=command,
            parameters=params,
            inputs={role: content_digest(text) for role, (_, text) in sources.items()},
            objects=objects,
        )
        job.objects["sources"] = sources
        logger.debug(f"Parsed job {command} with inputs {sorted(sources)}")
        return job

    def _flag_objects(self, objects: Dict[str, Any], params: Dict[str, Any]) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        X: Optional[Hypersurface] = objects.get("surface")
        if "field" in params:
            out["field"] = _field_at(str(params["field"]), 1)
        base = X.field if X is not None else out.get("field")
        target = extension(base, int(params.get("ext", 1))) if base is not None else None
        for name in ("point", "point2"):
            if name in params:
                if target is None:
                    raise ValidationError(f"--{name} needs a field")
                out[name] = parse_point(str(params[name]), target)
        if "plane" in params:
            coeffs = parse_point(str(params["plane"]), base)
            out["plane"] = Plane.from_linear_form(base, list(coeffs.coords))
        if "text" in params:
            out["poly"] = parse_poly(str(params["text"]), out["field"])
        if "through" in params:
            out["through"] = [self._constraint(str(c), target, i + 1)
                              for i, c in enumerate(params["through"])]
        return out

    @staticmethod
    def _constraint(text: str, field: FiniteField, index: int) -> Tuple[ProjPoint, ProjPoint]:
        if "=" not in text:
            raise ParseError(f"constraint {text!r} is not of the form t=x", line=index, column=1)
        left, right = text.split("=", 1)
        t = parse_point(left, field, index, 1)
        if t.dim != 1:
            raise ValidationError(f"parameter {t} is not a point of P^1", line=index, column=1)
        return t, parse_point(right, field, index, len(left) + 2)
