"""Reader and writer for geometry spec files.

The format is line based; see ``docs/spec_format.md`` for the grammar.
"""

import re
from fractions import Fraction

from .errors import ParseError
from .expressions import format_element, parse_expr
from .geometry import GeometrySpec
from .graded_algebra import CoordinateSystem, Ring, TruncationContext

__all__ = ["parse_spec", "format_spec", "load_spec"]

_SECTIONS = {
    "manifold": {"even", "odd", "basepoint", "jet_order"},
    "structure": {"m"},
    "truncation": {"fedosov_degree"},
}
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*$")
_RATIONAL = re.compile(r"-?\d+(/\d+)?$")
_INDEXED = re.compile(r"(Gamma|C)\[([^\]]*)\]$")


def _names(value, line, col):
    out = [v.strip() for v in value.split(",")] if value.strip() else []
    for n in out:
        if not _NAME.match(n) or n in ("hbar", "i", "c", "y"):
            raise ParseError(f"invalid coordinate name {n!r}", line, col)
    return out


def _rational(text, line, col):
    text = text.strip()
    if not _RATIONAL.match(text):
        raise ParseError(f"expected a rational number, found {text!r}", line, col)
    if text.endswith("/0"):
        raise ParseError("zero denominator", line, col)
    return Fraction(text)


def parse_spec(text, degree=None):
    """Parse spec text (str or UTF-8 bytes) into a GeometrySpec.

    ``degree`` overrides ``fedosov_degree``.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"spec is not valid UTF-8: {exc}") from None
    section = None
    seen = {}
    entries = {"Gamma": [], "C": []}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        ind = len(line) - len(line.lstrip())
        s = line.strip()
        if s.startswith("["):
            if not s.endswith("]") or s[1:-1].strip() not in _SECTIONS:
                raise ParseError(f"unknown section header {s!r}", ln, ind + 1)
            section = s[1:-1].strip()
            continue
        if section is None:
            raise ParseError("key outside of any section", ln, ind + 1)
        if "=" not in s:
            raise ParseError("expected 'key = value'", ln, ind + 1)
        key, value = s.split("=", 1)
        key = key.strip()
        vcol = ind + len(s) - len(value.lstrip()) + 1
        m = _INDEXED.match(key)
        if m and section == "structure":
            entries[m.group(1)].append((m.group(2), value, ln, ind + 1, vcol))
            continue
        if key not in _SECTIONS[section]:
            raise ParseError(f"unknown key {key!r} in [{section}]", ln, ind + 1)
        if (section, key) in seen:
            raise ParseError(f"duplicate key {key!r}", ln, ind + 1)
        seen[(section, key)] = (value.strip(), ln, vcol)

    def need(sec, key):
        if (sec, key) not in seen:
            raise ParseError(f"missing [{sec}] {key}")
        return seen[(sec, key)]

    even = _names(*seen[("manifold", "even")]) if ("manifold", "even") in seen else []
    odd = _names(*seen[("manifold", "odd")]) if ("manifold", "odd") in seen else []
    if len(set(even + odd)) != len(even + odd):
        raise ParseError("coordinate names must be unique", *seen.get(("manifold", "even"), ("", None, None))[1:])
    if not even and not odd:
        raise ParseError("no coordinates declared")
    basepoint = {}
    if ("manifold", "basepoint") in seen:
        value, ln, col = seen[("manifold", "basepoint")]
        for item in filter(None, (p.strip() for p in value.split(","))):
            if ":" not in item:
                raise ParseError(f"expected 'name: value' in basepoint, found {item!r}", ln, col)
            name, val = (t.strip() for t in item.split(":", 1))
            if name not in even:
                raise ParseError(f"basepoint given for {name!r}, which is not an even coordinate", ln, col)
            basepoint[name] = _rational(val, ln, col)
    jet = 4
    if ("manifold", "jet_order") in seen:
        value, ln, col = seen[("manifold", "jet_order")]
        if not value.isdigit():
            raise ParseError("jet_order must be a non-negative integer", ln, col)
        jet = int(value)
    value, ln, col = need("truncation", "fedosov_degree")
    if not value.isdigit():
        raise ParseError("fedosov_degree must be a non-negative integer", ln, col)
    d_max = int(value) if degree is None else degree
    coords = CoordinateSystem.build(even, odd, basepoint)
    ctx = TruncationContext(d_max, jet)
    ring = Ring.get(coords, ctx)
    n = coords.dim

    value, ln, col = need("structure", "m")
    rows = [r for r in value.split(";")]
    if len(rows) != n:
        raise ParseError(f"m needs {n} rows separated by ';', found {len(rows)}", ln, col)
    mat = []
    for r in rows:
        cells = r.split(",")
        if len(cells) != n:
            raise ParseError(f"each row of m needs {n} entries", ln, col)
        mat.append([parse_expr(c, ring, line=ln, col0=col - 1) for c in cells])

    def indices(text, k, ln, col):
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != k:
            raise ParseError(f"expected {k} indices", ln, col)
        out = []
        for p in parts:
            if p.isdigit():
                i = int(p) - 1
                if not 0 <= i < n:
                    raise ParseError(f"index {p} out of range 1..{n}", ln, col)
            elif p in coords.names:
                i = coords.index(p)
            else:
                raise ParseError(f"undeclared coordinate {p!r}", ln, col)
            out.append(i)
        return tuple(out)

    gamma = {}
    for idx, value, ln, col, vcol in entries["Gamma"]:
        key = indices(idx, 3, ln, col)
        if key in gamma:
            raise ParseError("duplicate Gamma entry", ln, col)
        gamma[key] = parse_expr(value, ring, line=ln, col0=vcol - 1)
    cform = None
    if entries["C"]:
        cform = {}
        for idx, value, ln, col, vcol in entries["C"]:
            key = indices(idx, 2, ln, col)
            if key in cform:
                raise ParseError("duplicate C entry", ln, col)
            cform[key] = parse_expr(value, ring, line=ln, col0=vcol - 1)
    try:
        return GeometrySpec(coords, mat, gamma, cform, ctx)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def load_spec(path, degree=None):
    with open(path, "rb") as fh:
        return parse_spec(fh.read(), degree)


def _qtext(f):
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def format_spec(spec):
    """Canonical text for a GeometrySpec; parse_spec inverts it."""
    co = spec.coords
    even = [n for n, e in zip(co.names, co.parities) if not e]
    odd = [n for n, e in zip(co.names, co.parities) if e]
    lines = ["[manifold]", f"even = {', '.join(even)}", f"odd = {', '.join(odd)}"]
    bp = [f"{n}: {_qtext(b)}" for n, b in zip(co.names, co.basepoint) if b is not None and b != 0]
    if bp:
        lines.append(f"basepoint = {', '.join(bp)}")
    lines.append(f"jet_order = {spec.truncation.jet_order}")
    lines.append("")
    lines.append("[structure]")
    rows = "; ".join(", ".join(format_element(e) for e in row) for row in spec.m_entries)
    lines.append(f"m = {rows}")
    for (k, i, j), g in sorted(spec.christoffel.items()):
        lines.append(f"Gamma[{co.names[k]},{co.names[i]},{co.names[j]}] = {format_element(g)}")
    for (i, j), g in sorted((spec.abelian_C or {}).items()):
        lines.append(f"C[{co.names[i]},{co.names[j]}] = {format_element(g)}")
    lines.append("")
    lines.append("[truncation]")
    lines.append(f"fedosov_degree = {spec.truncation.d_max}")
    return "\n".join(lines) + "\n"
