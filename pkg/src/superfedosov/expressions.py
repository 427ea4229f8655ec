"""Expression parsing and deterministic formatting of Elements.

Grammar (whitespace is insignificant)::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' factor) | ('/' factor) | 'i')*
    factor  := '-'? base ('^' nat)?
    base    := nat | 'i' | 'hbar' | name | 'c[' name ']' | 'y[' name ']'
             | '(' expr ')'

A divisor must evaluate to a nonzero constant. A bare ``i`` directly after a
factor multiplies it (so formatted coefficients like ``(1/2 i)`` reparse).
An even coordinate name stands for basepoint + deviation. Anything after a
``|`` (the trust annotation written by :func:`format_element`) is ignored.
"""

import json
import re

from .errors import ParseError
from .graded_algebra import INF, C, X, Y
from .scalar import Scalar

__all__ = ["parse_expr", "format_element", "element_records", "element_json", "trust_annotation"]

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text):
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace can fail
            break
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("num", m.group(1), start))
        elif m.group(2):
            out.append(("name", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()[]":
                raise ParseError(f"unexpected character {ch!r}", 1, start + 1)
            out.append((ch, ch, start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, ring, line=1, col0=0):
        self.toks = _tokenize(text)
        self.k = 0
        self.ring = ring
        self.line = line
        self.col0 = col0
        self.names = {n: i for i, n in enumerate(ring.coords.names)}

    def peek(self):
        return self.toks[self.k]

    def take(self, kind=None):
        t = self.toks[self.k]
        if kind is not None and t[0] != kind:
            self.fail(f"expected {kind!r}, found {t[1] or 'end of input'!r}", t)
        self.k += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.line, self.col0 + tok[2] + 1)

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return e

    def expr(self):
        out = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            t = self.term()
            out = out + t if op == "+" else out - t
        return out

    def term(self):
        out = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "*":
                self.take()
                out = out * self.factor()
            elif kind == "/":
                tok = self.take()
                d = self.factor()
                if any(k != 0 for k in d.terms):
                    self.fail("division by a non-constant", tok)
                if d.is_zero():
                    self.fail("division by zero", tok)
                out = out.scale(d.terms[0].inverse())
            elif kind == "name" and val == "i":
                self.take()
                out = out.scale(Scalar(0, 1))
            else:
                return out

    def factor(self):
        neg = False
        if self.peek()[0] == "-":
            self.take()
            neg = True
        b = self.base()
        if self.peek()[0] == "^":
            self.take()
            tok = self.take("num")
            e = int(tok[1])
            p = self.ring.one()
            for _ in range(e):
                p = p * b
            b = p
        return -b if neg else b

    def base(self):
        kind, val, _ = tok = self.take()
        ring = self.ring
        if kind == "num":
            return ring.const(int(val))
        if kind == "(":
            e = self.expr()
            self.take(")")
            return e
        if kind == "name":
            if val == "i":
                return ring.const(Scalar(0, 1))
            if val == "hbar":
                return ring.hbar()
            if val in ("c", "y") and self.peek()[0] == "[":
                self.take()
                nt = self.take("name")
                if nt[1] not in self.names:
                    self.fail(f"undeclared coordinate {nt[1]!r}", nt)
                self.take("]")
                i = self.names[nt[1]]
                return ring.c(i) if val == "c" else ring.y(i)
            if val in self.names:
                i = self.names[val]
                b = ring.coords.basepoint[i]
                g = ring.x(i)
                return g + ring.const(b) if b else g
            self.fail(f"undeclared coordinate {val!r}", tok)
        self.fail(f"unexpected {val or 'end of input'!r}", tok)


def parse_expr(text, coords_or_ring, ctx=None, line=1, col0=0):
    """Parse ``text`` into an Element. Parsed expressions are polynomials and
    are exact (validity infinity)."""
    from .graded_algebra import Ring

    ring = coords_or_ring if ctx is None else Ring.get(coords_or_ring, ctx)
    body = text.split("|", 1)[0]
    return _Parser(body, ring, line, col0).parse()


# -- formatting -------------------------------------------------------------


def _gen_name(ring, s):
    kind, i = ring.kinds[s]
    coords = ring.coords
    if kind == "hbar":
        return "hbar"
    name = coords.names[i]
    if kind == "x":
        b = coords.basepoint[i]
        if b:
            sign = "-" if b > 0 else "+"
            return f"({name}{sign}{_q(abs(b))})"
        return name
    if kind == "c":
        return f"c[{name}]"
    if kind == "y":
        return f"y[{name}]"
    return f"ybar[{name}]"


def _q(f):
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _monomial_text(ring, key):
    parts = []
    for s in range(ring.nslots):
        e = ring.exponent(key, s)
        if e:
            n = _gen_name(ring, s)
            parts.append(n if e == 1 else f"{n}^{e}")
    return "*".join(parts)


def _sort_key(ring, key):
    inf = ring.info(key)
    exps = ring.unpack(key)
    return (exps[0], inf[2], inf[3], inf[1], tuple(-e for e in exps[1:]))


def _ordered(a):
    ring = a.ring
    return sorted(a.terms.items(), key=lambda kv: _sort_key(ring, kv[0]))


def format_element(a, annotate=False):
    """Deterministic text form; ``annotate`` appends the trust annotation."""
    ring = a.ring
    pieces = []
    for key, c in _ordered(a):
        mono = _monomial_text(ring, key)
        if c.is_real():
            neg = c.re < 0
            mag = -c if neg else c
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
        else:
            neg = False
            body = f"{c}*{mono}" if mono else str(c)
        if not pieces:
            pieces.append(("-" if neg else "") + body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    text = "".join(pieces) if pieces else "0"
    if annotate:
        text += " | " + trust_annotation(a)
    return text


def trust_annotation(a):
    hb = a.ring.ctx.d_max // 2
    jet = "exact" if a.validity == INF else f"O({a.validity + 1})"
    return f"trusted: hbar^{hb}, jet {jet}"


def element_records(a):
    """One record per term, in formatting order."""
    ring = a.ring
    rows = []
    for key, c in _ordered(a):
        mono = {}
        for s in range(ring.nslots):
            e = ring.exponent(key, s)
            if e:
                kind, i = ring.kinds[s]
                nm = "hbar" if kind == "hbar" else (ring.coords.names[i] if kind == "x" else f"{kind}[{ring.coords.names[i]}]")
                mono[nm] = e
        rows.append({"re": _q(c.re), "im": _q(c.im), "monomial": mono, "text": format_element(ring.element({key: c}))})
    return rows


def element_json(a):
    hb = a.ring.ctx.d_max // 2
    return {
        "terms": element_records(a),
        "text": format_element(a),
        "trusted": {"hbar": hb, "jet": None if a.validity == INF else a.validity},
    }


def dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
