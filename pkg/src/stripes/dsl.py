"""Reader and writer for the ``.stripe`` text format.

Example::

    # R^2 minus Z x 0
    strip S0 { top: U = (n, n + 1); bottom: none; }
    strip S1 { top: none; bottom: L = (n, n + 1); }
    family F in Z {
      glue s: S0.top.U[n] ~ S1.bottom.L[n];
    }

A side lists explicit intervals ``(lo, hi)`` and named interval families
``NAME = (expr, expr)`` whose endpoints are affine (``a + b*n``) or
geometric (``a + b*r^n``) in the family index ``n``.  Explicit intervals
are referenced by position (``A.top[0]``), family members by name and
index (``A.top.U[n+1]``).  ``#`` starts a comment.

:func:`parse` never raises anything but :class:`StripeSyntaxError`, which
carries every positioned :class:`ParseError` that was found.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from .atlas import (
    AFFINE,
    BOTTOM,
    GEOMETRIC,
    NEG_INF,
    POS_INF,
    SIDE_NAMES,
    TOP,
    AtlasError,
    BoundaryRef,
    Gluing,
    Interval,
    IntervalFamily,
    ModelStrip,
    SideSpec,
    SourceSpan,
    StripedAtlas,
    format_endpoint,
    format_rational,
)

__all__ = [
    "ParseError",
    "ResolutionError",
    "SourceSpan",
    "StripeSyntaxError",
    "parse",
    "parse_file",
    "serialize",
]

KEYWORDS = {"strip", "glue", "family", "top", "bottom", "none", "reversed", "inf", "in"}


class ParseError(Exception):
    def __init__(self, span: SourceSpan, message: str, expected: tuple[str, ...] = ()):
        super().__init__(f"{span}: {message}")
        self.span = span
        self.message = message
        self.expected = tuple(expected)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.span}, {self.message!r})"


class ResolutionError(ParseError):
    """A reference names a strip, side, interval or family that does not exist."""


class StripeSyntaxError(Exception):
    def __init__(self, errors: list[ParseError]):
        self.errors = list(errors)
        head = str(self.errors[0]) if self.errors else "parse failed"
        more = f" (+{len(self.errors) - 1} more)" if len(self.errors) > 1 else ""
        super().__init__(head + more)


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, NUM, SYM, EOF
    text: str
    span: SourceSpan


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<num>[0-9]+(?:/[0-9]+)?)|(?P<sym>[{}()\[\],;:.~+\-*^=])"
)


def _tokenize(text: str, errors: list) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            errors.append(ParseError(SourceSpan(line, col, 1), f"unexpected character {text[pos]!r}"))
            pos += 1
            continue
        kind = m.lastgroup
        chunk = m.group()
        if kind in ("ident", "num", "sym"):
            tokens.append(Token(kind.upper(), chunk, SourceSpan(line, col, len(chunk))))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", SourceSpan(line, pos - line_start + 1, 0)))
    return tokens


class _Fail(Exception):
    pass


@dataclass
class _Expr:
    const: Fraction = Fraction(0)
    lin: Fraction = Fraction(0)
    geo: dict = field(default_factory=dict)
    mentions_n: bool = False


class _Parser:
    def __init__(self, tokens: list[Token], errors: list):
        self.toks = tokens
        self.i = 0
        self.depth = 0
        self.errors = errors
        self.strips: list[ModelStrip] = []
        self.gluings: list[Gluing] = []

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def is_(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("SYM", "IDENT") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
            if t.text == "{" and t.kind == "SYM":
                self.depth += 1
            elif t.text == "}" and t.kind == "SYM":
                self.depth -= 1
        return t

    def fail(self, production: str, expected: tuple[str, ...], span: SourceSpan | None = None, message: str | None = None):
        t = self.tok
        if message is None:
            found = "end of input" if t.kind == "EOF" else repr(t.text)
            message = f"{production}: expected {' or '.join(expected)}, found {found}"
        self.errors.append(ParseError(span or t.span, message, expected))
        raise _Fail

    def expect(self, text: str, production: str) -> Token:
        if not self.is_(text):
            self.fail(production, (repr(text),))
        return self.advance()

    def ident(self, production: str) -> Token:
        t = self.tok
        if t.kind != "IDENT" or t.text in KEYWORDS:
            self.fail(production, ("identifier",))
        return self.advance()

    def number(self, production: str) -> tuple[Fraction, Token]:
        t = self.tok
        if t.kind != "NUM":
            self.fail(production, ("number",))
        self.advance()
        num, _, den = t.text.partition("/")
        if den and int(den) == 0:
            self.fail(production, ("number",), t.span, f"{production}: zero denominator in {t.text}")
        return Fraction(int(num), int(den) if den else 1), t

    def sync(self, base_depth: int) -> None:
        while self.tok.kind != "EOF":
            t = self.tok
            if t.kind == "IDENT" and t.text in ("strip", "glue", "family") and self.depth == base_depth:
                return
            if t.kind == "SYM" and t.text == "}" and self.depth == base_depth and base_depth > 0:
                return
            self.advance()
            if t.kind == "SYM" and t.text == ";" and self.depth == base_depth:
                return
            if t.kind == "SYM" and t.text == "}" and self.depth == base_depth:
                return

    # -- grammar
    def atlas(self) -> None:
        while self.tok.kind != "EOF":
            start = self.i
            try:
                self.item(family=None)
            except _Fail:
                self.sync(0)
                if self.i == start:
                    self.advance()
                    self.sync(0)

    def item(self, family: Optional[str]) -> None:
        t = self.tok
        if self.is_("strip"):
            if family is not None:
                self.fail("family", ("'glue'",), message="family: strips may not be declared inside a family")
            self.strip()
        elif self.is_("glue"):
            self.glue(family)
        elif self.is_("family"):
            if family is not None:
                self.fail("family", ("'glue'",), message="family: families may not be nested")
            self.family()
        else:
            self.fail("item", ("'strip'", "'glue'", "'family'"), t.span)

    def strip(self) -> None:
        kw = self.advance()
        name = self.ident("strip")
        self.expect("{", "strip")
        sides: dict[int, SideSpec] = {}
        while not self.is_("}"):
            if self.tok.kind == "EOF":
                self.fail("strip", ("'}'",))
            start_depth = self.depth
            try:
                side = self.side()
                if side.side in sides:
                    self.errors.append(ParseError(
                        self.toks[self.i - 1].span,
                        f"strip: side {SIDE_NAMES[side.side]} of {name.text} declared twice",
                    ))
                sides[side.side] = side
            except _Fail:
                # recover to the next side declaration inside this strip
                while self.tok.kind != "EOF" and not (self.depth == start_depth and (self.is_("}") or self.is_("top") or self.is_("bottom"))):
                    t = self.advance()
                    if t.text == ";" and self.depth == start_depth:
                        break
                if self.tok.kind == "EOF":
                    raise
        self.expect("}", "strip")
        span = SourceSpan(kw.span.line, kw.span.column, len("strip"))
        self.strips.append(ModelStrip(name.text, sides.get(TOP, SideSpec(TOP)), sides.get(BOTTOM, SideSpec(BOTTOM)), span))

    def side(self) -> SideSpec:
        if self.is_("top"):
            s = TOP
        elif self.is_("bottom"):
            s = BOTTOM
        else:
            self.fail("side", ("'top'", "'bottom'"))
        self.advance()
        self.expect(":", "side")
        intervals: list[Interval] = []
        families: list[IntervalFamily] = []
        if self.is_("none"):
            self.advance()
        else:
            while True:
                if self.tok.kind == "IDENT" and self.peek().text == "=":
                    fam = self.family_interval()
                    if any(f.name == fam.name for f in families):
                        self.errors.append(ParseError(fam.span, f"side: family {fam.name} declared twice"))
                    families.append(fam)
                else:
                    intervals.append(self.interval())
                if not self.is_(","):
                    break
                self.advance()
        if not self.is_("}"):
            self.expect(";", "side")
        return SideSpec(s, tuple(intervals), tuple(families))

    def endpoint(self):
        sign = 1
        if self.is_("+") or self.is_("-"):
            sign = -1 if self.advance().text == "-" else 1
        if self.is_("inf"):
            self.advance()
            return POS_INF if sign > 0 else NEG_INF
        value, _ = self.number("interval")
        return sign * value

    def interval(self) -> Interval:
        open_ = self.tok
        if not self.is_("("):
            self.fail("interval", ("'('", "'none'", "family name"))
        self.advance()
        lo = self.endpoint()
        self.expect(",", "interval")
        hi = self.endpoint()
        close = self.expect(")", "interval")
        span = _between(open_.span, close.span)
        if not lo < hi:
            self.fail("interval", (), span, f"interval: lower endpoint must be below upper endpoint in ({format_endpoint(lo)}, {format_endpoint(hi)})")
        return Interval(lo, hi, span)

    def ratio(self) -> Fraction:
        if self.is_("("):
            self.advance()
            sign = 1
            if self.is_("-") or self.is_("+"):
                sign = -1 if self.advance().text == "-" else 1
            value, _ = self.number("ratio")
            self.expect(")", "ratio")
            return sign * value
        value, _ = self.number("ratio")
        return value

    def term(self, expr: _Expr, sign: int) -> None:
        if self.is_("n"):
            self.advance()
            expr.lin += sign
            expr.mentions_n = True
            return
        if self.is_("("):
            r = self.ratio()
            self._power(expr, sign, r)
            return
        value, _ = self.number("expression")
        if self.is_("^"):
            self._power(expr, sign, value)
        elif self.is_("*"):
            self.advance()
            if self.is_("n"):
                self.advance()
                expr.lin += sign * value
                expr.mentions_n = True
            else:
                r = self.ratio()
                self._power(expr, sign * value, r)
        else:
            expr.const += sign * value

    def _power(self, expr: _Expr, coeff, r: Fraction) -> None:
        self.expect("^", "expression")
        if not self.is_("n"):
            self.fail("expression", ("'n'",))
        self.advance()
        expr.geo[r] = expr.geo.get(r, 0) + coeff
        expr.mentions_n = True

    def fexpr(self) -> _Expr:
        expr = _Expr()
        sign = 1
        if self.is_("+") or self.is_("-"):
            sign = -1 if self.advance().text == "-" else 1
        self.term(expr, sign)
        while self.is_("+") or self.is_("-"):
            sign = -1 if self.advance().text == "-" else 1
            if self.is_("+") or self.is_("-"):
                sign *= -1 if self.advance().text == "-" else 1
            self.term(expr, sign)
        return expr

    def family_interval(self) -> IntervalFamily:
        name = self.ident("family interval")
        self.expect("=", "family interval")
        self.expect("(", "family interval")
        lo = self.fexpr()
        self.expect(",", "family interval")
        hi = self.fexpr()
        close = self.expect(")", "family interval")
        span = _between(name.span, close.span)
        ratios = {r for r, c in list(lo.geo.items()) + list(hi.geo.items()) if c != 0}
        if (lo.geo or hi.geo) and (lo.lin or hi.lin):
            self.fail("family interval", (), span, "family interval: endpoints mix affine and geometric terms")
        if len(ratios) > 1:
            self.fail("family interval", (), span, "family interval: endpoints use different ratios")
        if not (lo.mentions_n or hi.mentions_n):
            self.fail("family interval", (), span, "family interval: endpoints do not depend on n")
        if ratios:
            (r,) = ratios
            if not 0 < abs(r) < 1:
                self.fail("family interval", (), span, "family interval: ratio must satisfy 0 < |r| < 1")
            return IntervalFamily(name.text, GEOMETRIC, lo.const, lo.geo.get(r, 0), hi.const, hi.geo.get(r, 0), r, span)
        return IntervalFamily(name.text, AFFINE, lo.const, lo.lin, hi.const, hi.lin, None, span)

    def iref(self, family: Optional[str]) -> BoundaryRef:
        strip = self.ident("reference")
        self.expect(".", "reference")
        if self.is_("top"):
            side = TOP
        elif self.is_("bottom"):
            side = BOTTOM
        else:
            self.fail("reference", ("'top'", "'bottom'"))
        self.advance()
        fam = None
        if self.is_("."):
            self.advance()
            fam = self.ident("reference").text
        self.expect("[", "reference")
        idx_tok = self.tok
        if self.is_("n"):
            if family is None:
                self.fail("reference", ("integer",), message="reference: index n is only allowed inside a family")
            self.advance()
            offset = 0
            if self.is_("+") or self.is_("-"):
                sign = -1 if self.advance().text == "-" else 1
                value, t = self.number("reference")
                if value.denominator != 1:
                    self.fail("reference", ("integer",), t.span)
                offset = sign * int(value)
            close = self.expect("]", "reference")
            span = _between(strip.span, close.span)
            # family name may be omitted when the side carries one family
            return BoundaryRef(strip.text, side, family=fam or "", offset=offset, span=span)
        value, t = self.number("reference")
        if value.denominator != 1:
            self.fail("reference", ("integer",), t.span)
        if fam is not None and family is not None:
            self.fail("reference", ("'n'",), t.span, "reference: inside a family, members are indexed by n+c")
        close = self.expect("]", "reference")
        span = _between(strip.span, close.span)
        if fam is not None:
            return BoundaryRef(strip.text, side, family=fam, offset=int(value), span=span)
        return BoundaryRef(strip.text, side, index=int(value), span=span)

    def glue(self, family: Optional[str]) -> None:
        kw = self.advance()
        name = self.ident("glue")
        self.expect(":", "glue")
        x = self.iref(family)
        self.expect("~", "glue")
        y = self.iref(family)
        rev = False
        if self.is_("reversed"):
            self.advance()
            rev = True
        self.expect(";", "glue")
        self.gluings.append(Gluing(name.text, x, y, rev, family, _between(kw.span, name.span)))

    def family(self) -> None:
        self.advance()
        name = self.ident("family")
        self.expect("in", "family")
        z = self.tok
        if not (z.kind == "IDENT" and z.text == "Z"):
            self.fail("family", ("'Z'",))
        self.advance()
        self.expect("{", "family")
        base = self.depth
        while not self.is_("}"):
            if self.tok.kind == "EOF":
                self.fail("family", ("'}'",))
            start = self.i
            try:
                self.item(family=name.text)
            except _Fail:
                self.sync(base)
                if self.i == start:
                    self.advance()
                    self.sync(base)
        self.expect("}", "family")


def _between(a: SourceSpan, b: SourceSpan) -> SourceSpan:
    if a.line == b.line:
        return SourceSpan(a.line, a.column, b.column + b.length - a.column)
    return SourceSpan(a.line, a.column, a.length)


def _resolve(strips: list[ModelStrip], gluings: list[Gluing], errors: list) -> list[Gluing]:
    by_id: dict[str, ModelStrip] = {}
    for s in strips:
        if s.id in by_id:
            errors.append(ResolutionError(s.span, f"strip: duplicate strip id {s.id}"))
        by_id[s.id] = s
    seen: set[str] = set()
    out = []
    for g in gluings:
        if g.id in seen:
            errors.append(ResolutionError(g.span, f"glue: duplicate gluing id {g.id}"))
        seen.add(g.id)
        refs = []
        for ref in (g.x, g.y):
            strip = by_id.get(ref.strip)
            if strip is None:
                errors.append(ResolutionError(ref.span, f"glue {g.id}: unknown strip {ref.strip}"))
                refs.append(ref)
                continue
            spec = strip.side(ref.side)
            if ref.family is None:
                if ref.index >= len(spec.intervals):
                    errors.append(ResolutionError(
                        ref.span,
                        f"glue {g.id}: {ref.strip}.{SIDE_NAMES[ref.side]} has no interval {ref.index}",
                    ))
            elif ref.family == "":
                if len(spec.families) != 1:
                    errors.append(ResolutionError(
                        ref.span,
                        f"glue {g.id}: {ref.strip}.{SIDE_NAMES[ref.side]} needs an explicit family name",
                    ))
                else:
                    ref = BoundaryRef(ref.strip, ref.side, family=spec.families[0].name, offset=ref.offset, span=ref.span)
            elif spec.family(ref.family) is None:
                errors.append(ResolutionError(
                    ref.span,
                    f"glue {g.id}: {ref.strip}.{SIDE_NAMES[ref.side]} has no family {ref.family}",
                ))
            refs.append(ref)
        out.append(Gluing(g.id, refs[0], refs[1], g.reversed, g.family, g.span))
    return out


def _decode(data: bytes, errors: list) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        prefix = data[: exc.start].decode("utf-8", errors="replace")
        line = prefix.count("\n") + 1
        col = len(prefix) - (prefix.rfind("\n") + 1) + 1
        errors.append(ParseError(SourceSpan(line, col, 1), "input is not valid UTF-8"))
        return ""


def parse(text: Union[str, bytes]) -> StripedAtlas:
    """Parse ``.stripe`` source into a :class:`StripedAtlas`."""
    errors: list[ParseError] = []
    if isinstance(text, (bytes, bytearray)):
        text = _decode(bytes(text), errors)
        if errors:
            raise StripeSyntaxError(errors)
    tokens = _tokenize(text, errors)
    p = _Parser(tokens, errors)
    p.atlas()
    if errors:
        raise StripeSyntaxError(errors)
    gluings = _resolve(p.strips, p.gluings, errors)
    if errors:
        raise StripeSyntaxError(errors)
    try:
        return StripedAtlas(tuple(p.strips), tuple(gluings))
    except (AtlasError, ValueError) as exc:  # defensive: resolution covers these
        raise StripeSyntaxError([ParseError(SourceSpan(1, 1, 0), str(exc))])


def parse_file(path: Union[str, Path]) -> StripedAtlas:
    return parse(Path(path).read_bytes())


# --------------------------------------------------------------------------
# serializer


def _ratio_text(r: Fraction) -> str:
    return f"({format_rational(r)})" if r < 0 else format_rational(r)


def _fam_endpoint(const: Fraction, coeff: Fraction, fam: IntervalFamily) -> str:
    if fam.kind == AFFINE:
        return f"{format_rational(const)} + {format_rational(coeff)}*n"
    return f"{format_rational(const)} + {format_rational(coeff)}*{_ratio_text(fam.ratio)}^n"


def _side_text(spec: SideSpec) -> str:
    parts = [str(iv) for iv in spec.intervals]
    for fam in sorted(spec.families, key=lambda f: f.name):
        lo = _fam_endpoint(fam.a0, fam.a1, fam)
        hi = _fam_endpoint(fam.b0, fam.b1, fam)
        parts.append(f"{fam.name} = ({lo}, {hi})")
    return ", ".join(parts) if parts else "none"


def _ref_text(ref: BoundaryRef, in_family: bool) -> str:
    head = f"{ref.strip}.{SIDE_NAMES[ref.side]}"
    if ref.family is None:
        return f"{head}[{ref.index}]"
    if not in_family:
        return f"{head}.{ref.family}[{ref.offset}]"
    idx = "n" if ref.offset == 0 else f"n{ref.offset:+d}"
    return f"{head}.{ref.family}[{idx}]"


def _glue_text(g: Gluing) -> str:
    tail = " reversed" if g.reversed else ""
    x = _ref_text(g.x, bool(g.family))
    y = _ref_text(g.y, bool(g.family))
    return f"glue {g.id}: {x} ~ {y}{tail};"


def serialize(atlas: StripedAtlas) -> str:
    """Canonical, byte-deterministic ``.stripe`` text for ``atlas``."""
    lines = []
    for s in sorted(atlas.strips, key=lambda s: s.id):
        lines.append(f"strip {s.id} {{")
        lines.append(f"  top: {_side_text(s.top)};")
        lines.append(f"  bottom: {_side_text(s.bottom)};")
        lines.append("}")
    plain = sorted((g for g in atlas.gluings if not g.family), key=lambda g: g.id)
    lines.extend(_glue_text(g) for g in plain)
    families = sorted({g.family for g in atlas.gluings if g.family})
    for name in families:
        lines.append(f"family {name} in Z {{")
        for g in sorted((g for g in atlas.gluings if g.family == name), key=lambda g: g.id):
            lines.append("  " + _glue_text(g))
        lines.append("}")
    return "\n".join(lines) + "\n"
