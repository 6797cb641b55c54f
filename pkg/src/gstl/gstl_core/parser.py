"""Text grammar for GSTL formulas.

Grammar, loosest binding first::

    formula  := conj ('|' conj)*
    conj     := chain ('&' chain)*
    chain    := unary (UNTIL unary)*          # a U b U c == (a U b) & (b U c)
    unary    := '!' unary | 'G' bound unary | 'F' bound unary
              | SPATIAL unary | primary
    primary  := IDENT | STRING | 'true' | 'false' | '(' formula ')'
    SPATIAL  := PE | PA | CE | CA  (optional repeat count, e.g. CE2)
              | 'P' set | 'C' set | NE pattern | NA pattern | 'N' set pattern
    pattern  := '^' DIRECTION | '<' axis ',' axis ',' axis '>'
    axis     := '*' | REL | '{' REL (',' REL)* '}'
    set      := '{' name (',' name)* '}'
    UNTIL    := Ub | Uo | Ud | Ueq (each followed by a bound) | Um | Us | Uf
                (and the inverse kinds Ubi, Uoi, ... which swap operands)
    bound    := '[' end ',' end ']'      end := INT | '?' IDENT (('+'|'-') INT)?
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..interval_algebra import ALL_RELATIONS, IA, Direction
from .syntax import (
    EXISTS, FORALL, Always, And, Atom, BoolConst, Child, Eventually, Formula, Neighbor, Not,
    Or, Param, Parent, Ref, RelPattern, SpatialTerm, TAnd, Term, TimeBound, TNot, TOr, Until,
    f_and,
)

__all__ = ["ParseError", "Token", "Parser", "parse", "parse_term", "render", "render_term",
           "parse_definitions", "tokenize"]


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 1, expected=()):
        self.line, self.col = line, col
        self.expected = tuple(sorted(set(expected)))
        extra = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{extra}")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT STRING INT OP EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<string>"[^"\n]*"|'[^'\n]*')
  | (?P<op>:=|[()\[\]{}<>,!&|^*?+\-=;])
""", re.VERBOSE)


def tokenize(text: str) -> list[Token]:
    out, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "string":
            out.append(Token("STRING", s[1:-1], line, col))
        elif kind == "int":
            out.append(Token("INT", s, line, col))
        elif kind == "ident":
            out.append(Token("IDENT", s, line, col))
        elif kind == "op":
            out.append(Token("OP", s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rindex("\n") + 1
        pos = m.end()
    col = pos - line_start + 1
    out.append(Token("EOF", "", line, col))
    return out


_UNTIL_RE = re.compile(r"^U(b|bi|o|oi|d|di|eq|e|m|mi|s|si|f|fi)$")
_QUANT_RE = re.compile(r"^([PC])([EA])(\d*)$")
_REL_NAMES = {r.value: r for r in IA} | {"eq": IA.E}
_KEYWORDS = {"G", "F", "P", "C", "N", "NE", "NA", "true", "false"}
_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")


def _is_keyword(name: str) -> bool:
    return name in _KEYWORDS or bool(_UNTIL_RE.match(name) or _QUANT_RE.match(name))


class Parser:
    def __init__(self, tokens: list[Token], names=()):
        self.toks = tokens
        self.i = 0
        self.names = frozenset(names)

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, expected=()) -> ParseError:
        return ParseError(msg, self.tok.line, self.tok.col, expected)

    def at_op(self, *ops: str) -> bool:
        return self.tok.kind == "OP" and self.tok.text in ops

    def take_op(self, op: str) -> Token:
        if not self.at_op(op):
            found = self.tok.text or "end of input"
            raise self.error(f"found {found!r}", [repr(op)])
        t = self.tok
        self.i += 1
        return t

    def take_ident(self, what: str = "identifier") -> str:
        if self.tok.kind not in ("IDENT", "STRING"):
            raise self.error(f"found {self.tok.text or 'end of input'!r}", [what])
        t = self.tok
        self.i += 1
        return t.text

    def take_int(self) -> int:
        sign = -1 if self.at_op("-") else 1
        if sign < 0:
            self.i += 1
        if self.tok.kind != "INT":
            raise self.error(f"found {self.tok.text or 'end of input'!r}", ["integer"])
        v = int(self.tok.text)
        self.i += 1
        return sign * v

    def expect_end(self):
        if self.tok.kind != "EOF":
            raise self.error(f"unexpected {self.tok.text!r}", ["end of input", "'&'", "'|'"])

    # -- grammar
    def formula(self) -> Formula:
        first = self.conj()
        args = [first]
        while self.at_op("|"):
            self.i += 1
            args.append(self.conj())
        return args[0] if len(args) == 1 else _combine(args, TOr, Or)

    def conj(self) -> Formula:
        args = [self.chain()]
        while self.at_op("&"):
            self.i += 1
            args.append(self.chain())
        return args[0] if len(args) == 1 else _combine(args, TAnd, And)

    def _until_kind(self) -> str | None:
        if self.tok.kind == "IDENT":
            m = _UNTIL_RE.match(self.tok.text)
            if m:
                return m.group(1)
        return None

    def chain(self) -> Formula:
        operands = [self.unary()]
        ops = []
        while (kind := self._until_kind()) is not None:
            self.i += 1
            base = kind[0] if kind not in ("eq", "e") else "eq"
            if base in ("m", "s", "f"):
                if self.at_op("["):
                    raise self.error(f"until kind {kind!r} takes no interval")
                bound = None
            else:
                bound = self.bound()
            ops.append((kind, bound))
            operands.append(self.unary())
        if not ops:
            return operands[0]
        parts = [Until(k, b, operands[i], operands[i + 1]) for i, (k, b) in enumerate(ops)]
        return parts[0] if len(parts) == 1 else f_and(*parts)

    def bound(self) -> TimeBound:
        self.take_op("[")
        lo = self.endpoint()
        self.take_op(",")
        hi = self.endpoint()
        self.take_op("]")
        try:
            return TimeBound(lo, hi)
        except ValueError as exc:
            raise self.error(str(exc)) from None

    def endpoint(self):
        if self.at_op("?"):
            self.i += 1
            name = self.take_ident("parameter name")
            off = 0
            if self.at_op("+", "-"):
                sign = 1 if self.tok.text == "+" else -1
                self.i += 1
                off = sign * self.take_int()
            return Param(name, off)
        return self.take_int()

    def unary(self) -> Formula:
        t = self.tok
        if self.at_op("!"):
            self.i += 1
            arg = self.unary()
            return Term(TNot(arg.term)) if isinstance(arg, Term) else Not(arg)
        if t.kind == "IDENT":
            nxt = self.peek()
            if t.text in ("G", "F") and nxt.kind == "OP" and nxt.text == "[":
                self.i += 1
                b = self.bound()
                arg = self.unary()
                return Always(b, arg) if t.text == "G" else Eventually(b, arg)
            wrap = self.spatial_prefix()
            if wrap is not None:
                arg = self.unary()
                if not isinstance(arg, Term):
                    raise ParseError("spatial operator applied to a temporal formula",
                                     t.line, t.col)
                return Term(wrap(arg.term))
        return self.primary()

    def spatial_prefix(self):
        """Parse a spatial operator prefix; return a term -> term wrapper or None."""
        t, nxt = self.tok, self.peek()
        m = _QUANT_RE.match(t.text)
        if m:
            self.i += 1
            cls = Parent if m.group(1) == "P" else Child
            sel = EXISTS if m.group(2) == "E" else FORALL
            n = int(m.group(3) or 1)
            if n < 1:
                raise ParseError("repeat count must be positive", t.line, t.col)

            def wrap(x, cls=cls, sel=sel, n=n):
                for _ in range(n):
                    x = cls(sel, x)
                return x
            return wrap
        if t.text in ("P", "C") and nxt.kind == "OP" and nxt.text == "{":
            self.i += 1
            ids = self.id_set()
            cls = Parent if t.text == "P" else Child
            return lambda x: cls(ids, x)
        if t.text in ("NE", "NA"):
            self.i += 1
            pat = self.pattern()
            sel = EXISTS if t.text == "NE" else FORALL
            return lambda x: Neighbor(sel, pat, x)
        if t.text == "N" and nxt.kind == "OP" and nxt.text == "{":
            self.i += 1
            ids = self.id_set()
            pat = self.pattern()
            return lambda x: Neighbor(ids, pat, x)
        return None

    def id_set(self) -> tuple:
        self.take_op("{")
        ids = [self.take_ident("node id")]
        while self.at_op(","):
            self.i += 1
            ids.append(self.take_ident("node id"))
        self.take_op("}")
        return tuple(ids)

    def pattern(self) -> RelPattern:
        if self.at_op("^"):
            self.i += 1
            name = self.take_ident("direction")
            try:
                return RelPattern.of(Direction(name))
            except ValueError:
                self.i -= 1
                raise self.error(f"unknown direction {name!r}",
                                 [d.value for d in Direction]) from None
        if not self.at_op("<"):
            raise self.error(f"found {self.tok.text or 'end of input'!r}", ["'^'", "'<'"])
        self.i += 1
        axes = [self.axis()]
        for _ in range(2):
            self.take_op(",")
            axes.append(self.axis())
        self.take_op(">")
        return RelPattern(tuple(axes))

    def axis(self) -> frozenset:
        if self.at_op("*"):
            self.i += 1
            return ALL_RELATIONS
        if self.at_op("{"):
            self.i += 1
            rels = {self.rel()}
            while self.at_op(","):
                self.i += 1
                rels.add(self.rel())
            self.take_op("}")
            return frozenset(rels)
        return frozenset({self.rel()})

    def rel(self) -> IA:
        if self.tok.kind != "IDENT" or self.tok.text not in _REL_NAMES:
            raise self.error(f"found {self.tok.text or 'end of input'!r}", sorted(_REL_NAMES))
        r = _REL_NAMES[self.tok.text]
        self.i += 1
        return r

    def primary(self) -> Formula:
        t = self.tok
        if self.at_op("("):
            self.i += 1
            f = self.formula()
            self.take_op(")")
            return f
        if t.kind == "STRING":
            self.i += 1
            return Term(Atom(t.text))
        if t.kind == "IDENT":
            if t.text in ("true", "false"):
                self.i += 1
                return Term(BoolConst(t.text == "true"))
            if _is_keyword(t.text):
                raise self.error(f"keyword {t.text!r} cannot start an operand")
            self.i += 1
            return Term(Ref(t.text) if t.text in self.names else Atom(t.text))
        raise self.error(f"found {t.text or 'end of input'!r}",
                         ["identifier", "'('", "'!'", "'G'", "'F'", "spatial operator"])


def _combine(args, term_cls, formula_cls):
    if all(isinstance(a, Term) for a in args):
        return Term(term_cls(tuple(a.term for a in args)))
    return formula_cls(tuple(args))


def parse(text: str, names=()) -> Formula:
    """Parse a formula; identifiers listed in ``names`` become :class:`Ref` nodes."""
    p = Parser(tokenize(text), names)
    f = p.formula()
    p.expect_end()
    return f


def parse_term(text: str, names=()) -> SpatialTerm:
    f = parse(text, names)
    if not isinstance(f, Term):
        raise ParseError("expected a spatial term, got a temporal formula")
    return f.term


def parse_definitions(text: str):
    """Parse a ``.gstl`` file body.

    Returns ``(defs, blocks)``: ``defs`` maps names to formulas in file order;
    ``blocks`` is a list of ``(keyword, name, fields, line)`` for brace blocks
    such as ``action a1 { pre=s1, move_time=5, add=[s2] }``. A definition may
    refer to any name defined anywhere in the file.
    """
    toks = tokenize(text)
    names = {toks[i].text for i in range(len(toks) - 1)
             if toks[i].kind == "IDENT" and toks[i + 1].kind == "OP" and toks[i + 1].text == ":="}
    p = Parser(toks, names)
    defs: dict[str, Formula] = {}
    blocks = []
    while p.tok.kind != "EOF":
        if p.at_op(";"):
            p.i += 1
            continue
        start = p.tok
        head = p.take_ident("definition name")
        if p.at_op(":="):
            p.i += 1
            if head in defs:
                raise ParseError(f"duplicate definition {head!r}", start.line, start.col)
            # a definition ends where the next `name :=` or block starts
            end = p.i
            depth = 0
            while True:
                t = toks[end]
                if t.kind == "EOF":
                    break
                if t.kind == "OP" and t.text in "([{":
                    depth += 1
                elif t.kind == "OP" and t.text in ")]}":
                    depth -= 1
                elif depth == 0 and t.kind == "OP" and t.text == ";":
                    break
                elif depth == 0 and t.kind == "IDENT" and t.line > start.line:
                    nx = toks[end + 1]
                    if (nx.kind == "OP" and nx.text == ":=") or (
                            t.text == "action" and nx.kind == "IDENT"):
                        break
                end += 1
            sub = Parser(toks[p.i:end] + [Token("EOF", "", toks[end].line, toks[end].col)], names)
            defs[head] = sub.formula()
            sub.expect_end()
            p.i = end
        elif p.tok.kind == "IDENT":
            name = p.take_ident("block name")
            p.take_op("{")
            fields = {}
            while not p.at_op("}"):
                key = p.take_ident("field name")
                p.take_op("=")
                fields[key] = _block_value(p)
                if p.at_op(","):
                    p.i += 1
                elif not p.at_op("}"):
                    raise p.error(f"found {p.tok.text!r}", ["','", "'}'"])
            p.take_op("}")
            blocks.append((head, name, fields, start.line))
        else:
            raise p.error(f"found {p.tok.text!r}", ["':='", "block name"])
    return defs, blocks


def _block_value(p: Parser):
    if p.at_op("["):
        p.i += 1
        items = []
        while not p.at_op("]"):
            items.append(p.take_ident("name"))
            if p.at_op(","):
                p.i += 1
            elif not p.at_op("]"):
                raise p.error(f"found {p.tok.text!r}", ["','", "']'"])
        p.i += 1
        return items
    if p.tok.kind == "INT" or p.at_op("-"):
        return p.take_int()
    return p.take_ident("value")


# ---------------------------------------------------------------- rendering

def _name(s: str) -> str:
    if _IDENT_RE.match(s) and not _is_keyword(s):
        return s
    if '"' in s:
        return f"'{s}'"
    return f'"{s}"'


def _end(e) -> str:
    if isinstance(e, Param):
        if e.offset == 0:
            return f"?{e.name}"
        return f"?{e.name}{'+' if e.offset > 0 else '-'}{abs(e.offset)}"
    return str(e)


def _bound(b: TimeBound) -> str:
    return f"[{_end(b.lo)},{_end(b.hi)}]"


_IA_ORDER = {r: i for i, r in enumerate(IA)}


def _axis(a: frozenset) -> str:
    if a == ALL_RELATIONS:
        return "*"
    rels = sorted(a, key=_IA_ORDER.get)
    return rels[0].value if len(rels) == 1 else "{" + ",".join(r.value for r in rels) + "}"


def _pattern(p: RelPattern) -> str:
    if p.macro is not None:
        return f"^{p.macro.value}"
    return "<" + ",".join(_axis(a) for a in p.axes) + ">"


def _sel_set(sel) -> str:
    return "{" + ",".join(_name(s) for s in sel) + "}"


# precedence levels: 0 or, 1 and, 2 chain, 3 unary
def render_term(t: SpatialTerm, level: int = 0) -> str:
    if isinstance(t, Atom):
        return _name(t.label)
    if isinstance(t, Ref):
        return t.name
    if isinstance(t, BoolConst):
        return "true" if t.value else "false"
    if isinstance(t, TNot):
        return "!" + render_term(t.arg, 3)
    if isinstance(t, (TAnd, TOr)):
        op, lv = (" & ", 1) if isinstance(t, TAnd) else (" | ", 0)
        s = op.join(render_term(a, lv + 1) for a in t.args)
        return f"({s})" if level > lv else s
    if isinstance(t, (Parent, Child)):
        letter = "P" if isinstance(t, Parent) else "C"
        if t.sel in (EXISTS, FORALL):
            n, inner = 1, t.arg
            while type(inner) is type(t) and inner.sel == t.sel:
                n, inner = n + 1, inner.arg
            return f"{letter}{t.sel}{n if n > 1 else ''} " + render_term(inner, 3)
        return f"{letter}{_sel_set(t.sel)} " + render_term(t.arg, 3)
    if isinstance(t, Neighbor):
        head = f"N{t.sel}" if t.sel in (EXISTS, FORALL) else f"N{_sel_set(t.sel)}"
        return f"{head}{_pattern(t.pattern)} " + render_term(t.arg, 3)
    raise TypeError(f"not a spatial term: {t!r}")


def render(f: Formula, level: int = 0) -> str:
    if isinstance(f, Term):
        return render_term(f.term, level)
    if isinstance(f, Not):
        return "!" + render(f.arg, 3)
    if isinstance(f, (And, Or)):
        op, lv = (" & ", 1) if isinstance(f, And) else (" | ", 0)
        s = op.join(render(a, lv + 1) for a in f.args)
        return f"({s})" if level > lv else s
    if isinstance(f, (Always, Eventually)):
        head = "G" if isinstance(f, Always) else "F"
        return f"{head}{_bound(f.bound)} " + render(f.arg, 3)
    if isinstance(f, Until):
        b = _bound(f.bound) if f.bound is not None else ""
        s = f"{render(f.lhs, 3)} U{f.kind}{b} {render(f.rhs, 3)}"
        return f"({s})" if level > 2 else s
    raise TypeError(f"not a formula: {f!r}")
