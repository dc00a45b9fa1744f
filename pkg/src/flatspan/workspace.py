"""Workspace documents: named schemes, spans, and check requests.

A document is line oriented; ``#`` starts a comment and blank lines are
ignored.  The statements are:

    workspace NAME                      (optional, at most once)
    field QQ                            (or: field Fp P)
    scheme NAME = point
    scheme NAME = line VAR
    scheme NAME = torus VAR
    scheme NAME = torus^N
    scheme NAME = product NAME NAME
    span NAME : NAME -> NAME {
      piece {
        vars a, b, b_inv
        rels POLY, POLY
        source COORD: POLY, ...
        target COORD: POLY, ...
      }
    }
    check NAME = COMMAND OPERAND... KEY: VALUE ...

Within a piece, listing both ``v`` and ``v_inv`` marks ``v`` as
invertible with ``v_inv`` as its companion.  Omitted ``vars``/``rels``/
``source``/``target`` lines mean empty.  Names live in one namespace,
must be declared before use, and may not be redeclared; after
resolution the document's meaning does not depend on declaration order.

``print_workspace`` emits the canonical form: declarations in original
order, polynomials in canonical text, arguments in the fixed per-command
order.  Parsing a canonical document and printing it again is the
identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field

from .fields import Field, GF, QQ
from .poly import PolynomialRing, companion_name
from .polyparse import ParseError, format_polynomial, parse_polynomial
from .schemes import AffineScheme, affine_line, point, product, torus, torus_power
from .spans import Correspondence, SpanError, make_piece, validate_correspondence


class WorkspaceError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


# command -> (operand count, required keys, optional keys), in canonical order
COMMANDS: dict[str, tuple[int, tuple[str, ...], tuple[str, ...]]] = {
    "compose": (2, (), ()),
    "add": (2, (), ()),
    "tensor": (2, (), ()),
    "certify": (1, (), ()),
    "degree": (1, (), ()),
    "bound": (1, ("f",), ("f2",)),
    "slice": (1, ("f", "n"), ("f2", "a", "b")),
    "cancel": (1, ("m", "n", "sign"), ()),
    "cancel-slice": (1, ("n", "sign"), ()),
    "filtration": (1, (), ("window",)),
    "verify-compat": (3, ("m", "n", "sign"), ()),
    "verify-cancellation": (0, ("n",), ()),
    "contract": (1, (), ()),
    "verify-contraction": (1, (), ()),
}

INT_KEYS = {"n", "m", "a", "b", "window"}
POLY_KEYS = {"f", "f2"}
SIGN_KEYS = {"sign"}


@dataclass(frozen=True)
class SchemeDecl:
    name: str
    kind: str
    args: tuple[str, ...]
    line: int = 0


@dataclass(frozen=True)
class SpanDecl:
    name: str
    source: str
    target: str
    line: int = 0


@dataclass(frozen=True)
class CheckRequest:
    name: str
    command: str
    operands: tuple[str, ...]
    args: tuple[tuple[str, str], ...]
    line: int = 0

    def arg(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.args:
            if k == key:
                return v
        return default


@dataclass
class WorkspaceDocument:
    field_text: str
    field: Field
    name: str | None = None
    scheme_decls: tuple[SchemeDecl, ...] = ()
    span_decls: tuple[SpanDecl, ...] = ()
    schemes: dict[str, AffineScheme] = dc_field(default_factory=dict)
    spans: dict[str, Correspondence] = dc_field(default_factory=dict)
    checks: tuple[CheckRequest, ...] = ()


_WORKSPACE = re.compile(r"workspace\s+([A-Za-z_][\w-]*)\s*$")
_FIELD = re.compile(r"field\s+(QQ|Fp\s+\d+)\s*$")
_SCHEME = re.compile(r"scheme\s+([A-Za-z_]\w*)\s*=\s*(.+?)\s*$")
_SPAN = re.compile(
    r"span\s+([A-Za-z_]\w*)\s*:\s*([A-Za-z_]\w*)\s*->\s*([A-Za-z_]\w*)\s*\{\s*$"
)
_CHECK = re.compile(r"check\s+([A-Za-z_][\w-]*)\s*=\s*(.+?)\s*$")
_IDENT = re.compile(r"[A-Za-z_]\w*$")
_KEYED = re.compile(r"(?:^|\s)([A-Za-z_][\w]*):\s")


def _strip_comment(line: str) -> str:
    cut = line.find("#")
    return line if cut < 0 else line[:cut]


def _split_list(text: str) -> list[str]:
    items = [part.strip() for part in text.split(",")]
    return [part for part in items if part]


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0
        self.doc_name: str | None = None
        self.field_text: str | None = None
        self.field: Field | None = None
        self.scheme_decls: list[SchemeDecl] = []
        self.span_decls: list[SpanDecl] = []
        self.schemes: dict[str, AffineScheme] = {}
        self.spans: dict[str, Correspondence] = {}
        self.checks: list[CheckRequest] = []
        self.taken: set[str] = set()

    # -- plumbing ------------------------------------------------------

    def error(self, message: str, line: int | None = None) -> WorkspaceError:
        return WorkspaceError(message, self.pos if line is None else line)

    def next_line(self) -> tuple[int, str] | None:
        while self.pos < len(self.lines):
            self.pos += 1
            stripped = _strip_comment(self.lines[self.pos - 1]).strip()
            if stripped:
                return self.pos, stripped
        return None

    def claim(self, name: str, line: int) -> None:
        if name in self.taken:
            raise self.error(f"duplicate name {name!r}", line)
        self.taken.add(name)

    def need_field(self, line: int) -> Field:
        if self.field is None:
            raise self.error("a field declaration must come first", line)
        return self.field

    # -- statements ----------------------------------------------------

    def parse(self) -> WorkspaceDocument:
        while True:
            item = self.next_line()
            if item is None:
                break
            line, text = item
            if text.startswith("workspace"):
                self.parse_header(line, text)
            elif text.startswith("field"):
                self.parse_field(line, text)
            elif text.startswith("scheme"):
                self.parse_scheme(line, text)
            elif text.startswith("span"):
                self.parse_span(line, text)
            elif text.startswith("check"):
                self.parse_check(line, text)
            else:
                raise self.error(f"unrecognized statement {text.split()[0]!r}", line)
        if self.field is None:
            raise self.error("document never declares a field")
        return WorkspaceDocument(
            self.field_text or "QQ",
            self.field,
            self.doc_name,
            tuple(self.scheme_decls),
            tuple(self.span_decls),
            self.schemes,
            self.spans,
            tuple(self.checks),
        )

    def parse_header(self, line: int, text: str) -> None:
        m = _WORKSPACE.match(text)
        if not m:
            raise self.error("expected: workspace NAME", line)
        if self.doc_name is not None:
            raise self.error("duplicate workspace header", line)
        self.doc_name = m.group(1)

    def parse_field(self, line: int, text: str) -> None:
        m = _FIELD.match(text)
        if not m:
            raise self.error("expected: field QQ, or: field Fp P", line)
        if self.field is not None:
            raise self.error("duplicate field declaration", line)
        spec = " ".join(m.group(1).split())
        self.field_text = spec
        if spec == "QQ":
            self.field = QQ
        else:
            self.field = GF(int(spec.split()[1]))

    def parse_scheme(self, line: int, text: str) -> None:
        m = _SCHEME.match(text)
        if not m:
            raise self.error("expected: scheme NAME = KIND ...", line)
        name, rhs = m.group(1), m.group(2)
        field = self.need_field(line)
        self.claim(name, line)
        parts = rhs.split()
        kind = parts[0]
        args = tuple(parts[1:])
        power = re.match(r"torus\^(\d+)$", kind)
        if kind == "point" and not args:
            built = point(field)
        elif kind == "line" and len(args) == 1 and _IDENT.match(args[0]):
            built = affine_line(field, args[0])
        elif kind == "torus" and len(args) == 1 and _IDENT.match(args[0]):
            built = torus(field, args[0])
        elif power and not args:
            built = torus_power(field, int(power.group(1)))
        elif kind == "product" and len(args) == 2:
            factors = [self.lookup_scheme(a, line) for a in args]
            try:
                built = product(factors[0], factors[1])
            except ValueError as err:
                raise self.error(str(err), line) from err
        else:
            raise self.error(f"unrecognized scheme form {rhs!r}", line)
        self.scheme_decls.append(SchemeDecl(name, kind, args, line))
        self.schemes[name] = built

    def lookup_scheme(self, name: str, line: int) -> AffineScheme:
        if name not in self.schemes:
            raise self.error(f"unresolved scheme reference {name!r}", line)
        return self.schemes[name]

    def lookup_span(self, name: str, line: int) -> Correspondence:
        if name not in self.spans:
            raise self.error(f"unresolved span reference {name!r}", line)
        return self.spans[name]

    def parse_span(self, line: int, text: str) -> None:
        m = _SPAN.match(text)
        if not m:
            raise self.error("expected: span NAME : SOURCE -> TARGET {", line)
        name, src_name, tgt_name = m.groups()
        field = self.need_field(line)
        self.claim(name, line)
        source = self.lookup_scheme(src_name, line)
        target = self.lookup_scheme(tgt_name, line)
        pieces = []
        while True:
            item = self.next_line()
            if item is None:
                raise self.error("unterminated span block", line)
            inner_line, inner = item
            if inner == "}":
                break
            if inner == "piece {":
                pieces.append(self.parse_piece(inner_line, field, source, target))
            else:
                raise self.error("expected: piece {, or: }", inner_line)
        corr = Correspondence(source, target, tuple(pieces))
        try:
            validate_correspondence(corr)
        except SpanError as err:
            raise self.error(f"span {name!r}: {err}", line) from err
        self.span_decls.append(SpanDecl(name, src_name, tgt_name, line))
        self.spans[name] = corr

    def parse_piece(self, opened: int, field, source, target):
        names: tuple[str, ...] = ()
        rels_text: tuple[tuple[int, str], ...] = ()
        src_text: tuple[tuple[int, str, str], ...] = ()
        tgt_text: tuple[tuple[int, str, str], ...] = ()
        seen: set[str] = set()
        while True:
            item = self.next_line()
            if item is None:
                raise self.error("unterminated piece block", opened)
            line, text = item
            if text == "}":
                break
            keyword, _, rest = text.partition(" ")
            if keyword in seen:
                raise self.error(f"duplicate {keyword!r} line in piece", line)
            seen.add(keyword)
            if keyword == "vars":
                names = tuple(_split_list(rest))
                for v in names:
                    if not _IDENT.match(v):
                        raise self.error(f"bad variable name {v!r}", line)
                if len(set(names)) != len(names):
                    raise self.error("repeated variable name", line)
            elif keyword == "rels":
                rels_text = tuple((line, part) for part in _split_list(rest))
            elif keyword in ("source", "target"):
                entries = []
                for part in _split_list(rest):
                    key, colon, value = part.partition(":")
                    key, value = key.strip(), value.strip()
                    if not colon or not _IDENT.match(key) or not value:
                        raise self.error(
                            f"expected COORD: POLY entries, got {part!r}", line
                        )
                    entries.append((line, key, value))
                if keyword == "source":
                    src_text = tuple(entries)
                else:
                    tgt_text = tuple(entries)
            else:
                raise self.error(
                    f"unrecognized piece line {keyword!r} "
                    "(expected vars, rels, source, or target)",
                    line,
                )
        inverted = frozenset(
            v for v in names if companion_name(v) in names and not v.endswith("_inv")
        )
        try:
            ring = PolynomialRing(field, names, inverted)
        except ValueError as err:
            raise self.error(str(err), opened) from err
        relations = [self.poly(text, ring, line) for line, text in rels_text]
        src = {key: self.poly(text, ring, line) for line, key, text in src_text}
        tgt = {key: self.poly(text, ring, line) for line, key, text in tgt_text}
        try:
            return make_piece(ring, relations, src, tgt, source, target)
        except (SpanError, KeyError) as err:
            raise self.error(f"piece maps do not match the feet: {err}", opened)

    def poly(self, text: str, ring: PolynomialRing, line: int):
        try:
            return parse_polynomial(text, ring)
        except ParseError as err:
            raise self.error(f"bad polynomial {text!r}: {err.message}", line) from err

    def parse_check(self, line: int, text: str) -> None:
        m = _CHECK.match(text)
        if not m:
            raise self.error("expected: check NAME = COMMAND ...", line)
        name, rest = m.group(1), m.group(2)
        self.claim(name, line)
        words = rest.split()
        if not words:
            raise self.error("missing command", line)
        command = words[0]
        if command not in COMMANDS:
            raise self.error(f"unknown command {command!r}", line)
        count, required, optional = COMMANDS[command]
        tail = rest[len(command):].strip()
        first_key = _KEYED.search(" " + tail)
        if first_key:
            head = (" " + tail)[: first_key.start()].strip()
            keyed = (" " + tail)[first_key.start():].strip()
        else:
            head, keyed = tail, ""
        operands = tuple(head.split())
        if len(operands) != count:
            raise self.error(
                f"{command} takes {count} span operand(s), got {len(operands)}", line
            )
        for op in operands:
            self.lookup_span(op, line)
        args = []
        while keyed:
            key, _, after = keyed.partition(":")
            key = key.strip()
            nxt = _KEYED.search(" " + after)
            if nxt:
                value = (" " + after)[: nxt.start()].strip()
                keyed = (" " + after)[nxt.start():].strip()
            else:
                value, keyed = after.strip(), ""
            if key not in required and key not in optional:
                raise self.error(f"{command} does not take argument {key!r}", line)
            if any(k == key for k, _ in args):
                raise self.error(f"duplicate argument {key!r}", line)
            if not value:
                raise self.error(f"missing value for argument {key!r}", line)
            args.append((key, value))
        given = {k for k, _ in args}
        for key in required:
            if key not in given:
                raise self.error(f"{command} needs argument {key!r}", line)
        ordered = tuple(
            (key, dict(args)[key]) for key in required + optional if key in given
        )
        check = CheckRequest(name, command, operands, ordered, line)
        self.checks.append(self.normalize(check, line))

    def normalize(self, check: CheckRequest, line: int) -> CheckRequest:
        """Canonicalize argument values (integers, signs, polynomials)."""
        ring = None
        if check.operands and check.command in ("bound", "slice"):
            corr = self.spans[check.operands[0]]
            if len(corr.pieces) == 1:
                ring = corr.pieces[0].ring
        args = []
        for key, value in check.args:
            if key in INT_KEYS:
                if not re.fullmatch(r"-?\d+", value):
                    raise self.error(f"argument {key!r} must be an integer", line)
                args.append((key, str(int(value))))
            elif key in SIGN_KEYS:
                if value not in ("+", "-"):
                    raise self.error(f"argument {key!r} must be + or -", line)
                args.append((key, value))
            elif key in POLY_KEYS and ring is not None:
                args.append((key, format_polynomial(self.poly(value, ring, line))))
            else:
                args.append((key, value))
        return CheckRequest(check.name, check.command, check.operands, tuple(args), line)


def parse_workspace(text: str) -> WorkspaceDocument:
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# canonical printing


def _scheme_text(decl: SchemeDecl) -> str:
    if decl.args:
        return f"{decl.kind} {' '.join(decl.args)}"
    return decl.kind


def print_workspace(doc: WorkspaceDocument) -> str:
    lines = []
    if doc.name:
        lines.append(f"workspace {doc.name}")
    lines.append(f"field {doc.field_text}")
    for decl in doc.scheme_decls:
        lines.append(f"scheme {decl.name} = {_scheme_text(decl)}")
    for decl in doc.span_decls:
        corr = doc.spans[decl.name]
        lines.append(f"span {decl.name} : {decl.source} -> {decl.target} {{")
        for piece in corr.pieces:
            lines.append("  piece {")
            if piece.ring.names:
                lines.append("    vars " + ", ".join(piece.ring.names))
            if piece.relations:
                lines.append(
                    "    rels " + ", ".join(format_polynomial(r) for r in piece.relations)
                )
            if piece.src_map:
                lines.append(
                    "    source "
                    + ", ".join(f"{k}: {format_polynomial(v)}" for k, v in piece.src_map)
                )
            if piece.tgt_map:
                lines.append(
                    "    target "
                    + ", ".join(f"{k}: {format_polynomial(v)}" for k, v in piece.tgt_map)
                )
            lines.append("  }")
        lines.append("}")
    for check in doc.checks:
        parts = [check.command, *check.operands]
        parts += [f"{key}: {value}" for key, value in check.args]
        lines.append(f"check {check.name} = " + " ".join(parts))
    return "\n".join(lines) + "\n"
