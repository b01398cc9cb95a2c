"""Signatures, generic immutable terms, type checking, and the wire codec.

A Signature declares abstract-grammar types and their constructors. Terms are
constructor applications, primitives, and typed lists; they are frozen values
safe to share between threads. The wire codec is the canonical JSON encoding
used by the subprocess parser protocol and the CLI.
"""

from __future__ import annotations

import json
import math
import re
import struct
from dataclasses import dataclass

PRIM_KINDS = ("int", "real", "bool", "str")

MAYBE_TYPE = "Maybe"


class SignatureError(Exception):
    """An internally inconsistent signature."""


class SignatureSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class TermDecodeError(Exception):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        if line is not None:
            super().__init__(f"line {line}, col {col}: {message}")
        else:
            super().__init__(message)
        self.message = message
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Argument types


@dataclass(frozen=True)
class ArgType:
    """The type of a constructor argument.

    kind is one of "adt" (name set), "prim" (name set to int/real/bool/str),
    "list" (elem set), or "maybe" (elem set). A maybe may not directly wrap
    another maybe.
    """

    kind: str
    name: str | None = None
    elem: "ArgType | None" = None

    def __post_init__(self):
        if self.kind == "adt":
            if not self.name or self.elem is not None:
                raise ValueError("adt type needs a name and no element")
        elif self.kind == "prim":
            if self.name not in PRIM_KINDS or self.elem is not None:
                raise ValueError(f"unknown primitive kind {self.name!r}")
        elif self.kind in ("list", "maybe"):
            if self.elem is None or self.name is not None:
                raise ValueError(f"{self.kind} type needs an element type")
            if self.kind == "maybe" and self.elem.kind == "maybe":
                raise ValueError("maybe may not directly nest maybe")
        else:
            raise ValueError(f"unknown ArgType kind {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == "adt" or self.kind == "prim":
            return self.name  # type: ignore[return-value]
        if self.kind == "list":
            return f"list[{self.elem}]"
        return f"Maybe[{self.elem}]"


def adt(name: str) -> ArgType:
    return ArgType("adt", name=name)


def prim(name: str) -> ArgType:
    return ArgType("prim", name=name)


def list_of(elem: ArgType) -> ArgType:
    return ArgType("list", elem=elem)


def maybe_of(elem: ArgType) -> ArgType:
    return ArgType("maybe", elem=elem)


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Con:
    """A constructor application, e.g. Con("number", "JSON", (Prim("real", 29.0),))."""

    name: str
    type: str
    args: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Prim:
    """A primitive leaf. kind selects among int/real/bool/str."""

    kind: str
    value: int | float | bool | str

    def __post_init__(self):
        ok = (
            (self.kind == "int" and type(self.value) is int)
            or (self.kind == "real" and type(self.value) is float)
            or (self.kind == "bool" and type(self.value) is bool)
            or (self.kind == "str" and type(self.value) is str)
        )
        if not ok:
            raise ValueError(f"{self.kind} primitive cannot hold {self.value!r}")
        if self.kind == "real" and not math.isfinite(self.value):
            raise ValueError("real primitives must be finite")


@dataclass(frozen=True)
class ListTerm:
    """A homogeneous list; carries its element type so empty lists stay typable."""

    elems: tuple
    elem_type: ArgType

    def __post_init__(self):
        object.__setattr__(self, "elems", tuple(self.elems))


Term = Con | Prim | ListTerm


def nothing_() -> Con:
    return Con("nothing", MAYBE_TYPE, ())


def just_(t: Term) -> Con:
    return Con("just", MAYBE_TYPE, (t,))


def term_equals(a: Term, b: Term) -> bool:
    """Structural equality. Reals compare by the exact bit pattern of the float."""
    if isinstance(a, Con) and isinstance(b, Con):
        return (
            a.name == b.name
            and a.type == b.type
            and len(a.args) == len(b.args)
            and all(term_equals(x, y) for x, y in zip(a.args, b.args))
        )
    if isinstance(a, Prim) and isinstance(b, Prim):
        if a.kind != b.kind:
            return False
        if a.kind == "real":
            return struct.pack("<d", a.value) == struct.pack("<d", b.value)
        return a.value == b.value
    if isinstance(a, ListTerm) and isinstance(b, ListTerm):
        return (
            a.elem_type == b.elem_type
            and len(a.elems) == len(b.elems)
            and all(term_equals(x, y) for x, y in zip(a.elems, b.elems))
        )
    return False


def term_root_type(t: Term) -> ArgType:
    """The outermost type of a term, without consulting a signature."""
    if isinstance(t, Con):
        return adt(t.type)
    if isinstance(t, Prim):
        return prim(t.kind)
    return list_of(t.elem_type)


# ---------------------------------------------------------------------------
# Signatures


@dataclass(frozen=True)
class Constructor:
    name: str
    type: str
    args: tuple  # of (arg name, ArgType)

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class Signature:
    """A set of type names plus the constructors declared over them.

    Construction validates the whole declaration: owning types must be
    declared, constructor names must be unique within their type, and every
    adt reference must resolve.
    """

    types: frozenset
    constructors: tuple

    def __post_init__(self):
        object.__setattr__(self, "types", frozenset(self.types))
        object.__setattr__(self, "constructors", tuple(self.constructors))
        seen = set()
        for c in self.constructors:
            if c.type not in self.types:
                raise SignatureError(f"constructor {c.name} owned by undeclared type {c.type}")
            if (c.type, c.name) in seen:
                raise SignatureError(f"duplicate constructor {c.name} in type {c.type}")
            seen.add((c.type, c.name))
            for arg_name, arg_type in c.args:
                self._check_ref(arg_type, f"{c.type}.{c.name}.{arg_name}")

    def _check_ref(self, at: ArgType, where: str) -> None:
        if at.kind == "adt":
            if at.name not in self.types:
                raise SignatureError(f"{where} refers to undeclared type {at.name}")
        elif at.kind in ("list", "maybe"):
            self._check_ref(at.elem, where)

    def has_type(self, name: str) -> bool:
        return name in self.types

    def find(self, type_name: str, con_name: str, arity: int):
        for c in self.constructors:
            if c.type == type_name and c.name == con_name and c.arity == arity:
                return c
        return None

    def constructors_of(self, type_name: str) -> list:
        return [c for c in self.constructors if c.type == type_name]


# ---------------------------------------------------------------------------
# Type checking


@dataclass(frozen=True)
class TypeIssue:
    """One well-typedness violation, located by a path of child indices."""

    path: tuple
    message: str

    def __str__(self) -> str:
        loc = "/".join(str(i) for i in self.path) or "root"
        return f"at {loc}: {self.message}"


def _describe(t: Term) -> str:
    if isinstance(t, Con):
        return f"{t.type}.{t.name}/{len(t.args)}"
    if isinstance(t, Prim):
        return f"{t.kind} primitive"
    return f"list[{t.elem_type}]"


def check_term(sig: Signature, t: Term, expected: ArgType) -> list:
    """Check t against expected; returns a list of TypeIssue (empty = well-typed)."""
    issues: list = []

    def go(node: Term, at: ArgType, path: tuple) -> None:
        if at.kind == "prim":
            if not (isinstance(node, Prim) and node.kind == at.name):
                issues.append(TypeIssue(path, f"expected {at}, got {_describe(node)}"))
        elif at.kind == "adt":
            if not (isinstance(node, Con) and node.type == at.name):
                issues.append(TypeIssue(path, f"expected {at}, got {_describe(node)}"))
                return
            con = sig.find(node.type, node.name, len(node.args))
            if con is None:
                issues.append(
                    TypeIssue(path, f"{at.name} declares no constructor {node.name}/{len(node.args)}")
                )
                return
            for i, ((_, arg_type), sub) in enumerate(zip(con.args, node.args)):
                go(sub, arg_type, path + (i,))
        elif at.kind == "list":
            if not isinstance(node, ListTerm):
                issues.append(TypeIssue(path, f"expected {at}, got {_describe(node)}"))
                return
            if node.elem_type != at.elem:
                issues.append(
                    TypeIssue(path, f"list element type {node.elem_type} does not match {at.elem}")
                )
                return
            for i, e in enumerate(node.elems):
                go(e, at.elem, path + (i,))
        else:  # maybe
            if isinstance(node, Con) and node.type == MAYBE_TYPE:
                if node.name == "nothing" and not node.args:
                    return
                if node.name == "just" and len(node.args) == 1:
                    go(node.args[0], at.elem, path + (0,))
                    return
            issues.append(TypeIssue(path, f"expected {at}, got {_describe(node)}"))

    go(t, expected, ())
    return issues


# ---------------------------------------------------------------------------
# Wire codec
#
#   term    := {"con": s, "type": s, "args": [term*]}
#            | {"int": n} | {"real": x} | {"bool": b} | {"str": s}
#            | {"list": [term*], "elem": argtype}
#   argtype := {"adt": s} | {"list": argtype} | {"maybe": argtype} | {"prim": s}


def format_real(x: float) -> str:
    """Canonical decimal rendering; always carries a fraction or an exponent."""
    s = repr(x)
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def encode_term(t: Term) -> str:
    """Deterministic canonical encoding: fixed key order, canonical numbers."""
    out: list = []
    _enc(t, out)
    return "".join(out)


def _enc(t: Term, out: list) -> None:
    if isinstance(t, Con):
        out.append('{"con":' + json.dumps(t.name) + ',"type":' + json.dumps(t.type) + ',"args":[')
        for i, a in enumerate(t.args):
            if i:
                out.append(",")
            _enc(a, out)
        out.append("]}")
    elif isinstance(t, Prim):
        if t.kind == "int":
            out.append('{"int":%d}' % t.value)
        elif t.kind == "real":
            out.append('{"real":' + format_real(t.value) + "}")
        elif t.kind == "bool":
            out.append('{"bool":true}' if t.value else '{"bool":false}')
        else:
            out.append('{"str":' + json.dumps(t.value, ensure_ascii=False) + "}")
    else:
        out.append('{"list":[')
        for i, e in enumerate(t.elems):
            if i:
                out.append(",")
            _enc(e, out)
        out.append('],"elem":' + encode_argtype(t.elem_type) + "}")


def encode_argtype(at: ArgType) -> str:
    if at.kind == "adt":
        return '{"adt":' + json.dumps(at.name) + "}"
    if at.kind == "prim":
        return '{"prim":' + json.dumps(at.name) + "}"
    if at.kind == "list":
        return '{"list":' + encode_argtype(at.elem) + "}"
    return '{"maybe":' + encode_argtype(at.elem) + "}"


def decode_term(text: str) -> Term:
    """Inverse of encode_term; accepts any wire-grammar conforming JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise TermDecodeError(e.msg, e.lineno, e.colno) from None
    return term_from_wire(data)


def term_from_wire(obj, path: str = "$") -> Term:
    """Build a Term from already-parsed wire JSON."""
    if not isinstance(obj, dict):
        raise TermDecodeError(f"{path}: expected an object, got {type(obj).__name__}")
    keys = set(obj)
    if keys == {"con", "type", "args"}:
        if not isinstance(obj["con"], str) or not isinstance(obj["type"], str):
            raise TermDecodeError(f"{path}: con and type must be strings")
        if not isinstance(obj["args"], list):
            raise TermDecodeError(f"{path}: args must be an array")
        args = tuple(term_from_wire(a, f"{path}.args[{i}]") for i, a in enumerate(obj["args"]))
        return Con(obj["con"], obj["type"], args)
    if keys == {"int"}:
        if type(obj["int"]) is not int:
            raise TermDecodeError(f"{path}: int payload must be an integer")
        return Prim("int", obj["int"])
    if keys == {"real"}:
        v = obj["real"]
        if type(v) not in (int, float):
            raise TermDecodeError(f"{path}: real payload must be a number")
        try:
            return Prim("real", float(v))
        except ValueError as e:
            raise TermDecodeError(f"{path}: {e}") from None
    if keys == {"bool"}:
        if type(obj["bool"]) is not bool:
            raise TermDecodeError(f"{path}: bool payload must be true or false")
        return Prim("bool", obj["bool"])
    if keys == {"str"}:
        if not isinstance(obj["str"], str):
            raise TermDecodeError(f"{path}: str payload must be a string")
        return Prim("str", obj["str"])
    if keys == {"list", "elem"}:
        if not isinstance(obj["list"], list):
            raise TermDecodeError(f"{path}: list payload must be an array")
        elem = argtype_from_wire(obj["elem"], f"{path}.elem")
        elems = tuple(term_from_wire(e, f"{path}.list[{i}]") for i, e in enumerate(obj["list"]))
        return ListTerm(elems, elem)
    raise TermDecodeError(f"{path}: unrecognized term object with keys {sorted(keys)}")


def argtype_from_wire(obj, path: str = "$") -> ArgType:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise TermDecodeError(f"{path}: expected a single-key argtype object")
    ((key, val),) = obj.items()
    try:
        if key == "adt":
            return adt(val)
        if key == "prim":
            return prim(val)
        if key == "list":
            return list_of(argtype_from_wire(val, f"{path}.list"))
        if key == "maybe":
            return maybe_of(argtype_from_wire(val, f"{path}.maybe"))
    except (ValueError, TypeError) as e:
        raise TermDecodeError(f"{path}: {e}") from None
    raise TermDecodeError(f"{path}: unrecognized argtype key {key!r}")


# ---------------------------------------------------------------------------
# Signature surface syntax
#
#   data JSON = boolean(bool b) | number(real n) | null() | object(list[Prop] props);
#
# An optional leading `module a::b` line is skipped, so generated module files
# load directly as signature files. `#` starts a line comment.

_SIG_TOKEN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|[=|(),;\[\]]|::|\S")


class _SigTokens:
    def __init__(self, text: str):
        self.text = text
        self.toks: list = []  # (value, line, col)
        line, col = 1, 1
        i = 0
        while i < len(text):
            ch = text[i]
            if ch == "\n":
                line += 1
                col = 1
                i += 1
                continue
            if ch in " \t\r":
                i += 1
                col += 1
                continue
            if ch == "#":
                while i < len(text) and text[i] != "\n":
                    i += 1
                continue
            m = _SIG_TOKEN.match(text, i)
            tok = m.group()
            self.toks.append((tok, line, col))
            i += len(tok)
            col += len(tok)
        self.pos = 0

    def peek(self) -> str | None:
        return self.toks[self.pos][0] if self.pos < len(self.toks) else None

    def next(self, expected: str | None = None) -> str:
        if self.pos >= len(self.toks):
            last = self.toks[-1] if self.toks else ("", 1, 1)
            raise SignatureSyntaxError(
                f"unexpected end of input, expected {expected or 'a token'}", last[1], last[2]
            )
        tok, line, col = self.toks[self.pos]
        if expected is not None and tok != expected:
            raise SignatureSyntaxError(f"expected {expected!r}, got {tok!r}", line, col)
        self.pos += 1
        return tok

    def error(self, message: str):
        if self.pos < len(self.toks):
            _, line, col = self.toks[self.pos]
        else:
            line, col = 1, 1
        raise SignatureSyntaxError(message, line, col)


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def parse_signature(text: str) -> Signature:
    """Parse `data T = c(...) | ...;` declarations into a Signature."""
    toks = _SigTokens(text)
    if toks.peek() == "module":
        toks.next()
        toks.next()  # first name component
        while toks.peek() == "::":
            toks.next()
            toks.next()
    types: list = []
    cons: list = []
    while toks.peek() is not None:
        toks.next("data")
        type_name = toks.next()
        if not _IDENT.match(type_name):
            toks.error(f"bad type name {type_name!r}")
        types.append(type_name)
        toks.next("=")
        while True:
            cons.append(_parse_ctor(toks, type_name))
            if toks.peek() == "|":
                toks.next()
                continue
            break
        toks.next(";")
    try:
        return Signature(frozenset(types), tuple(cons))
    except SignatureError:
        raise


def _parse_ctor(toks: _SigTokens, type_name: str) -> Constructor:
    name = toks.next()
    if not _IDENT.match(name):
        toks.error(f"bad constructor name {name!r}")
    toks.next("(")
    args: list = []
    if toks.peek() != ")":
        while True:
            at = _parse_argtype(toks)
            arg_name = toks.next()
            if not _IDENT.match(arg_name):
                toks.error(f"bad argument name {arg_name!r}")
            args.append((arg_name, at))
            if toks.peek() == ",":
                toks.next()
                continue
            break
    toks.next(")")
    return Constructor(name, type_name, tuple(args))


def _parse_argtype(toks: _SigTokens) -> ArgType:
    tok = toks.next()
    if tok in PRIM_KINDS:
        return prim(tok)
    if tok == "list":
        toks.next("[")
        elem = _parse_argtype(toks)
        toks.next("]")
        return list_of(elem)
    if tok == MAYBE_TYPE and toks.peek() == "[":
        toks.next("[")
        elem = _parse_argtype(toks)
        toks.next("]")
        return maybe_of(elem)
    if not _IDENT.match(tok):
        toks.error(f"bad argument type {tok!r}")
    return adt(tok)


def render_signature(sig: Signature) -> str:
    """Render data declarations; types appear in first-constructor order."""
    order: list = []
    for c in sig.constructors:
        if c.type not in order:
            order.append(c.type)
    lines: list = []
    for type_name in order:
        lines.append(f"data {type_name}")
        for i, c in enumerate(sig.constructors_of(type_name)):
            args = ", ".join(f"{at} {name}" for name, at in c.args)
            lines.append(f"  {'=' if i == 0 else '|'} {c.name}({args})")
        lines.append("  ;")
        lines.append("")
    return "\n".join(lines)
