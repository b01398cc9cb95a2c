"""Concrete syntax fragments with typed holes, parsed by black-box parsers.

A fragment like ``{name: <JSON v>}`` is split into text chunks and typed
holes, each hole is lowered to a placeholder string the object-language
parser accepts, the flattened text is parsed by the registered parser, and
the placeholder images in the resulting tree are lifted back into pattern
variables. The parser is reached only through its text-in/tree-out surface,
in process or over a line-delimited subprocess protocol.
"""

from __future__ import annotations

import json
import os
import re
import subprocess
import threading
from dataclasses import dataclass
from typing import Callable

from .patterns import (
    Pattern,
    PCon,
    PList,
    PLit,
    PSeqVar,
    PSeqWild,
    PVar,
    PWild,
)
from .terms import (
    Con,
    ListTerm,
    Signature,
    Term,
    TermDecodeError,
    adt,
    check_term,
    parse_signature,
    term_equals,
    term_from_wire,
)


class PipelineError(Exception):
    pass


class UnterminatedHole(PipelineError):
    pass


class EmptyHoleType(PipelineError):
    pass


class MalformedHole(PipelineError):
    pass


class HoleNameConflict(PipelineError):
    pass


class NoParserRegistered(PipelineError):
    pass


class NoHoleEncoder(PipelineError):
    pass


class EncoderImageUnparseable(PipelineError):
    pass


class DuplicateHoleImage(PipelineError):
    pass


class HoleNotFound(PipelineError):
    def __init__(self, index: int):
        super().__init__(f"the parser swallowed or rewrote the placeholder for hole {index}")
        self.index = index


class HoleCaptured(PipelineError):
    def __init__(self, index: int, count: int):
        super().__init__(
            f"placeholder image for hole {index} occurs {count} times; "
            "literal text in the fragment collides with a hole encoding"
        )
        self.index = index
        self.count = count


class StarHoleNotInList(PipelineError):
    def __init__(self, index: int):
        super().__init__(f"sequence hole {index} landed outside a list context")
        self.index = index


class HolesNotAllowed(PipelineError):
    pass


class ParserError(PipelineError):
    """A syntax error reported by an object-language parser."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class ChildSpawnError(PipelineError):
    pass


class ProtocolError(PipelineError):
    pass


class ChildReportedSyntaxError(ParserError):
    pass


class IllTypedParserOutput(PipelineError):
    pass


class RegistryConfigError(PipelineError):
    pass


# ---------------------------------------------------------------------------
# Fragment splitting


@dataclass(frozen=True)
class TextChunk:
    text: str


@dataclass(frozen=True)
class Hole:
    index: int
    name: str  # "_" is anonymous
    type: str  # nonterminal name; for star holes this is the element type
    star: bool


@dataclass(frozen=True)
class ConcretePattern:
    """A split fragment: the target nonterminal plus interleaved chunks and holes."""

    nonterminal: str
    parts: tuple

    def holes(self) -> list:
        return [p for p in self.parts if isinstance(p, Hole)]


_HOLE_BODY = re.compile(
    r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:(\*)\s*|\s+)([A-Za-z_][A-Za-z0-9_]*)\s*$"
)


def split_fragment(nonterminal: str, text: str) -> ConcretePattern:
    """Split fragment text on `<Type name>` / `<Type* name>` holes.

    `\\<` escapes a literal `<`; `_` is the anonymous hole name. Hole indices
    run left to right from 0.
    """
    parts: list = []
    buf: list = []
    names: dict = {}
    index = 0
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text) and text[i + 1] == "<":
            buf.append("<")
            i += 2
            continue
        if ch != "<":
            buf.append(ch)
            i += 1
            continue
        end = text.find(">", i + 1)
        if end < 0:
            raise UnterminatedHole(f"hole opened at offset {i} has no closing '>'")
        body = text[i + 1:end]
        if not body.strip():
            raise EmptyHoleType(f"hole at offset {i} has no type")
        m = _HOLE_BODY.match(body)
        if m is None:
            if re.fullmatch(r"\s*\**\s*[A-Za-z_][A-Za-z0-9_]*\s*\**\s*", body):
                raise MalformedHole(f"hole <{body}> must be written <Type name> or <Type* name>")
            raise MalformedHole(f"hole <{body}> is not of the form <Type name>")
        hole_type, star, name = m.group(1), m.group(2) is not None, m.group(3)
        if name != "_":
            prior = names.setdefault(name, (hole_type, star))
            if prior != (hole_type, star):
                raise HoleNameConflict(f"hole name {name!r} reused with a different type")
        if buf:
            parts.append(TextChunk("".join(buf)))
            buf = []
        parts.append(Hole(index, name, hole_type, star))
        index += 1
        i = end + 1
    if buf:
        parts.append(TextChunk("".join(buf)))
    return ConcretePattern(nonterminal, tuple(parts))


# ---------------------------------------------------------------------------
# Parser registry


@dataclass
class RegistryEntry:
    parse: Callable
    hole: Callable | None = None
    signature: Signature | None = None


class ParserRegistry:
    """Per-nonterminal parse functions and hole encoders.

    Entries are in-process callables or subprocess adapters; the registry is
    meant to be fully populated before use and not mutated afterwards.
    """

    def __init__(self):
        self._entries: dict = {}
        self._adapters: list = []

    def register(self, nonterminal: str, parse: Callable, hole: Callable | None = None,
                 signature: Signature | None = None) -> None:
        # A hole encoder only makes sense alongside a parser for the same
        # nonterminal; taking both in one call keeps that invariant structural.
        if parse is None:
            raise RegistryConfigError(f"a hole encoder for {nonterminal} requires a parser too")
        self._entries[nonterminal] = RegistryEntry(parse, hole, signature)

    def has(self, nonterminal: str) -> bool:
        return nonterminal in self._entries

    def nonterminals(self) -> list:
        return sorted(self._entries)

    def parse(self, nonterminal: str, text: str) -> Term:
        entry = self._entries.get(nonterminal)
        if entry is None:
            raise NoParserRegistered(f"no parser registered for nonterminal {nonterminal}")
        return entry.parse(text)

    def hole_text(self, nonterminal: str, index: int) -> str:
        entry = self._entries.get(nonterminal)
        if entry is None or entry.hole is None:
            raise NoHoleEncoder(f"no hole encoder registered for nonterminal {nonterminal}")
        return entry.hole(index)

    def signature_for(self, nonterminal: str) -> Signature | None:
        entry = self._entries.get(nonterminal)
        return entry.signature if entry else None

    def track_adapter(self, adapter: "SubprocessParser") -> None:
        self._adapters.append(adapter)

    def close(self) -> None:
        for a in self._adapters:
            a.close()
        self._adapters.clear()

    def __enter__(self) -> "ParserRegistry":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


# ---------------------------------------------------------------------------
# Lowering and lifting


@dataclass(frozen=True)
class HoleEntry:
    index: int
    name: str
    type: str
    star: bool
    encoded: str
    image: Term


def lower(cp: ConcretePattern, reg: ParserRegistry):
    """Replace holes with placeholder text; record each placeholder's parsed image.

    Returns (flattened text, hole table). Images are computed now so a broken
    encoder fails here rather than deep inside a later parse.
    """
    out: list = []
    table: list = []
    for part in cp.parts:
        if isinstance(part, TextChunk):
            out.append(part.text)
            continue
        encoded = reg.hole_text(part.type, part.index)
        try:
            image = reg.parse(part.type, encoded)
        except PipelineError as e:
            raise EncoderImageUnparseable(
                f"hole encoder for {part.type} produced unparseable text {encoded!r}: {e}"
            ) from None
        table.append(HoleEntry(part.index, part.name, part.type, part.star, encoded, image))
        out.append(encoded)
    for i, a in enumerate(table):
        for b in table[i + 1:]:
            if term_equals(a.image, b.image):
                raise DuplicateHoleImage(
                    f"holes {a.index} and {b.index} encode to the same parsed image"
                )
    return "".join(out), table


def lift(t: Term, table: list, *, lenient: bool = False) -> Pattern:
    """Replace each placeholder image in t with its hole's pattern variable.

    Every image must occur exactly once. Zero occurrences raise HoleNotFound.
    More than one raises HoleCaptured unless lenient, in which case every
    occurrence becomes the same variable and matching degrades to a non-linear
    match on the colliding positions.
    """
    counts = {entry.index: 0 for entry in table}

    def replace(entry: HoleEntry, in_list: bool) -> Pattern:
        if entry.star:
            if not in_list:
                raise StarHoleNotInList(entry.index)
            if entry.name == "_":
                return PSeqWild(adt(entry.type))
            return PSeqVar(entry.name, adt(entry.type))
        if entry.name == "_":
            return PWild(adt(entry.type))
        return PVar(entry.name, adt(entry.type))

    def go(node: Term, in_list: bool):
        for entry in table:
            if term_equals(entry.image, node):
                counts[entry.index] += 1
                return replace(entry, in_list), True
        if isinstance(node, Con):
            lifted = [go(a, False) for a in node.args]
            if any(h for _, h in lifted):
                return PCon(node.name, node.type, tuple(p for p, _ in lifted)), True
            return PLit(node), False
        if isinstance(node, ListTerm):
            lifted = [go(e, True) for e in node.elems]
            if any(h for _, h in lifted):
                return PList(tuple(p for p, _ in lifted), node.elem_type), True
            return PLit(node), False
        return PLit(node), False

    pattern, _ = go(t, False)
    for entry in table:
        n = counts[entry.index]
        if n == 0:
            raise HoleNotFound(entry.index)
        if n > 1 and not lenient:
            raise HoleCaptured(entry.index, n)
    return pattern


def to_pattern(nonterminal: str, text: str, reg: ParserRegistry, *, lenient: bool = False) -> Pattern:
    """The whole pipeline: split, lower, parse the flattened text, lift."""
    cp = split_fragment(nonterminal, text)
    flattened, table = lower(cp, reg)
    t = reg.parse(nonterminal, flattened)
    return lift(t, table, lenient=lenient)


def parse_term(nonterminal: str, text: str, reg: ParserRegistry) -> Term:
    """Parse a hole-free fragment to a term. `\\<` still escapes a literal `<`."""
    cp = split_fragment(nonterminal, text)
    if cp.holes():
        raise HolesNotAllowed(f"fragment contains {len(cp.holes())} hole(s)")
    flattened = "".join(part.text for part in cp.parts)
    return reg.parse(nonterminal, flattened)


# ---------------------------------------------------------------------------
# Subprocess parser protocol
#
#   request:  {"nonterminal": string, "text": string}\n
#   response: {"ok": true, "term": <wire term>}
#           | {"ok": false, "line": int, "col": int, "message": string}


class SubprocessParser:
    """One black-box parser process, spoken to over stdin/stdout, one line each way.

    Exchanges are serialized under a lock, so one adapter can back several
    registry entries and be used from several threads.
    """

    def __init__(self, command):
        self.command = list(command)
        self._proc = None
        self._lock = threading.Lock()

    def _ensure(self):
        if self._proc is not None and self._proc.poll() is None:
            return self._proc
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as e:
            raise ChildSpawnError(f"cannot start {self.command}: {e}") from None
        return self._proc

    def parse(self, nonterminal: str, text: str) -> Term:
        with self._lock:
            proc = self._ensure()
            request = json.dumps({"nonterminal": nonterminal, "text": text})
            try:
                proc.stdin.write(request + "\n")
                proc.stdin.flush()
                line = proc.stdout.readline()
            except (BrokenPipeError, OSError) as e:
                raise ProtocolError(f"lost connection to {self.command}: {e}") from None
            if not line:
                code = proc.poll()
                raise ProtocolError(
                    f"parser process {self.command} closed its stream (exit code {code}) before replying"
                )
        try:
            response = json.loads(line)
        except json.JSONDecodeError as e:
            raise ProtocolError(f"malformed response line from {self.command}: {e}") from None
        if not isinstance(response, dict) or "ok" not in response:
            raise ProtocolError(f"response from {self.command} lacks an ok field")
        if response["ok"] is True:
            if "term" not in response:
                raise ProtocolError(f"ok response from {self.command} lacks a term")
            try:
                return term_from_wire(response["term"])
            except TermDecodeError as e:
                raise ProtocolError(f"undecodable term from {self.command}: {e}") from None
        try:
            return_line = int(response.get("line", 0))
            return_col = int(response.get("col", 0))
            message = str(response["message"])
        except (KeyError, TypeError, ValueError):
            raise ProtocolError(f"malformed error response from {self.command}") from None
        raise ChildReportedSyntaxError(message, return_line, return_col)

    def close(self) -> None:
        proc, self._proc = self._proc, None
        if proc is None:
            return
        try:
            proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()

    def __enter__(self) -> "SubprocessParser":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _project(t: Term, path, nonterminal: str) -> Term:
    for idx in path:
        if isinstance(t, Con) and idx < len(t.args):
            t = t.args[idx]
        elif isinstance(t, ListTerm) and idx < len(t.elems):
            t = t.elems[idx]
        else:
            raise ParserError(
                f"context projection {list(path)} for {nonterminal} fell off the tree", 0, 0
            )
    return t


def make_parse_fn(base: Callable, nonterminal: str, *, signature: Signature | None = None,
                  wrap: str | None = None, project=(), check: bool = False) -> Callable:
    """Wrap a raw text->Term function with context wrapping, projection, and checking.

    `wrap` embeds the fragment into a complete unit via `{body}` substitution;
    `project` strips the context image back off by child indices.
    """

    def parse(text: str) -> Term:
        if wrap is not None:
            text = wrap.replace("{body}", text)
        t = base(text)
        if project:
            t = _project(t, project, nonterminal)
        if check and signature is not None:
            issues = check_term(signature, t, adt(nonterminal))
            if issues:
                raise IllTypedParserOutput(
                    f"parser output for {nonterminal} is ill-typed: {issues[0]}"
                )
        return t

    return parse


# ---------------------------------------------------------------------------
# Registry configuration documents
#
# {
#   "nonterminals": {
#     "JSON": {"builtin": "json"},
#     "Stm":  {"command": ["csbb-exprlang"], "signature": "exprlang.sig",
#               "hole": "_hole_{id};"},
#     "Prop2": {"builtin": "json", "via": "JSON", "wrap": "{{body}}",
#               "project": [0, 0], "hole": "_hole:{id}"}
#   }
# }
#
# Hole templates substitute the literal text {id}; wrap templates substitute
# {body}. "via" names the nonterminal used to parse the wrapped text (default:
# the entry's own). Relative signature paths resolve against the config file.


def hole_encoder_from_template(template: str) -> Callable:
    return lambda index: template.replace("{id}", str(index))


def load_registry_config(path: str) -> ParserRegistry:
    from . import jsonlang  # deferred: jsonlang imports this module's error types

    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as e:
        raise RegistryConfigError(f"cannot read registry config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise RegistryConfigError(f"registry config {path} is not valid JSON: {e}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("nonterminals"), dict):
        raise RegistryConfigError(f"registry config {path} lacks a nonterminals section")

    base_dir = os.path.dirname(os.path.abspath(path))
    reg = ParserRegistry()
    adapters: dict = {}
    signatures: dict = {}

    def load_signature(rel: str) -> Signature:
        sig_path = rel if os.path.isabs(rel) else os.path.join(base_dir, rel)
        if sig_path not in signatures:
            try:
                with open(sig_path, encoding="utf-8") as f:
                    signatures[sig_path] = parse_signature(f.read())
            except OSError as e:
                raise RegistryConfigError(f"cannot read signature file {sig_path}: {e}") from None
        return signatures[sig_path]

    builtins = {
        "json": {
            "JSON": (jsonlang.parse_json, jsonlang.json_hole, jsonlang.JSON_SIGNATURE),
            "Prop": (jsonlang.parse_prop, jsonlang.prop_hole, jsonlang.JSON_SIGNATURE),
        }
    }

    for nonterminal, spec in doc["nonterminals"].items():
        if not isinstance(spec, dict):
            raise RegistryConfigError(f"entry for {nonterminal} must be an object")
        wrap = spec.get("wrap")
        project = tuple(spec.get("project", ()))
        via = spec.get("via", nonterminal)
        hole_template = spec.get("hole")

        if "builtin" in spec:
            table = builtins.get(spec["builtin"])
            if table is None:
                raise RegistryConfigError(f"unknown builtin {spec['builtin']!r}")
            served = table.get(via)
            if served is None:
                raise RegistryConfigError(
                    f"builtin {spec['builtin']!r} does not serve nonterminal {via}"
                )
            base, _, signature = served
            if not signature.has_type(nonterminal):
                raise RegistryConfigError(
                    f"nonterminal {nonterminal} is not a type of builtin {spec['builtin']!r}"
                )
            default_hole = table[nonterminal][1] if nonterminal in table else None
            hole = hole_encoder_from_template(hole_template) if hole_template else default_hole
            needs_check = via != nonterminal or bool(project)
            parse = make_parse_fn(
                base, nonterminal, signature=signature, wrap=wrap, project=project,
                check=needs_check,
            )
            reg.register(nonterminal, parse, hole=hole, signature=signature)
        elif "command" in spec:
            command = spec["command"]
            if not isinstance(command, list) or not command:
                raise RegistryConfigError(f"entry for {nonterminal} has a malformed command")
            if "signature" not in spec:
                raise RegistryConfigError(f"entry for {nonterminal} needs a signature file")
            signature = load_signature(spec["signature"])
            if not signature.has_type(nonterminal):
                raise RegistryConfigError(
                    f"signature for {nonterminal} does not declare that type"
                )
            key = tuple(command)
            if key not in adapters:
                adapters[key] = SubprocessParser(command)
                reg.track_adapter(adapters[key])
            adapter = adapters[key]
            base = (lambda a, v: lambda text: a.parse(v, text))(adapter, via)
            parse = make_parse_fn(
                base, nonterminal, signature=signature, wrap=wrap, project=project, check=True,
            )
            hole = hole_encoder_from_template(hole_template) if hole_template else None
            reg.register(nonterminal, parse, hole=hole, signature=signature)
        else:
            raise RegistryConfigError(
                f"entry for {nonterminal} must name either a builtin or a command"
            )
    return reg


def default_registry() -> ParserRegistry:
    """The registry used when no config is given: just the builtin JSON binding."""
    from . import jsonlang  # deferred, as in load_registry_config

    reg = ParserRegistry()
    jsonlang.register_json(reg)
    return reg
