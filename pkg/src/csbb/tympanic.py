"""Mapping DSL: turn a foreign parser's class-hierarchy AST into a signature.

A mapping file declares, per concrete foreign class, guarded rules that send
the class's members to the arguments of an internal constructor. From one
mapping plus a declarative description of the foreign type hierarchy we infer
the algebraic signature (and its printable module), and marshal foreign AST
values into well-typed terms by interpreting the same rules.

Surface syntax of a mapping file (`#` starts a line comment):

    mapping ExprAst
    import expressions
    export expr::Expr
    types Expr => Expr
    constructors
    Binary
    - %getOp == Op.PLUS, getLhs, getRhs: add(lhs, rhs)
    Lit
    - (Integer)getValue: integer(intVal)

Fields may be guarded (`m == v`, `m != v`), optional (`m?`), cast
(`(T)m`, `(T[])m`), or skipped (`%` prefix: the field participates in
dispatch but produces no argument). Non-skipped fields map positionally to
the constructor arguments; an argument of the form `Op op = plus()` inlines
an enum, synthesizing a nullary-constructor ADT.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .terms import (
    ArgType,
    Con,
    Constructor,
    ListTerm,
    Prim,
    Signature,
    Term,
    adt,
    check_term,
    just_,
    list_of,
    maybe_of,
    nothing_,
    prim,
    render_signature,
)

PRIMITIVE_MAP = {"Integer": "int", "Boolean": "bool", "String": "str", "Double": "real"}


class TympanicSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class SchemaError(Exception):
    pass


class MappingError(Exception):
    pass


class UnknownForeignType(MappingError):
    pass


class UnmappedForeignType(MappingError):
    pass


class UnknownMember(MappingError):
    pass


class ArityMismatch(MappingError):
    pass


class MarshalError(Exception):
    def __init__(self, message: str, path: tuple):
        where = ".".join(str(p) for p in path) or "root"
        super().__init__(f"at {where}: {message}")
        self.path = path


class NoApplicableRule(MarshalError):
    pass


class NullNotOptional(MarshalError):
    pass


class CastFailure(MarshalError):
    pass


# ---------------------------------------------------------------------------
# Foreign schema


@dataclass(frozen=True)
class TypeRef:
    name: str


@dataclass(frozen=True)
class ArrayRef:
    elem: "Ref"


@dataclass(frozen=True)
class IterableRef:
    elem: "Ref"


Ref = TypeRef | ArrayRef | IterableRef


@dataclass(frozen=True)
class Member:
    name: str
    type: Ref


@dataclass(frozen=True)
class AbstractType:
    name: str
    supers: tuple = ()


@dataclass(frozen=True)
class ConcreteType:
    name: str
    supers: tuple = ()
    members: tuple = ()


@dataclass(frozen=True)
class EnumType:
    name: str
    constants: tuple = ()


@dataclass
class ForeignSchema:
    """The foreign parser's type hierarchy, declared rather than reflected."""

    types: dict = field(default_factory=dict)

    def validate(self) -> None:
        for t in self.types.values():
            if isinstance(t, EnumType):
                if len(set(t.constants)) != len(t.constants):
                    raise SchemaError(f"enum {t.name} repeats a constant")
                continue
            for sup in t.supers:
                parent = self.types.get(sup)
                if parent is None or not isinstance(parent, AbstractType):
                    raise SchemaError(f"{t.name} extends unknown or non-abstract type {sup}")
            if isinstance(t, ConcreteType):
                for m in t.members:
                    self._check_ref(m.type, f"{t.name}.{m.name}")
        # The subtype relation must be acyclic.
        state: dict = {}

        def visit(name: str) -> None:
            if state.get(name) == "done":
                return
            if state.get(name) == "busy":
                raise SchemaError(f"subtype cycle through {name}")
            state[name] = "busy"
            t = self.types[name]
            if not isinstance(t, EnumType):
                for sup in t.supers:
                    visit(sup)
            state[name] = "done"

        for name in self.types:
            visit(name)

    def _check_ref(self, ref: Ref, where: str) -> None:
        if isinstance(ref, TypeRef):
            if ref.name not in self.types and ref.name not in PRIMITIVE_MAP:
                raise SchemaError(f"{where} has unresolved type {ref.name}")
        else:
            self._check_ref(ref.elem, where)

    def supers_closure(self, name: str) -> list:
        """name plus all (transitive) supertypes, nearest first, declaration order."""
        out: list = []
        queue = [name]
        while queue:
            n = queue.pop(0)
            if n in out:
                continue
            out.append(n)
            t = self.types.get(n)
            if t is not None and not isinstance(t, EnumType):
                queue.extend(t.supers)
        return out

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sup in self.supers_closure(sub)

    def member(self, class_name: str, member_name: str) -> Member | None:
        for n in self.supers_closure(class_name):
            t = self.types.get(n)
            if isinstance(t, ConcreteType):
                for m in t.members:
                    if m.name == member_name:
                        return m
        return None


def _ref_from_doc(doc) -> Ref:
    if isinstance(doc, str):
        return TypeRef(doc)
    if isinstance(doc, dict) and len(doc) == 1:
        ((key, val),) = doc.items()
        if key == "array":
            return ArrayRef(_ref_from_doc(val))
        if key == "iterable":
            return IterableRef(_ref_from_doc(val))
    raise SchemaError(f"malformed foreign type reference {doc!r}")


def load_schema(doc) -> ForeignSchema:
    """Build a schema from its JSON document form (a dict or JSON text)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise SchemaError(f"schema is not valid JSON: {e}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("types"), list):
        raise SchemaError("schema document lacks a types list")
    schema = ForeignSchema()
    for entry in doc["types"]:
        if not isinstance(entry, dict):
            raise SchemaError(f"malformed schema entry {entry!r}")
        if "abstract" in entry:
            t = AbstractType(entry["abstract"], tuple(entry.get("implements", ())))
        elif "concrete" in entry:
            members = tuple(
                Member(m["name"], _ref_from_doc(m["type"])) for m in entry.get("members", ())
            )
            t = ConcreteType(entry["concrete"], tuple(entry.get("implements", ())), members)
        elif "enum" in entry:
            t = EnumType(entry["enum"], tuple(entry.get("constants", ())))
        else:
            raise SchemaError(f"schema entry {entry!r} is not abstract, concrete, or enum")
        if t.name in schema.types or t.name in PRIMITIVE_MAP:
            raise SchemaError(f"duplicate or reserved type name {t.name}")
        schema.types[t.name] = t
    schema.validate()
    return schema


# ---------------------------------------------------------------------------
# Foreign values
#
# Wire form: {"type": tag, "fields": {...}}, {"enum": "Op.PLUS"}, {"int": n},
# {"bool": b}, {"str": s}, {"real": x}, {"array": [...]}, or null.


@dataclass(frozen=True)
class FObj:
    tag: str
    fields: dict


@dataclass(frozen=True)
class FEnum:
    enum: str
    const: str


@dataclass(frozen=True)
class FInt:
    value: int


@dataclass(frozen=True)
class FBool:
    value: bool


@dataclass(frozen=True)
class FStr:
    value: str


@dataclass(frozen=True)
class FReal:
    value: float


@dataclass(frozen=True)
class FArr:
    elems: tuple


ForeignValue = FObj | FEnum | FInt | FBool | FStr | FReal | FArr | None


def load_foreign_value(doc) -> ForeignValue:
    """Build a foreign value from its JSON document form (a dict or JSON text)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise SchemaError(f"foreign value is not valid JSON: {e}") from None
    return _fvalue(doc)


def _fvalue(doc) -> ForeignValue:
    if doc is None:
        return None
    if not isinstance(doc, dict):
        raise SchemaError(f"malformed foreign value {doc!r}")
    keys = set(doc)
    if keys == {"type", "fields"}:
        return FObj(doc["type"], {k: _fvalue(v) for k, v in doc["fields"].items()})
    if keys == {"type"}:
        return FObj(doc["type"], {})
    if keys == {"enum"}:
        path = doc["enum"].split(".")
        if len(path) < 2:
            raise SchemaError(f"enum literal {doc['enum']!r} needs the form Enum.CONST")
        return FEnum(path[-2], path[-1])
    if keys == {"int"}:
        return FInt(int(doc["int"]))
    if keys == {"bool"}:
        return FBool(bool(doc["bool"]))
    if keys == {"str"}:
        return FStr(str(doc["str"]))
    if keys == {"real"}:
        return FReal(float(doc["real"]))
    if keys == {"array"}:
        return FArr(tuple(_fvalue(e) for e in doc["array"]))
    raise SchemaError(f"unrecognized foreign value with keys {sorted(keys)}")


# ---------------------------------------------------------------------------
# Mapping spec AST


@dataclass(frozen=True)
class ForeignLit:
    kind: str  # null | bool | int | path
    value: object = None


@dataclass(frozen=True)
class FieldSpec:
    member: str
    kind: str = "plain"  # plain | eq | neq | optional | cast | cast_array
    skip: bool = False
    literal: ForeignLit | None = None
    cast_to: str | None = None


@dataclass(frozen=True)
class TemplateArg:
    name: str
    enum_type: str | None = None
    enum_ctor: str | None = None


@dataclass(frozen=True)
class Rule:
    fields: tuple
    ctor: str
    args: tuple

    def active_fields(self) -> tuple:
        return tuple(f for f in self.fields if not f.skip)


@dataclass(frozen=True)
class ClassMapping:
    class_name: str
    rules: tuple


@dataclass(frozen=True)
class TympanicSpec:
    name: str
    imports: tuple  # of tuple[str, ...]
    export: tuple  # module path components
    types: tuple  # of (foreign name, adt name), source order
    mappings: tuple  # of ClassMapping

    def adt_for(self, foreign_name: str) -> str | None:
        for f, a in self.types:
            if f == foreign_name:
                return a
        return None


# --- tokenizer

_T_SYMBOLS = ("=>", "==", "!=", "::", "-", ",", ":", "%", "(", ")", "[", "]", "?", ".", "=")
_T_KEYWORDS = {"mapping", "import", "export", "types", "constructors"}
_T_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_T_INT = re.compile(r"[0-9]+")


class _Tokens:
    def __init__(self, text: str):
        self.toks: list = []  # (kind, value, line, col)
        line, col, i = 1, 1, 0
        while i < len(text):
            ch = text[i]
            if ch == "\n":
                line, col, i = line + 1, 1, i + 1
                continue
            if ch in " \t\r":
                col, i = col + 1, i + 1
                continue
            if ch == "#":
                while i < len(text) and text[i] != "\n":
                    i += 1
                continue
            m = _T_IDENT.match(text, i)
            if m:
                value = m.group()
                kind = "keyword" if value in _T_KEYWORDS else "ident"
                self.toks.append((kind, value, line, col))
                i += len(value)
                col += len(value)
                continue
            m = _T_INT.match(text, i)
            if m:
                self.toks.append(("int", m.group(), line, col))
                i += len(m.group())
                col += len(m.group())
                continue
            for sym in _T_SYMBOLS:
                if text.startswith(sym, i):
                    self.toks.append(("sym", sym, line, col))
                    i += len(sym)
                    col += len(sym)
                    break
            else:
                raise TympanicSyntaxError(f"stray character {ch!r}", line, col)
        self.toks.append(("eof", "", line, col))
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        tok = self.toks[self.pos]
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str):
        _, _, line, col = self.peek()
        raise TympanicSyntaxError(message, line, col)

    def expect(self, value: str) -> str:
        kind, v, line, col = self.peek()
        if v != value:
            raise TympanicSyntaxError(f"expected {value!r}, got {v or 'end of input'!r}", line, col)
        self.next()
        return v

    def ident(self, what: str) -> str:
        kind, v, line, col = self.peek()
        if kind != "ident":
            raise TympanicSyntaxError(f"expected {what}, got {v or 'end of input'!r}", line, col)
        self.next()
        return v


def parse_tympanic(text: str) -> TympanicSpec:
    """Parse a mapping file into its spec AST."""
    toks = _Tokens(text)
    toks.expect("mapping")
    name = toks.ident("a mapping name")

    imports: list = []
    while toks.peek()[1] == "import":
        toks.next()
        path = [toks.ident("a package name")]
        while toks.peek()[1] == ".":
            toks.next()
            path.append(toks.ident("a package name"))
        imports.append(tuple(path))

    toks.expect("export")
    export = [toks.ident("a module name")]
    while toks.peek()[1] == "::":
        toks.next()
        export.append(toks.ident("a module name"))

    toks.expect("types")
    types: list = []
    while toks.peek()[0] == "ident":
        foreign = toks.ident("a foreign type")
        toks.expect("=>")
        mapped = toks.ident("a data type")
        if any(f == foreign for f, _ in types):
            toks.fail(f"duplicate type mapping for {foreign}")
        types.append((foreign, mapped))

    toks.expect("constructors")
    # Rule groups for one class may appear more than once; they merge in
    # textual order, which keeps "first applicable rule" well defined.
    order: list = []
    grouped: dict = {}
    while toks.peek()[0] == "ident":
        class_name = toks.next()[1]
        rules: list = []
        while toks.peek()[1] == "-":
            toks.next()
            rules.append(_parse_rule(toks))
        if not rules:
            toks.fail(f"class {class_name} has no rules")
        if class_name not in grouped:
            order.append(class_name)
            grouped[class_name] = []
        grouped[class_name].extend(rules)
    if toks.peek()[0] != "eof":
        toks.fail("expected a class name or end of input")
    mappings = tuple(ClassMapping(c, tuple(grouped[c])) for c in order)
    return TympanicSpec(name, tuple(imports), tuple(export), tuple(types), mappings)


def _parse_rule(toks: _Tokens) -> Rule:
    fields: list = []
    if toks.peek()[1] != ":":
        while True:
            fields.append(_parse_field(toks))
            if toks.peek()[1] == ",":
                toks.next()
                continue
            break
    toks.expect(":")
    ctor = toks.ident("a constructor name")
    toks.expect("(")
    args: list = []
    if toks.peek()[1] != ")":
        while True:
            args.append(_parse_arg(toks))
            if toks.peek()[1] == ",":
                toks.next()
                continue
            break
    toks.expect(")")
    return Rule(tuple(fields), ctor, tuple(args))


def _parse_field(toks: _Tokens) -> FieldSpec:
    skip = False
    if toks.peek()[1] == "%":
        toks.next()
        skip = True
    if toks.peek()[1] == "(":
        toks.next()
        target = toks.ident("a cast target type")
        kind = "cast"
        if toks.peek()[1] == "[":
            toks.next()
            toks.expect("]")
            kind = "cast_array"
        toks.expect(")")
        member = toks.ident("a member name")
        return FieldSpec(member, kind, skip, cast_to=target)
    member = toks.ident("a member name")
    nxt = toks.peek()[1]
    if nxt == "==":
        toks.next()
        return FieldSpec(member, "eq", skip, literal=_parse_foreign_literal(toks))
    if nxt == "!=":
        toks.next()
        return FieldSpec(member, "neq", skip, literal=_parse_foreign_literal(toks))
    if nxt == "?":
        toks.next()
        return FieldSpec(member, "optional", skip)
    return FieldSpec(member, "plain", skip)


def _parse_foreign_literal(toks: _Tokens) -> ForeignLit:
    kind, value, line, col = toks.peek()
    if value == "null":
        toks.next()
        return ForeignLit("null")
    if value in ("true", "false"):
        toks.next()
        return ForeignLit("bool", value == "true")
    if value == "-":
        toks.next()
        k2, v2, l2, c2 = toks.peek()
        if k2 != "int":
            raise TympanicSyntaxError("expected an integer after '-'", l2, c2)
        toks.next()
        return ForeignLit("int", -int(v2))
    if kind == "int":
        toks.next()
        return ForeignLit("int", int(value))
    if kind == "ident":
        path = [toks.next()[1]]
        while toks.peek()[1] == ".":
            toks.next()
            path.append(toks.ident("a path component"))
        return ForeignLit("path", tuple(path))
    raise TympanicSyntaxError(f"expected a value literal, got {value!r}", line, col)


def _parse_arg(toks: _Tokens) -> TemplateArg:
    first = toks.ident("an argument name")
    if toks.peek()[0] != "ident":
        return TemplateArg(first)
    # Inline enum form: Type name = ctor()
    arg_name = toks.next()[1]
    toks.expect("=")
    ctor = toks.ident("an enum constructor")
    toks.expect("(")
    if toks.peek()[1] != ")":
        toks.fail("inline enum values must be nullary constructor literals")
    toks.expect(")")
    return TemplateArg(arg_name, enum_type=first, enum_ctor=ctor)


# ---------------------------------------------------------------------------
# Signature inference


def _mapped_adt(spec: TympanicSpec, schema: ForeignSchema, class_name: str) -> str:
    if class_name not in schema.types:
        raise UnknownForeignType(f"foreign type {class_name} is not in the schema")
    for name in schema.supers_closure(class_name):
        mapped = spec.adt_for(name)
        if mapped is not None:
            return mapped
    raise UnmappedForeignType(f"no type mapping covers {class_name}")


def _map_ref(spec: TympanicSpec, schema: ForeignSchema, ref: Ref, where: str) -> ArgType:
    if isinstance(ref, (ArrayRef, IterableRef)):
        return list_of(_map_ref(spec, schema, ref.elem, where))
    name = ref.name
    if name in PRIMITIVE_MAP:
        return prim(PRIMITIVE_MAP[name])
    if name not in schema.types:
        raise UnknownForeignType(f"{where}: foreign type {name} is not in the schema")
    if isinstance(schema.types[name], EnumType):
        raise UnmappedForeignType(
            f"{where}: enum {name} maps to no data type; use an inline enum argument"
        )
    for sup in schema.supers_closure(name):
        mapped = spec.adt_for(sup)
        if mapped is not None:
            return adt(mapped)
    raise UnmappedForeignType(f"{where}: no type mapping covers {name}")


def _cast_argtype(spec: TympanicSpec, schema: ForeignSchema, target: str, where: str) -> ArgType:
    if target in PRIMITIVE_MAP:
        return prim(PRIMITIVE_MAP[target])
    return _map_ref(spec, schema, TypeRef(target), where)


def _field_argtype(spec: TympanicSpec, schema: ForeignSchema, class_name: str, f: FieldSpec) -> ArgType:
    where = f"{class_name}.{f.member}"
    member = schema.member(class_name, f.member)
    if member is None:
        raise UnknownMember(f"{class_name} has no member {f.member}")
    if f.kind == "cast":
        return _cast_argtype(spec, schema, f.cast_to, where)
    if f.kind == "cast_array":
        return list_of(_cast_argtype(spec, schema, f.cast_to, where))
    base = _map_ref(spec, schema, member.type, where)
    if f.kind == "optional":
        return maybe_of(base)
    return base


def infer_signature(spec: TympanicSpec, schema: ForeignSchema):
    """Infer the signature and render its module text.

    Returns (Signature, module text). Constructors keep spec order; inline
    enum ADTs are appended after the mapped ADTs.
    """
    ctors: list = []
    enum_ctors: dict = {}
    for cm in spec.mappings:
        adt_name = _mapped_adt(spec, schema, cm.class_name)
        for rule in cm.rules:
            active = rule.active_fields()
            if len(active) != len(rule.args):
                raise ArityMismatch(
                    f"rule for {cm.class_name}: {len(active)} fields feed "
                    f"{rule.ctor}/{len(rule.args)}"
                )
            args: list = []
            for f, a in zip(active, rule.args):
                if a.enum_type is not None:
                    enum_ctors.setdefault(a.enum_type, [])
                    if a.enum_ctor not in enum_ctors[a.enum_type]:
                        enum_ctors[a.enum_type].append(a.enum_ctor)
                    args.append((a.name, adt(a.enum_type)))
                else:
                    args.append((a.name, _field_argtype(spec, schema, cm.class_name, f)))
            ctors.append(Constructor(rule.ctor, adt_name, tuple(args)))
    for enum_name, names in enum_ctors.items():
        for n in names:
            ctors.append(Constructor(n, enum_name, ()))
    types = {c.type for c in ctors} | {a for _, a in spec.types}
    sig = Signature(frozenset(types), tuple(ctors))
    module = "module " + "::".join(spec.export) + "\n\n" + render_signature(sig)
    return sig, module


# ---------------------------------------------------------------------------
# Marshalling (interpreted)


def _runtime_conforms(schema: ForeignSchema, v: ForeignValue, target: str) -> bool:
    if v is None:
        return False
    if isinstance(v, FObj):
        return target in schema.types and schema.is_subtype(v.tag, target)
    if isinstance(v, FEnum):
        return v.enum == target
    kind = {FInt: "Integer", FBool: "Boolean", FStr: "String", FReal: "Double"}.get(type(v))
    return kind == target


def _lit_matches(lit: ForeignLit, v: ForeignValue) -> bool:
    if lit.kind == "null":
        return v is None
    if lit.kind == "bool":
        return isinstance(v, FBool) and v.value is lit.value
    if lit.kind == "int":
        return isinstance(v, FInt) and v.value == lit.value
    # Enum constant paths compare on the trailing Enum.CONST components so
    # package qualifiers in the mapping file are tolerated.
    if not isinstance(v, FEnum):
        return False
    path = lit.value
    if path[-1] != v.const:
        return False
    return len(path) == 1 or path[-2] == v.enum


def _guard_holds(schema: ForeignSchema, f: FieldSpec, obj: FObj) -> bool:
    v = obj.fields.get(f.member)
    if f.kind == "eq":
        return _lit_matches(f.literal, v)
    if f.kind == "neq":
        return not _lit_matches(f.literal, v)
    if f.kind == "cast":
        return _runtime_conforms(schema, v, f.cast_to)
    if f.kind == "cast_array":
        return isinstance(v, FArr) and all(
            _runtime_conforms(schema, e, f.cast_to) for e in v.elems
        )
    return True  # plain and optional never fail


def marshal(spec: TympanicSpec, schema: ForeignSchema, value: ForeignValue) -> Term:
    """Convert a foreign value to a term over the inferred signature.

    Dispatch picks the most specific rule set whose class is a supertype of
    the value's tag; its rules fire in textual order, first applicable wins.
    """
    sig, _ = infer_signature(spec, schema)
    rules_by_class = {cm.class_name: cm for cm in spec.mappings}

    def dispatch(v: ForeignValue, path: tuple) -> Term:
        if not isinstance(v, FObj):
            raise NoApplicableRule(f"cannot dispatch on {type(v).__name__} value", path)
        cm = None
        for name in schema.supers_closure(v.tag):
            cm = rules_by_class.get(name)
            if cm is not None:
                break
        if cm is None:
            raise NoApplicableRule(f"no rules cover class {v.tag}", path)
        for rule in cm.rules:
            if all(_guard_holds(schema, f, v) for f in rule.fields):
                return fire(cm.class_name, rule, v, path)
        raise NoApplicableRule(f"no rule for {cm.class_name} applies to this {v.tag}", path)

    def fire(class_name: str, rule: Rule, obj: FObj, path: tuple) -> Term:
        args: list = []
        for f, a in zip(rule.active_fields(), rule.args):
            if a.enum_type is not None:
                args.append(Con(a.enum_ctor, a.enum_type, ()))
                continue
            at = _field_argtype(spec, schema, class_name, f)
            args.append(convert(obj.fields.get(f.member), at, path + (f.member,)))
        return Con(rule.ctor, _mapped_adt(spec, schema, class_name), tuple(args))

    def convert(v: ForeignValue, at: ArgType, path: tuple) -> Term:
        if at.kind == "maybe":
            return nothing_() if v is None else just_(convert(v, at.elem, path))
        if v is None:
            raise NullNotOptional("null in a non-optional position", path)
        if at.kind == "prim":
            expected = {"int": FInt, "bool": FBool, "str": FStr, "real": FReal}[at.name]
            if isinstance(v, expected):
                value = float(v.value) if at.name == "real" else v.value
                return Prim(at.name, value)
            raise CastFailure(f"expected a {at.name} value, got {type(v).__name__}", path)
        if at.kind == "list":
            if not isinstance(v, FArr):
                raise CastFailure(f"expected an array, got {type(v).__name__}", path)
            return ListTerm(
                tuple(convert(e, at.elem, path + (i,)) for i, e in enumerate(v.elems)), at.elem
            )
        # adt
        if not isinstance(v, FObj):
            raise CastFailure(f"expected an object, got {type(v).__name__}", path)
        return dispatch(v, path)

    result = dispatch(value, ())
    root_adt = _mapped_adt(spec, schema, value.tag)
    issues = check_term(sig, result, adt(root_adt))
    if issues:  # the rules above should make this impossible
        raise MarshalError(f"marshalled term is ill-typed: {issues[0]}", ())
    return result


# ---------------------------------------------------------------------------
# Static checking


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


def _guard_atoms(rule: Rule) -> frozenset:
    atoms = set()
    for f in rule.fields:
        if f.kind in ("eq", "neq"):
            atoms.add((f.kind, f.member, f.literal))
        elif f.kind in ("cast", "cast_array"):
            atoms.add((f.kind, f.member, f.cast_to))
    return frozenset(atoms)


def check_spec(spec: TympanicSpec, schema: ForeignSchema) -> list:
    """Static diagnostics for a mapping: unknown names, arities, dead rules."""
    diags: list = []

    for foreign, _ in spec.types:
        if foreign not in schema.types:
            diags.append(Diagnostic("unknown-foreign-type", f"types section names {foreign}"))
        else:
            t = schema.types[foreign]
            if isinstance(t, AbstractType):
                mapped_classes = {cm.class_name for cm in spec.mappings}
                if not any(
                    isinstance(schema.types.get(c), ConcreteType) and schema.is_subtype(c, foreign)
                    for c in mapped_classes
                ):
                    diags.append(
                        Diagnostic(
                            "abstract-without-concrete",
                            f"abstract type {foreign} has no mapped concrete subtype",
                        )
                    )

    for cm in spec.mappings:
        if cm.class_name not in schema.types:
            diags.append(
                Diagnostic("unknown-foreign-type", f"rules declared for unknown class {cm.class_name}")
            )
            continue
        try:
            _mapped_adt(spec, schema, cm.class_name)
        except MappingError as e:
            diags.append(Diagnostic("unmapped-foreign-type", str(e)))
        for rule in cm.rules:
            active = rule.active_fields()
            if len(active) != len(rule.args):
                diags.append(
                    Diagnostic(
                        "arity-mismatch",
                        f"rule for {cm.class_name}: {len(active)} fields feed "
                        f"{rule.ctor}/{len(rule.args)}",
                    )
                )
            known = set()
            for f in rule.fields:
                if schema.member(cm.class_name, f.member) is None:
                    diags.append(
                        Diagnostic("unknown-member", f"{cm.class_name} has no member {f.member}")
                    )
                else:
                    known.add(f.member)
            # Argument types must resolve for every field that feeds an
            # argument; inline enum arguments bypass the member's own type.
            for f, a in zip(active, rule.args):
                if a.enum_type is not None or f.member not in known:
                    continue
                try:
                    _field_argtype(spec, schema, cm.class_name, f)
                except MappingError as e:
                    diags.append(Diagnostic("unmapped-foreign-type", str(e)))
        # A later rule is dead when an earlier one's guards are a subset of its.
        for i, earlier in enumerate(cm.rules):
            for later in cm.rules[i + 1:]:
                if _guard_atoms(earlier) <= _guard_atoms(later):
                    diags.append(
                        Diagnostic(
                            "unreachable-rule",
                            f"rule {later.ctor} under {cm.class_name} can never fire after "
                            f"{earlier.ctor}",
                        )
                    )
    return diags
