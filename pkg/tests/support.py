"""Shared fixtures: generators, brute-force oracles, and golden texts."""

from __future__ import annotations

import itertools
import re

from csbb.jsonlang import array, boolean, null_, number, obj, prop, string
from csbb.patterns import (
    PList,
    PLit,
    PSeqVar,
    PSeqWild,
    PVar,
    PWild,
    instantiate,
    match_first,
    pattern_root_type,
    types_compatible,
)
from csbb.terms import (
    Con,
    ListTerm,
    Prim,
    encode_term,
    term_equals,
    term_root_type,
)

# ---------------------------------------------------------------------------
# Expression-language mapping fixture (class hierarchy + mapping + module)

EXPR_MAPPING = """\
mapping ExprAst

import expressions

export expr::Expr

types Expr => Expr

constructors

Binary
- %getOp == Op.PLUS, getLhs, getRhs: add(lhs, rhs)
- %getOp == Op.TIMES, getLhs, getRhs: mul(lhs, rhs)
- %getOp == Op.MINUS, getLhs, getRhs: sub(lhs, rhs)
- %getOp == Op.SLASH, getLhs, getRhs: div(lhs, rhs)

Cond
- getCond, getThen, %getElse == null: ifThen(cond, then)
- getCond, getThen, getElse != null: ifThenElse(cond, then, els)

Block
- getBody: block(body)

Lit
- (Integer)getValue: integer(intVal)
- (Boolean)getValue: boolean(boolVal)
- (String)getValue: string(strVal)
"""

EXPR_SCHEMA = {
    "types": [
        {"enum": "Op", "constants": ["PLUS", "TIMES", "MINUS", "SLASH"]},
        {"abstract": "Object"},
        {"abstract": "Expr"},
        {
            "concrete": "Binary",
            "implements": ["Expr"],
            "members": [
                {"name": "getLhs", "type": "Expr"},
                {"name": "getRhs", "type": "Expr"},
                {"name": "getOp", "type": "Op"},
            ],
        },
        {
            "concrete": "Cond",
            "implements": ["Expr"],
            "members": [
                {"name": "getCond", "type": "Expr"},
                {"name": "getThen", "type": "Expr"},
                {"name": "getElse", "type": "Expr"},
            ],
        },
        {
            "concrete": "Block",
            "implements": ["Expr"],
            "members": [{"name": "getBody", "type": {"array": "Expr"}}],
        },
        {
            "concrete": "Lit",
            "implements": ["Expr"],
            "members": [{"name": "getValue", "type": "Object"}],
        },
    ]
}

EXPR_MODULE = """\
module expr::Expr

data Expr
  = add(Expr lhs, Expr rhs) | mul(Expr lhs, Expr rhs) | sub(Expr lhs, Expr rhs) | div(Expr lhs, Expr rhs)
  | ifThen(Expr cond, Expr then) | ifThenElse(Expr cond, Expr then, Expr els)
  | block(list[Expr] body)
  | integer(int intVal) | boolean(bool boolVal) | string(str strVal);
"""

INLINE_ENUM_MAPPING = """\
mapping ExprAst

import expressions

export expr::Expr

types Expr => Expr

constructors

Binary
- getOp == Op.PLUS, getLhs, getRhs: binary(Op op = plus(), lhs, rhs)
"""


def tokens(text: str) -> list:
    """Token stream for whitespace-insensitive golden comparison."""
    return re.findall(r"[A-Za-z_][A-Za-z0-9_]*|[0-9]+|\S", text)


def lit_value(doc) -> dict:
    return doc


def fobj(tag: str, **fields) -> dict:
    return {"type": tag, "fields": fields}


# ---------------------------------------------------------------------------
# Random JSON terms

_KEY_POOL = ["name", "age", "x", "y", "tag", "k"]
_STR_POOL = ["", "Rodin", "a b", 'quo"te', "back\\slash", "line\nbreak", "tab\t", "ünïcode", "_hole"]


def gen_json_term(rng, depth: int = 3):
    kinds = ["null", "bool", "number", "string"]
    if depth > 0:
        kinds += ["array", "object", "array", "object"]
    k = rng.choice(kinds)
    if k == "null":
        return null_()
    if k == "bool":
        return boolean(rng.random() < 0.5)
    if k == "number":
        return number(gen_real(rng))
    if k == "string":
        return string(rng.choice(_STR_POOL))
    if k == "array":
        return array([gen_json_term(rng, depth - 1) for _ in range(rng.randint(0, 3))])
    return obj(
        [
            prop(rng.choice(_KEY_POOL), gen_json_term(rng, depth - 1))
            for _ in range(rng.randint(0, 3))
        ]
    )


def gen_real(rng) -> float:
    style = rng.randint(0, 3)
    if style == 0:
        return float(rng.randint(-50, 50))
    if style == 1:
        return rng.randint(-400, 400) / 8.0
    if style == 2:
        return rng.random() * 10 ** rng.randint(-3, 3)
    return -rng.random()


def gen_json_object(rng, max_props: int = 6):
    """An object with up to max_props properties; 'name' keys are common."""
    n = rng.randint(0, max_props)
    props = []
    for _ in range(n):
        key = "name" if rng.random() < 0.4 else rng.choice(_KEY_POOL)
        props.append(prop(key, gen_json_term(rng, 1)))
    return obj(props)


# ---------------------------------------------------------------------------
# Brute-force oracles


def brute_well_typed(sig, t, at) -> bool:
    """Reference checker: try every declared constructor at each node."""
    if at.kind == "prim":
        return isinstance(t, Prim) and t.kind == at.name
    if at.kind == "adt":
        if not isinstance(t, Con) or t.type != at.name:
            return False
        return any(
            c.name == t.name
            and c.arity == len(t.args)
            and all(brute_well_typed(sig, s, a) for s, (_, a) in zip(t.args, c.args))
            for c in sig.constructors_of(at.name)
        )
    if at.kind == "list":
        return (
            isinstance(t, ListTerm)
            and t.elem_type == at.elem
            and all(brute_well_typed(sig, e, at.elem) for e in t.elems)
        )
    # maybe
    if not isinstance(t, Con) or t.type != "Maybe":
        return False
    if t.name == "nothing":
        return not t.args
    return t.name == "just" and len(t.args) == 1 and brute_well_typed(sig, t.args[0], at.elem)


def _compositions(total: int, k: int):
    """All k-tuples of nonnegative ints summing to total, lexicographically."""
    if k == 0:
        return [()] if total == 0 else []
    return [
        (first,) + rest
        for first in range(total + 1)
        for rest in _compositions(total - first, k - 1)
    ]


def _check_single(p, t, env):
    """Non-backtracking element check for the split oracle; None = no match."""
    if isinstance(p, PWild):
        return env
    if isinstance(p, PLit):
        return env if term_equals(p.term, t) else None
    if isinstance(p, PVar):
        if p.name in env:
            bound = env[p.name]
            ok = not isinstance(bound, tuple) and term_equals(bound, t)
            return env if ok else None
        return {**env, p.name: t}
    raise AssertionError(f"oracle cannot handle element pattern {p}")


def brute_list_envs(pelems, telems) -> list:
    """Split-enumeration oracle: pick every segmentation, then verify it."""
    seq_slots = [i for i, p in enumerate(pelems) if isinstance(p, (PSeqVar, PSeqWild))]
    singles = len(pelems) - len(seq_slots)
    budget = len(telems) - singles
    out = []
    for lens in _compositions(budget, len(seq_slots)) if budget >= 0 else []:
        it = iter(lens)
        pos = 0
        env: dict = {}
        ok = True
        for p in pelems:
            width = next(it) if isinstance(p, (PSeqVar, PSeqWild)) else 1
            piece = tuple(telems[pos:pos + width])
            pos += width
            if isinstance(p, PSeqWild):
                continue
            if isinstance(p, PSeqVar):
                if p.name in env:
                    bound = env[p.name]
                    if not (
                        isinstance(bound, tuple)
                        and len(bound) == len(piece)
                        and all(term_equals(a, b) for a, b in zip(bound, piece))
                    ):
                        ok = False
                        break
                else:
                    env[p.name] = piece
                continue
            env = _check_single(p, piece[0], env)
            if env is None:
                ok = False
                break
        if ok:
            out.append(env)
    return out


def all_subtrees(t) -> list:
    """(path, subterm) pairs in bottom-up, left-to-right order."""
    out = []

    def walk(node, path):
        children = node.args if isinstance(node, Con) else (
            node.elems if isinstance(node, ListTerm) else ()
        )
        for i, child in enumerate(children):
            walk(child, path + (i,))
        out.append((path, node))

    walk(t, ())
    return out


def brute_rewrite(t, rules):
    """Reference one-pass rewriter, recursion written out by hand."""

    def first_applicable(node):
        for lhs, rhs in rules:
            if not types_compatible(pattern_root_type(lhs), term_root_type(node)):
                continue
            env = match_first(lhs, node)
            if env is not None:
                return instantiate(rhs, env)
        return node

    def walk(node):
        if isinstance(node, Con):
            rebuilt = Con(node.name, node.type, tuple(walk(a) for a in node.args))
        elif isinstance(node, ListTerm):
            rebuilt = ListTerm(tuple(walk(e) for e in node.elems), node.elem_type)
        else:
            rebuilt = node
        return first_applicable(rebuilt)

    return walk(t)


def env_key(env) -> tuple:
    """Canonical form of an env for multiset comparison."""
    items = []
    for name in sorted(env):
        v = env[name]
        if isinstance(v, tuple):
            items.append((name, tuple(encode_term(x) for x in v)))
        else:
            items.append((name, encode_term(v)))
    return tuple(items)


def envs_multiset(envs) -> list:
    return sorted(env_key(e) for e in envs)


# ---------------------------------------------------------------------------
# Enumerations for the exhaustive list-match suite

ATOM_X = number(1.0)
ATOM_Y = number(2.0)


def enumerate_list_patterns(max_len: int = 5, max_seq: int = 3, max_lit: int = 2):
    """Every element sequence over {seq a/b/c, lit X, lit Y} within the bounds.

    Sequence-variable names are canonicalized to first-use order a, b, c so
    pure renamings are not enumerated twice.
    """
    from csbb.terms import adt

    elem_kinds = ["s0", "s1", "s2", "litx", "lity"]
    patterns = []
    seen = set()
    for length in range(max_len + 1):
        for combo in itertools.product(elem_kinds, repeat=length):
            n_seq = sum(1 for c in combo if c.startswith("s"))
            n_lit = length - n_seq
            if n_seq > max_seq or n_lit > max_lit:
                continue
            # canonicalize names by first occurrence
            mapping = {}
            canon = []
            for c in combo:
                if c.startswith("s"):
                    if c not in mapping:
                        mapping[c] = "abc"[len(mapping)]
                    canon.append("seq:" + mapping[c])
                else:
                    canon.append(c)
            key = tuple(canon)
            if key in seen:
                continue
            seen.add(key)
            elems = []
            for c in canon:
                if c.startswith("seq:"):
                    elems.append(PSeqVar(c[4:], adt("JSON")))
                else:
                    elems.append(PLit(ATOM_X if c == "litx" else ATOM_Y))
            patterns.append(PList(tuple(elems), adt("JSON")))
    return patterns


def enumerate_atom_lists(max_len: int = 5):
    from csbb.terms import adt

    lists = []
    for length in range(max_len + 1):
        for combo in itertools.product((ATOM_X, ATOM_Y), repeat=length):
            lists.append(ListTerm(combo, adt("JSON")))
    return lists
