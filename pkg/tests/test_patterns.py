from __future__ import annotations

import random

import pytest

from support import (
    all_subtrees,
    brute_list_envs,
    brute_rewrite,
    enumerate_atom_lists,
    enumerate_list_patterns,
    envs_multiset,
    gen_json_term,
)
from csbb.jsonlang import (
    JSON_SIGNATURE,
    array,
    boolean,
    ident,
    null_,
    number,
    obj,
    prop,
    string,
)
from csbb.patterns import (
    IllTypedRule,
    MatchTypeError,
    PatternStructureError,
    PCon,
    PList,
    PLit,
    PSeqVar,
    PSeqWild,
    PVar,
    PWild,
    TypeMismatch,
    UnboundVariable,
    check_pattern,
    instantiate,
    match,
    match_first,
    pattern_equals,
    types_compatible,
    visit_collect,
    visit_rewrite,
)
from csbb.terms import Con, ListTerm, Prim, adt, prim, term_equals, term_root_type

RODIN = obj([prop("name", string("Rodin")), prop("age", number(29.0))])

# object([_*, prop(id("name"), _), *_]) built by hand
NAME_PROP_PATTERN = PCon(
    "object",
    "JSON",
    (
        PList(
            (
                PSeqWild(adt("Prop")),
                PCon("prop", "Prop", (PLit(ident("name")), PWild(adt("JSON")))),
                PSeqWild(adt("Prop")),
            ),
            adt("Prop"),
        ),
    ),
)


def plist(*elems):
    return PList(tuple(elems), adt("JSON"))


def jlist(*elems):
    return ListTerm(tuple(elems), adt("JSON"))


# ---------------------------------------------------------------------------
# match


def test_name_property_pattern_matches_rodin():
    assert list(match(NAME_PROP_PATTERN, RODIN))


def test_variable_matches_anything_of_its_type():
    envs = list(match(PVar("x", adt("JSON")), number(29.0)))
    assert len(envs) == 1
    assert term_equals(envs[0]["x"], number(29.0))


def test_two_sequence_variables_split_in_shortest_first_order():
    e1, e2 = number(1.0), number(2.0)
    p = plist(PSeqVar("a", adt("JSON")), PSeqVar("b", adt("JSON")))
    envs = list(match(p, jlist(e1, e2)))
    expected = brute_list_envs(p.elems, (e1, e2))
    assert len(envs) == len(expected) == 3
    assert envs == expected
    assert [len(e["a"]) for e in envs] == [0, 1, 2]


def test_non_linear_variable_requires_equal_bindings():
    p = PCon("array", "JSON", (plist(PVar("x", adt("JSON")), PVar("x", adt("JSON"))),))
    assert len(list(match(p, array([number(1.0), number(1.0)])))) == 1
    assert list(match(p, array([number(1.0), number(2.0)]))) == []


def test_match_first_present_and_absent():
    assert match_first(NAME_PROP_PATTERN, RODIN) is not None
    assert match_first(PLit(null_()), boolean(True)) is None


def test_match_first_equals_brute_force_first():
    rng = random.Random(5)
    for _ in range(200):
        telems = tuple(gen_json_term(rng, 1) for _ in range(rng.randint(0, 4)))
        pelems = []
        for i in range(rng.randint(0, 3)):
            kind = rng.randint(0, 2)
            if kind == 0:
                pelems.append(PSeqVar(f"s{i}", adt("JSON")))
            elif kind == 1 and telems:
                pelems.append(PLit(rng.choice(telems)))
            else:
                pelems.append(PVar(f"v{i}", adt("JSON")))
        oracle = brute_list_envs(tuple(pelems), telems)
        first = match_first(plist(*pelems), jlist(*telems))
        if not oracle:
            assert first is None
        else:
            assert first == oracle[0]


def test_root_type_mismatch_raises_before_matching():
    with pytest.raises(MatchTypeError):
        match(NAME_PROP_PATTERN, prop("a", null_()))
    with pytest.raises(MatchTypeError):
        match(PVar("x", adt("JSON")), Prim("real", 1.0))


def test_match_is_deterministic():
    p = plist(PSeqVar("a", adt("JSON")), PSeqVar("b", adt("JSON")), PSeqVar("a", adt("JSON")))
    t = jlist(number(1.0), number(1.0), number(2.0))
    assert list(match(p, t)) == list(match(p, t))


def test_completeness_on_lists_against_split_oracle():
    patterns = enumerate_list_patterns(max_len=4, max_seq=2, max_lit=2)
    lists = enumerate_atom_lists(max_len=4)
    for p in patterns:
        for t in lists:
            assert envs_multiset(match(p, t)) == envs_multiset(brute_list_envs(p.elems, t.elems))


def test_renaming_repeated_variables_never_loses_matches():
    rng = random.Random(31)
    for _ in range(150):
        telems = tuple(gen_json_term(rng, 1) for _ in range(rng.randint(0, 4)))
        pelems = []
        fresh = []
        for i in range(rng.randint(1, 4)):
            name = rng.choice(["a", "b"])  # small pool forces reuse
            if rng.random() < 0.5:
                pelems.append(PSeqVar(name, adt("JSON")))
                fresh.append(PSeqVar(f"f{i}", adt("JSON")))
            else:
                pelems.append(PVar(name, adt("JSON")))
                fresh.append(PVar(f"f{i}", adt("JSON")))
        before = len(list(match(plist(*pelems), jlist(*telems))))
        after = len(list(match(plist(*fresh), jlist(*telems))))
        assert after >= before


# ---------------------------------------------------------------------------
# instantiate


def test_instantiate_splices_bound_value():
    p = PCon(
        "object",
        "JSON",
        (
            PList(
                (
                    PCon("prop", "Prop", (PLit(ident("name")), PLit(string("Rodin")))),
                    PCon("prop", "Prop", (PLit(ident("age")), PVar("age", adt("JSON")))),
                ),
                adt("Prop"),
            ),
        ),
    )
    t = instantiate(p, {"age": number(29.0)})
    assert term_equals(t, RODIN)


def test_instantiate_literal_is_identity():
    assert term_equals(instantiate(PLit(RODIN), {}), RODIN)


def test_instantiate_inverts_match():
    rng = random.Random(17)
    for _ in range(300):
        t = gen_json_term(rng, 3)
        p = _derive_pattern(rng, t, iter(range(10_000)))
        for env in match(p, t):
            assert term_equals(instantiate(p, env), t)


def _derive_pattern(rng, t, counter):
    if rng.random() < 0.3:
        return PVar(f"v{next(counter)}", term_root_type(t))
    if isinstance(t, Con):
        return PCon(t.name, t.type, tuple(_derive_pattern(rng, a, counter) for a in t.args))
    if isinstance(t, ListTerm):
        elems = []
        i = 0
        while i < len(t.elems):
            if rng.random() < 0.2:
                j = rng.randint(i, len(t.elems))
                elems.append(PSeqVar(f"s{next(counter)}", t.elem_type))
                i = j
            else:
                elems.append(_derive_pattern(rng, t.elems[i], counter))
                i += 1
        return PList(tuple(elems), t.elem_type)
    return PLit(t)


def test_instantiate_unbound_variable():
    with pytest.raises(UnboundVariable):
        instantiate(PVar("x", adt("JSON")), {})


def test_instantiate_type_mismatch():
    with pytest.raises(TypeMismatch):
        instantiate(PVar("x", adt("Prop")), {"x": number(1.0)})
    with pytest.raises(TypeMismatch):
        instantiate(PVar("x", adt("JSON")), {"x": (number(1.0),)})


def test_instantiate_rejects_wildcards():
    with pytest.raises(PatternStructureError):
        instantiate(PWild(adt("JSON")), {})


def test_sequence_variable_outside_list_is_structural_error():
    with pytest.raises(PatternStructureError):
        match(PSeqVar("xs", adt("JSON")), number(1.0))


# ---------------------------------------------------------------------------
# visit_collect


def test_collect_number_payloads_bottom_up():
    t = array([number(1.0), obj([prop("a", number(2.0))])])
    p = PCon("number", "JSON", (PVar("n", prim("real")),))
    hits = visit_collect(t, p)
    assert [env["n"].value for _, env in hits] == [1.0, 2.0]
    assert [path for path, _ in hits] == [(0, 0), (0, 1, 0, 0, 1)]


def test_collect_nothing():
    assert visit_collect(number(1.0), PLit(null_())) == []


def test_collect_agrees_with_subtree_enumeration():
    rng = random.Random(23)
    p = PCon("prop", "Prop", (PVar("k", adt("Id")), PVar("v", adt("JSON"))))
    for _ in range(100):
        t = gen_json_term(rng, 3)
        expected = []
        for path, sub in all_subtrees(t):
            if types_compatible(adt("Prop"), term_root_type(sub)):
                env = match_first(p, sub)
                if env is not None:
                    expected.append((path, env))
        assert visit_collect(t, p) == expected


# ---------------------------------------------------------------------------
# visit_rewrite

NULL_TO_FALSE = (PLit(null_()), PLit(boolean(False)))


def test_rewrite_replaces_each_null_once():
    t = array([null_(), number(1.0)])
    out = visit_rewrite(t, [NULL_TO_FALSE])
    assert term_equals(out, array([boolean(False), number(1.0)]))


def test_rewrite_with_no_rules_is_identity():
    t = array([null_(), number(1.0)])
    assert term_equals(visit_rewrite(t, []), t)


def test_rewrite_is_single_pass_not_fixpoint():
    # false -> [false] would loop forever under fixpoint semantics
    rule = (PLit(boolean(False)), PLit(array([boolean(False)])))
    out = visit_rewrite(boolean(False), [rule])
    assert term_equals(out, array([boolean(False)]))


def test_rewrite_agrees_with_brute_oracle():
    rng = random.Random(3)
    rules = [
        NULL_TO_FALSE,
        (
            PCon("prop", "Prop", (PVar("k", adt("Id")), PVar("v", adt("JSON")))),
            PCon("prop", "Prop", (PVar("k", adt("Id")), PLit(null_()))),
        ),
    ]
    for _ in range(200):
        t = gen_json_term(rng, 4)
        assert term_equals(visit_rewrite(t, rules), brute_rewrite(t, rules))


def test_rewrite_rejects_unbound_right_side():
    with pytest.raises(IllTypedRule):
        visit_rewrite(null_(), [(PLit(null_()), PVar("x", adt("JSON")))])


def test_rewrite_rejects_wildcard_right_side():
    with pytest.raises(IllTypedRule):
        visit_rewrite(null_(), [(PVar("x", adt("JSON")), PWild(adt("JSON")))])


def test_rewrite_rejects_type_changing_rule():
    with pytest.raises(IllTypedRule):
        visit_rewrite(null_(), [(PLit(null_()), PLit(ident("x")))])


# ---------------------------------------------------------------------------
# check_pattern and pattern equality


def test_check_pattern_accepts_hand_built_pattern():
    assert check_pattern(JSON_SIGNATURE, NAME_PROP_PATTERN, adt("JSON")) == []


def test_check_pattern_flags_misdeclared_hole():
    p = PCon("number", "JSON", (PVar("n", prim("int")),))
    issues = check_pattern(JSON_SIGNATURE, p, adt("JSON"))
    assert len(issues) == 1 and issues[0].path == (0,)


def test_pattern_equals_distinguishes_wildcards_from_vars():
    assert pattern_equals(PWild(adt("JSON")), PWild(adt("JSON")))
    assert not pattern_equals(PWild(adt("JSON")), PVar("x", adt("JSON")))
    assert pattern_equals(NAME_PROP_PATTERN, NAME_PROP_PATTERN)
