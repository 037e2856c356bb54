import numpy as np
import pytest

from gbrw.algebra import EMPTY_SET, IndexSet
from gbrw.rules import LevyRule, WindowMaxRule
from gbrw.rulespec import (
    RuleSpecError,
    load_rule,
    make_builtin,
    parse_index_set,
    parse_rule_document,
)


def test_make_builtin_names():
    assert make_builtin("identity").name == "identity"
    assert make_builtin("window-max:3").width == 3
    assert isinstance(make_builtin("levy"), LevyRule)
    assert make_builtin("levy", sgn0=1).sgn0 == 1
    assert make_builtin("extended-brw:prefix:0.5").seq.kind == "prefix"
    assert make_builtin("sign-flips:0.25").density == 0.25
    assert make_builtin("max").width is None


def test_make_builtin_errors():
    with pytest.raises(RuleSpecError):
        make_builtin("no-such-rule")
    with pytest.raises(RuleSpecError):
        make_builtin("window-max")
    with pytest.raises(RuleSpecError):
        make_builtin("window-max:zero")
    with pytest.raises(RuleSpecError):
        make_builtin("extended-brw:mystery")


def test_symmetric_builtin():
    rule = make_builtin("symmetric:-1:0:1")
    assert rule.psi(2, [1, 1]) == 1
    assert rule.psi(2, [-1, -1]) == -1
    # right-continuous: value at the jump comes from the upper piece
    assert rule.psi(2, [1, -1]) == 1


def test_parse_index_set():
    assert parse_index_set("{1,2,5}") == IndexSet([1, 2, 5])
    assert parse_index_set("{}") == EMPTY_SET
    with pytest.raises(RuleSpecError):
        parse_index_set("{1;2}")


def test_parse_builtin_document():
    rule = parse_rule_document("psi0: -1\ngenerator: builtin levy\n")
    assert isinstance(rule, LevyRule)


def test_parse_builtin_document_psi0_conflict():
    with pytest.raises(RuleSpecError):
        parse_rule_document("psi0: +1\ngenerator: builtin levy\n")


def test_parse_beta_document():
    text = """
# a patched window rule
psi0: -1
generator: beta {
  2: [{1}]
  3: [{1,2}, {}]
  fallback: window-max:2
}
"""
    rule = parse_rule_document(text)
    assert rule.psi0 == -1
    assert rule.step_family(2).members == frozenset({IndexSet([1])})
    assert rule.step_family(3).members == frozenset({IndexSet([1, 2]), EMPTY_SET})
    # unlisted step falls back
    expected = WindowMaxRule(2).step_table(4)
    assert rule.step_table(4) == expected


def test_parse_truth_document():
    text = """
psi0: +1
generator: truth {
  3: +--+
  fallback: identity
}
"""
    rule = parse_rule_document(text)
    table = rule.step_table(3)
    assert list(table.signs) == [1, -1, -1, 1]
    assert rule.multiplier(5, [1, 1, 1, 1]) == 1


def test_parse_truth_document_wrong_length():
    with pytest.raises(RuleSpecError) as err:
        parse_rule_document("psi0: +1\ngenerator: truth {\n3: +-\n}\n")
    assert "line 3" in str(err.value)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(RuleSpecError) as err:
        parse_rule_document("psi0: maybe\ngenerator: builtin levy\n")
    assert "line 1" in str(err.value)
    with pytest.raises(RuleSpecError):
        parse_rule_document("psi0: -1\ngenerator: beta {\n2: [{1}]\n")  # no brace
    with pytest.raises(RuleSpecError):
        parse_rule_document("generator: builtin levy\n")  # no psi0


def test_load_rule_builtin_and_file(tmp_path):
    rule = load_rule("builtin:window-max:2")
    assert rule.width == 2
    doc = tmp_path / "rule.gbrw"
    doc.write_text("psi0: -1\ngenerator: builtin modified-levy\n")
    loaded = load_rule(str(doc))
    assert loaded.name == "modified-levy"
    with pytest.raises(RuleSpecError):
        load_rule("no/such/file.gbrw")


def test_document_rule_round_trips_through_apply():
    text = "psi0: -1\ngenerator: beta {\n2: [{}]\n3: [{2}]\nfallback: brw\n}\n"
    rule = parse_rule_document(text)
    xi = np.array([1, -1, 1, 1], dtype=np.int8)
    eta = rule.apply(xi)
    assert eta[0] == -1  # psi0
    assert eta[1] == 1  # constant flip times -1
    assert eta[2] == -1  # u_[{2}] = xi_2 = -1
    assert eta[3] == -1  # fallback product of first three
