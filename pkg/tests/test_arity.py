import pytest

from cloven.arity import Arity, Role, SizeGuardError, boundary_sequence, check_size

O, I = Role.OUTPUT, Role.INPUT


@pytest.mark.parametrize(
    "text, roles",
    [
        ("(2;1,0)", [O, I, O]),
        ("(3;0,0,0)", [O, O, O]),
        ("(2;2,1)", [O, I, I, O, I]),
    ],
)
def test_boundary_sequence(text, roles):
    assert boundary_sequence(Arity.parse(text)) == roles


def test_parse_and_format_round_trip():
    for text in ["(2;0,0)", "(4;1,0,2,0)", "(7;0,0,0,0,0,0,1)"]:
        a = Arity.parse(text)
        assert str(a) == text
        assert Arity.parse(str(a)) == a
    assert Arity.parse("2:1,0") == Arity.of(1, 0)


@pytest.mark.parametrize("bad", ["", "(2;1)", "(1;0)", "(2;-1,0)", "(x;0,0)"])
def test_malformed_arities_raise(bad):
    with pytest.raises(ValueError):
        Arity.parse(bad)


def test_counts_and_dimension():
    a = Arity.of(2, 1, 0)
    assert a.n_leaves == 6
    assert a.top_dimension == 2 * 3 + 3 - 4
    assert a.output_positions == (0, 3, 5)


def test_rotation_representative_is_shared_by_all_rotations():
    a = Arity.of(0, 2, 1)
    reps = {a.rotated(s).rotation_representative() for s in range(a.k)}
    assert reps == {Arity.of(2, 1, 0)}


def test_size_guard(monkeypatch):
    big = Arity.of(*([1] * 6))
    with pytest.raises(SizeGuardError):
        check_size(big)
    check_size(big, max_n=12)
    monkeypatch.setenv("CLOVEN_MAX_N", "12")
    check_size(big)
