import pytest

from src.core import oracle
from src.errors import OracleBoundError, ValidationError
from src.fixtures import ref2, std2, tn
from src.models.diagram import MatrixUnit

CATALAN = {1: 2, 2: 5, 3: 14, 4: 42, 5: 132}


def units(*pairs):
    return frozenset(MatrixUnit(1, 0, k, l) for k, l in pairs)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_ideal_counts(n):
    lattice = oracle.enumerate_ideals_Tn(n)
    assert len(lattice) == CATALAN[n]
    assert lattice.zero == frozenset()
    assert lattice.whole == frozenset(oracle.tn_units(n))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_subset_enumeration_agrees(n):
    profiles = oracle.enumerate_ideals_Tn(n, oracle.METHOD_PROFILES)
    subsets = oracle.enumerate_ideals_Tn(n, oracle.METHOD_SUBSETS)
    assert profiles.ideals == subsets.ideals


def test_t2_lattice():
    lattice = oracle.enumerate_ideals_Tn(2)
    assert set(lattice.ideals) == {
        units(),
        units((1, 2)),
        units((1, 1), (1, 2)),
        units((1, 2), (2, 2)),
        units((1, 1), (1, 2), (2, 2)),
    }
    a = lattice.index[units((1, 1), (1, 2))]
    b = lattice.index[units((1, 2), (2, 2))]
    assert lattice.ideals[lattice.meet_table[a][b]] == units((1, 2))
    assert lattice.ideals[lattice.join_table[a][b]] == lattice.whole


def test_wedge_ideals():
    assert oracle.wedge_ideal(3, 1, 3) == frozenset()
    assert oracle.wedge_ideal(2, 1, 1) == units((1, 2), (2, 2))
    assert oracle.wedge_ideal(2, 2, 2) == units((1, 1), (1, 2))
    with pytest.raises(ValidationError):
        oracle.wedge_ideal(2, 2, 1)
    with pytest.raises(ValidationError):
        oracle.wedge_ideal(2, 1, 3)


def test_bruteforce_meet_irreducibility():
    lattice = oracle.enumerate_ideals_Tn(2)
    mi, witness = oracle.is_meet_irreducible_bruteforce(lattice, units((1, 2)))
    assert not mi
    assert set(witness) == {units((1, 1), (1, 2)), units((1, 2), (2, 2))}
    assert oracle.is_meet_irreducible_bruteforce(lattice, units()) == (True, None)
    assert oracle.is_meet_irreducible_bruteforce(lattice, lattice.whole)[0]
    with pytest.raises(ValidationError):
        oracle.is_meet_irreducible_bruteforce(lattice, units((1, 1)))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_wedge_theorem(n):
    report = oracle.verify_wedge_theorem(n)
    assert report.agrees
    assert report.mi_count == n * (n + 1) // 2
    assert report.ideal_count == CATALAN[n]


def test_meet_irreducibility_is_symmetric_under_flip():
    n = 4
    lattice = oracle.enumerate_ideals_Tn(n)

    def flip(ideal):
        return frozenset(MatrixUnit(1, 0, n + 1 - u.col, n + 1 - u.row) for u in ideal)

    for ideal in lattice.ideals:
        assert flip(ideal) in lattice.index
        assert (
            oracle.is_meet_irreducible_bruteforce(lattice, ideal)[0]
            == oracle.is_meet_irreducible_bruteforce(lattice, flip(ideal))[0]
        )


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_envelope_theorem_on_tn(n):
    report = oracle.verify_envelope_theorem(n, horizon=2)
    assert report.agrees, report.to_dict()
    assert report.checked == CATALAN[n] - 1
    assert report.meet_irreducible == n * (n + 1) // 2


@pytest.mark.parametrize("factory", [ref2, std2])
def test_envelope_theorem_on_two_levels(factory):
    report = oracle.verify_envelope_theorem_two_level(factory(2), horizon=2)
    assert report.methods_agree
    assert report.agrees, report.to_dict()


def test_two_level_enumeration_on_single_level():
    by_profiles = oracle.enumerate_ideals_two_level(tn(2))
    by_generators = oracle.enumerate_ideals_two_level(tn(2), oracle.METHOD_GENERATORS)
    assert set(by_profiles.ideals) == set(oracle.enumerate_ideals_Tn(2).ideals)
    assert set(by_generators.ideals) == set(by_profiles.ideals)


def test_oracle_bounds(monkeypatch):
    with pytest.raises(OracleBoundError):
        oracle.enumerate_ideals_Tn(7)
    monkeypatch.setenv("TAF_ORACLE_MAX_N", "3")
    with pytest.raises(OracleBoundError):
        oracle.enumerate_ideals_Tn(4)
    monkeypatch.setenv("TAF_ORACLE_MAX_UNITS", "5")
    with pytest.raises(OracleBoundError):
        oracle.enumerate_ideals_Tn(3, oracle.METHOD_SUBSETS)
    with pytest.raises(OracleBoundError):
        oracle.enumerate_ideals_two_level(ref2(2))
    with pytest.raises(OracleBoundError):
        oracle.enumerate_ideals_two_level(ref2(3))
    with pytest.raises(ValidationError):
        oracle.enumerate_ideals_Tn(0)
