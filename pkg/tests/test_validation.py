import numpy as np
import pytest

from qedqec.perfect_code import SYNDROME_TABLE, PauliString, Syndrome
from qedqec.transversal_gates import K_LABELS
from qedqec.validation import check_single_error_correction, check_syndrome_table, validate


@pytest.fixture
def swapped_table():
    """Table with the X0 and X2 rows exchanged."""
    table = dict(SYNDROME_TABLE)
    a, b = Syndrome.from_string("0100"), Syndrome.from_string("0101")
    table[a], table[b] = table[b], table[a]
    return table


@pytest.fixture(scope="module")
def report():
    return validate()


def test_all_checks_pass(report):
    assert report["passed"]
    assert all(r["passed"] for r in report["checks"].values())


def test_transversality_records_logical_actions(report):
    gates = report["checks"]["transversality"]["gates"]
    assert set(gates) == {"X", "Z", "SH", *K_LABELS}
    L = np.array([[complex(*z) for z in row] for row in gates["SH"]["logical_action"]])
    assert L.shape == (2, 2)
    assert report["checks"]["transversality"]["k_cubed_dev"] <= 1e-12


def test_corrupted_table_fails_one_check(swapped_table):
    result = validate(swapped_table)
    assert not result["passed"]
    failed = [k for k, v in result["checks"].items() if not v["passed"]]
    assert failed == ["syndrome_table"]
    assert len(result["checks"]["syndrome_table"]["problems"]) == 2


def test_corrupted_table_breaks_correction(swapped_table):
    assert not check_single_error_correction(n_states=2, table=swapped_table)["passed"]


def test_weight_two_row_flagged():
    table = dict(SYNDROME_TABLE)
    table[Syndrome.from_string("0001")] = PauliString.from_terms(5, "X0 X1")
    assert any("single-qubit" in p for p in check_syndrome_table(table)["problems"])
