import math
from fractions import Fraction

import numpy as np
import pytest

from fastmm.analysis import (
    count_model,
    error_profile,
    level_additions,
    random_operands,
    relative_error,
    workspace_model,
)
from fastmm.catalog import builtin, classical_triple, parse_chain
from fastmm.core import IndivisibleSizeError
from fastmm.executor import recursive_multiply


def test_counts_small(strassen):
    assert count_model([strassen], 2).base_multiplies == 7
    assert count_model([strassen] * 2, 4).base_multiplies == 49


def test_strassen_level_additions(strassen):
    assert (strassen.nnz("U"), strassen.nnz("V"), strassen.nnz("W")) == (14, 14, 12)
    assert level_additions(strassen) == 22
    assert count_model([strassen], 2).block_adds == 22


def test_classical_level_additions():
    # every output sums p products: p*p*(p-1) additions
    for p in (2, 3):
        assert level_additions(classical_triple(p)) == p * p * (p - 1)


@pytest.mark.parametrize("k", range(1, 7))
def test_speedup_is_power_of_8_over_7(strassen, k):
    assert count_model([strassen] * k, 2 ** k).speedup_vs_classical == Fraction(8, 7) ** k


@pytest.mark.parametrize("chain, n", [
    ("2", 6), ("3", 6), ("2,3", 6), ("3,2", 12), ("2,2", 16), ("2,2,3", 24), ("3,3", 18),
    ("classical-p2,2", 8), ("classical-p3,3", 18), ("2,2,2", 40), ("2,3", 48),
])
def test_model_matches_executor(chain, n):
    c = parse_chain(chain)
    A = np.ones((n, n))
    _, stats = recursive_multiply(c, A, A, cutoff=1)
    report = count_model(c, n, cutoff=1)
    assert report.base_multiplies == stats.base_multiplies
    assert report.block_multiplies == stats.block_multiplies
    assert report.block_adds == stats.block_adds
    assert report.element_adds == stats.element_adds
    assert report.scalings == stats.scalings
    assert report.workspace_elements == stats.peak_workspace_elements


def test_model_with_cutoff(strassen):
    _, stats = recursive_multiply([strassen] * 4, np.ones((64, 64)), np.ones((64, 64)), cutoff=16)
    report = count_model([strassen] * 4, 64, cutoff=16)
    assert report.base_multiplies == stats.base_multiplies == 49 * 16 ** 3
    assert report.workspace_elements == stats.peak_workspace_elements


def test_base_multiplies_law():
    for chain, n in [("2,3", 12), ("3,3,2", 36), ("2,2,2", 8)]:
        c = parse_chain(chain)
        expected = n ** 3 * math.prod(Fraction(t.rank, t.p ** 3) for t in c)
        assert count_model(c, n).base_multiplies == expected


def test_workspace_goldens(strassen, laderman):
    assert workspace_model([strassen], 6) == 18
    assert workspace_model([laderman], 6) == 8
    assert workspace_model([strassen, laderman], 6) == 20
    assert workspace_model([strassen], 6, "product-major") == 27


@pytest.mark.parametrize("chain, n", [("2,2,2", 48), ("3,2,3", 36), ("2,3,3,2", 72)])
def test_fused_workspace_closed_form(chain, n):
    c = parse_chain(chain)
    total, m = 0, n
    for t in c:
        m //= t.p
        total += 2 * m * m
    assert workspace_model(c, n) == total


def test_classical_level_needs_no_operand_buffers(classical2):
    # only the finished product is held; it never overlaps a nested product
    assert workspace_model([classical2], 8) == 16
    assert workspace_model([classical2, builtin("strassen-p2")], 8) == 16


def test_model_errors(strassen, laderman):
    with pytest.raises(IndivisibleSizeError):
        count_model([strassen], 5)
    with pytest.raises(IndivisibleSizeError):
        workspace_model([strassen, laderman], 8)
    with pytest.raises(ValueError):
        workspace_model([strassen], 4, "lazy")


def test_csv_row(strassen):
    r = count_model([strassen], 2)
    assert r.csv_row().count(",") == r.CSV_HEADER.count(",")
    assert r.csv_row().endswith("1.142857")


def test_relative_error_form():
    C = np.array([[1.0, 3.0]])
    R = np.array([[0.0, 1.0]])
    assert relative_error(C, R).tolist() == [[1.0, 1.0]]


def test_integer_profiles_are_zero():
    for chain in ("2", "3", "2,2", "2,3", "3,2"):
        c = parse_chain(chain)
        n = math.prod(t.p for t in c) * 2
        assert error_profile(c, n, trials=3, seed=1, dist="integer") == (0.0, 0.0)


def test_empty_chain_profile_zero():
    assert error_profile([], 16, trials=4, seed=0) == (0.0, 0.0)


def test_profile_reproducible(strassen):
    a = error_profile([strassen] * 2, 32, trials=5, seed=9)
    b = error_profile([strassen] * 2, 32, trials=5, seed=9)
    assert a == b and a[0] > 0


def test_depth_monotone_median(strassen):
    one = error_profile([strassen], 64, trials=200, seed=42)
    two = error_profile([strassen] * 2, 64, trials=200, seed=42)
    assert two[1] >= one[1] > 0
    assert max(one[0], two[0]) <= 1e-10


def test_profile_bad_arguments(strassen):
    with pytest.raises(ValueError):
        error_profile([strassen], 4, trials=0, seed=0)
    with pytest.raises(ValueError):
        random_operands(np.random.default_rng(0), 4, "normal")
