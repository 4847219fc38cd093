"""Acceptance gate: every check from the verification suite must pass at
its stated tolerance.  Each test prints one [PASS]/[FAIL] line with the
measured error (run pytest with -s or look at captured output)."""

import pytest

from levylab import acceptance


def _run(name):
    result = acceptance.CHECKS[name]()
    print(result.line)
    assert result.passed, result.line


def test_symbol_stable():
    _run("symbol-stable")


def test_route_equivalence():
    _run("route-equivalence")


def test_kernel_cauchy():
    _run("kernel-cauchy")


def test_max_principle():
    _run("max-principle")


def test_regularity_stability():
    _run("regularity-stability")


def test_riesz():
    _run("riesz")


def test_semigroup_decay():
    _run("semigroup-decay")


def test_feynman_kac():
    _run("feynman-kac")


def test_sampling_law():
    _run("sampling-law")


def test_krylov():
    _run("krylov")


def test_burgers():
    _run("burgers")


def test_hamilton_jacobi():
    _run("hamilton-jacobi")


def test_suite_is_complete():
    assert len(acceptance.CHECKS) == 12
