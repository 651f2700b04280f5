"""Acceptance gate: every criterion at its stated tolerance, one test each."""

import pytest

from hesscone import acceptance


@pytest.mark.parametrize("name,fn", acceptance.CRITERIA,
                         ids=[n for n, _ in acceptance.CRITERIA])
def test_criterion(name, fn):
    ok, detail = fn(tol_override=None)
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_suite_is_complete():
    names = [n for n, _ in acceptance.CRITERIA]
    assert len(names) == 11
    assert names == sorted(names, key=lambda s: int(s.split("-")[0]))
