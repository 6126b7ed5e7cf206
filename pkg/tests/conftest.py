import itertools

import pytest

from tempora import allen


def concrete_intervals(hi):
    return [(s, e) for s, e in itertools.combinations(range(hi), 2)]


def _relation_by_endpoints(a, b):
    # written independently of the library: direct endpoint comparisons
    (s1, e1), (s2, e2) = a, b
    if e1 < s2:
        return "before"
    if e2 < s1:
        return "after"
    if e1 == s2:
        return "meets"
    if e2 == s1:
        return "met-by"
    if s1 == s2 and e1 == e2:
        return "equals"
    if s1 == s2:
        return "starts" if e1 < e2 else "started-by"
    if e1 == e2:
        return "finishes" if s1 > s2 else "finished-by"
    if s2 < s1 and e1 < e2:
        return "during"
    if s1 < s2 and e2 < e1:
        return "contains"
    return "overlaps" if s1 < s2 else "overlapped-by"


@pytest.fixture(scope="session")
def relation_oracle():
    return _relation_by_endpoints


@pytest.fixture(scope="session")
def composition_oracle():
    """Composition table by brute force over integer intervals with endpoints in 0..7."""
    ivs = concrete_intervals(8)
    table = {}
    for a in ivs:
        for b in ivs:
            r1 = _relation_by_endpoints(a, b)
            for c in ivs:
                key = (r1, _relation_by_endpoints(b, c))
                table.setdefault(key, set()).add(_relation_by_endpoints(a, c))
    return {(allen.INDEX[x], allen.INDEX[y]): allen.from_names(v) for (x, y), v in table.items()}


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records one acceptance line and prints it."""

    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[n] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
