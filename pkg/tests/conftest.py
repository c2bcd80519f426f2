import pytest

from dwellcert.benchmarks import run_suite


@pytest.fixture(scope="session")
def suite_rows():
    """Run each reference suite at most once per test session."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = run_suite(name)
        return cache[name]

    return get


def row_by_name(rows, fragment):
    hits = [r for r in rows if fragment in r.name]
    assert len(hits) == 1, f"{fragment!r} matched {len(hits)} rows"
    return hits[0]
