import pytest

from scriptfidelity.corpus import load_fixture_matrix
from scriptfidelity.scripts import builtin_registry


@pytest.fixture(scope="session")
def registry():
    return builtin_registry()


@pytest.fixture(scope="session")
def fixture_matrix():
    return load_fixture_matrix()


@pytest.fixture
def write_jsonl(tmp_path):
    import json

    def _write(rows, name="corpus.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        return path

    return _write


# one PASS/FAIL line per acceptance criterion in the terminal summary
_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    number = getattr(item.function, "criterion", None)
    if number is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _criteria[number] = (item.function.__doc__.strip().splitlines()[0], rep.passed,
                             rep.longrepr)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, passed, longrepr = _criteria[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {title}")
        if not passed and longrepr is not None:
            msg = getattr(getattr(longrepr, "reprcrash", None), "message", "")
            if msg:
                terminalreporter.write_line(f"               {msg.splitlines()[0]}")
