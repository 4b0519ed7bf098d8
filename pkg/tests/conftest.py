import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "servesim",
    max_examples=int(os.environ.get("SERVESIM_HYPOTHESIS_EXAMPLES", "120")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("servesim")


@pytest.fixture
def tmp_out(tmp_path):
    return tmp_path / "out"


# acceptance reporting --------------------------------------------------------
# Each acceptance test files its checks here; the terminal summary then prints
# one PASS/FAIL line per criterion (a criterion passes only if all its checks do).

_ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def criterion():
    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        _ACCEPTANCE.setdefault(number, []).append((title, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}")
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        checks = _ACCEPTANCE[number]
        verdict = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        title = checks[0][0].split(" / ")[0]
        detail = "; ".join(f"{'ok' if ok else 'MISS'} {d}" for _, ok, d in checks)
        tr.write_line(f"{verdict} criterion {number:>2} {title}: {detail}")
