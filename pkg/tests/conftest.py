CRITERIA = {
    "test_c01_identity": "C1 boundary identity",
    "test_c02_lemma_a": "C2 index minimality",
    "test_c03_rauch": "C3 Rauch norm comparison",
    "test_c04_inequality_chain": "C4 inequality chain",
    "test_c05_theorem_d": "C5 determinant comparison",
    "test_c06_focal_detection": "C6 focal detection",
    "test_c07_quadrilateral": "C7 quadrilateral",
    "test_c08_corollary_c": "C8 variation speed",
    "test_c09_corollary_e": "C9 volume comparison",
    "test_c10_cli": "C10 command line",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criteria with runtime budgets")


def pytest_runtest_logreport(report):
    name = report.nodeid.split("::")[-1]
    if name not in CRITERIA:
        return
    if report.failed or (report.when == "call" and name not in _outcomes):
        _outcomes[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, label in CRITERIA.items():
        if name in _outcomes:
            terminalreporter.write_line(f"{_outcomes[name]}  {label}")
