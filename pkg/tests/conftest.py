import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from implicert import model as m

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def exprs(d: int, max_leaves: int = 8):
    """Random DSL expression trees over ``d`` features (tables only for small d)."""
    leaves = st.one_of(
        st.sampled_from([-1, 1]).map(m.Const),
        st.integers(0, d - 1).map(m.Var),
    )
    if d <= 6:
        leaves = leaves | st.integers(0, (1 << (1 << d)) - 1).map(m.Table)

    def extend(children):
        args = st.lists(children, min_size=1, max_size=3).map(tuple)
        return st.one_of(
            children.map(m.Not),
            args.map(m.And),
            args.map(m.Or),
            args.map(m.Xor),
            st.tuples(children, children, children).map(m.Maj),
            st.builds(m.Tree, st.integers(0, d - 1), children, children),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves).map(lambda root: m.ModelExpr(root, d))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, passed: bool, detail: str) -> None:
        line = f"acceptance {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
