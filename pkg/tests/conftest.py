import numpy as np
import pytest
from hypothesis import strategies as st

from pantostar import validate

HARMONIC = dict(m=3, q=2.0, T=[1.0, 3.0, 3.0], a=[0, 0, 0], b=[0, 0, 0], c=[0, 0, 0],
                alpha=[1.0, 0.5, 0.5], y0=1.0)
NEUTRAL = dict(m=3, q=2.0, T=[1.0, 3.0, 4.0], a=[0.3, 0.2, 0.1], b=[1.0, 0.0, 1.0],
               c=[0.5, 0.5, 0.0], alpha=[1.0, 0.5, 0.5], y0=1.0)
RETARDED = dict(NEUTRAL, a=[0.0, 0.0, 0.0])
# non-dyadic q, two edges, negative coefficients
SKEWED = dict(m=2, q=3.0, T=[1.3, 3.1], a=[-0.4, 0.5], b=[0.2, -1.0], c=[1.0, 0.3],
              alpha=[1.0, 1.0], y0=-0.7)
BOUNDARY = dict(m=3, q=4.0, T=[1.0, 4.0, 5.0], a=[0.5, 0.0, 0.0], b=[1.0, 0.0, 1.0],
                c=[0.5, 0.5, 0.0], alpha=[1.0, 0.5, 0.5], y0=1.0)


@pytest.fixture
def harmonic():
    return validate(HARMONIC)


@pytest.fixture
def neutral():
    return validate(NEUTRAL)


@pytest.fixture
def retarded():
    return validate(RETARDED)


@pytest.fixture
def skewed():
    return validate(SKEWED)


@st.composite
def star_systems(draw, guaranteed=True):
    m = draw(st.integers(2, 4))
    q = draw(st.floats(1.2, 3.0))
    T1 = draw(st.floats(0.5, 2.0))
    T = [T1] + [(q - 1.0) * T1 + draw(st.floats(0.2, 3.0)) for _ in range(m - 1)]
    coef = st.floats(-1.0, 1.0)
    a = [draw(coef) for _ in range(m)]
    crit = q ** -0.5
    if guaranteed:
        # stay clear of the critical |a_1| and keep some outgoing a_j nonzero
        if abs(abs(a[0]) - crit) < 0.1:
            a[0] = 0.0
        if all(abs(v) < 0.05 for v in a[1:]):
            a[1] = 0.5
    raw = dict(m=m, q=q, T=T, a=a, b=[draw(coef) for _ in range(m)],
               c=[draw(coef) for _ in range(m)],
               alpha=[draw(st.floats(0.2, 2.0)) for _ in range(m)],
               y0=draw(st.floats(-2.0, 2.0).filter(lambda v: abs(v) > 0.1)))
    return validate(raw)


def random_graph_function(mesh, rng, vertex=True):
    from pantostar import GraphFunction
    vals = [rng.standard_normal(x.size) for x in mesh.nodes]
    if vertex:
        for v in vals[1:]:
            v[0] = vals[0][-1]
    return GraphFunction(mesh, tuple(vals))


# --- acceptance reporting ---------------------------------------------------

_AC_RESULTS = pytest.StashKey[dict]()
_AC_DETAIL = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label, title): numbered acceptance criterion")
    config.stash[_AC_RESULTS] = {}


@pytest.fixture
def measured(request):
    """Dict of measured values shown next to the criterion's pass/fail line."""
    detail = {}
    request.node.stash[_AC_DETAIL] = detail
    return detail


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    label, title = marker.args
    detail = item.stash.get(_AC_DETAIL, {})
    item.config.stash[_AC_RESULTS][label] = (title, rep.passed, dict(detail))


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_AC_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(results, key=lambda s: int(s[2:])):
        title, passed, detail = results[label]
        extra = ", ".join(f"{k}={v}" for k, v in detail.items())
        terminalreporter.write_line(f"{label} {'PASS' if passed else 'FAIL'} {title}  {extra}".rstrip())
