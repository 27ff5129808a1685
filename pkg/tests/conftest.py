import numpy as np
import pytest

from qipf.kernel_field import KernelField

CRITERIA = []


def naive_ipf(query, points, sigma):
    """Direct summation, one Python-level exp per inducing point."""
    q = np.asarray(query, dtype=float)
    total = 0.0
    for y in np.asarray(points, dtype=float).reshape(len(points), -1):
        total += np.exp(-np.sum((y - q) ** 2) / (2 * sigma**2))
    return total / len(points)


def central_gradient(fn, x, h):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (fn(x + e) - fn(x - e)) / (2 * h)
    return g


def central_laplacian(fn, x, h):
    """Fourth-order five-point stencil, summed over coordinates."""
    x = np.asarray(x, dtype=float)
    f0 = fn(x)
    total = 0.0
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        total += (-fn(x + 2 * e) + 16 * fn(x + e) - 30 * f0 + 16 * fn(x - e) - fn(x - 2 * e)) / (12 * h * h)
    return total


def random_field(rng, d, n=None, sigma=None):
    n = n or int(rng.integers(5, 40))
    pts = rng.normal(size=(n, d)) * rng.uniform(0.5, 2.0)
    sigma = sigma or float(rng.uniform(0.4, 1.5)) * np.sqrt(d)
    return KernelField(pts, sigma)


def query_near(rng, field, scale=1.0):
    i = rng.integers(field.n_points)
    return field.points[i] + scale * field.sigma * rng.normal(size=field.dim)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None and (report.when == "call" or (report.when == "setup" and report.failed)):
        number, title = marker.args
        status = "PASS" if report.passed else "FAIL"
        line = f"criterion {number:>2} {status}  {title}"
        CRITERIA.append(line)
    return report


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)


def pairwise_auc(scores, errors):
    """P(score_error > score_correct) + 0.5 P(tie), by enumerating all pairs."""
    pos = [s for s, e in zip(scores, errors) if e]
    neg = [s for s, e in zip(scores, errors) if not e]
    total = 0.0
    for a in pos:
        for b in neg:
            total += 1.0 if a > b else 0.5 if a == b else 0.0
    return total / (len(pos) * len(neg))


def threshold_ap(scores, errors):
    """Average precision by testing every distinct score as a threshold."""
    scores = np.asarray(scores, dtype=float)
    errors = np.asarray(errors, dtype=int)
    n_pos = errors.sum()
    ap, prev_recall = 0.0, 0.0
    for t in sorted(set(scores.tolist()), reverse=True):
        flagged = scores >= t
        tp = int(np.sum(errors[flagged]))
        recall = tp / n_pos
        ap += (recall - prev_recall) * tp / int(flagged.sum())
        prev_recall = recall
    return ap
