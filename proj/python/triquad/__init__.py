"""Systems of three integral quadratic forms: certification, local counting,
exponential sums, fiber integrals and representation forecasts.

The heavy lifting lives in the compiled ``_triquad`` module; this package
turns its JSON payloads into plain dicts and its decimal strings into ints.
"""

import json as _json

try:
    from . import _triquad as _core
except ImportError:  # in-tree test runs put the compiled module on sys.path
    import _triquad as _core

InputError = _core.InputError
BudgetError = _core.BudgetError
System = _core.System

__version__ = _core.__version__


def load(source):
    """Build a :class:`System` from a dict or a JSON string."""
    if isinstance(source, dict):
        source = _json.dumps(source)
    return _core.load_system(source)


def random_certified_system(k, seed, tries=64):
    return _core.random_certified_system(k, seed, tries)


def certify(system, mode="fast"):
    """Nonsingularity certificate for the determinant form, as a dict."""
    return _json.loads(_core.certify(system, mode))


def classify(system, p, n, ext=2):
    """Classification of the prime p relative to the target triple n."""
    return _json.loads(_core.classify(system, p, list(n), ext))


def count(system, n, q):
    """Exact number of solutions of Q(x) = n over Z/q."""
    return int(_core.count(system, list(n), q))


def tsum(system, n, q):
    """Exact primitive exponential sum T(n; q) via the counting path."""
    return int(_core.tsum(system, list(n), q))


def sum_all(system, n, q):
    """Exact sum of the complete sums over all residues a mod q."""
    return int(_core.sum_all(system, list(n), q))


def singular_series(system, n, qmax=60):
    return _core.singular_series(system, list(n), qmax)


def jint(system, mu, R=32.0, C=1.0):
    """Truncated fiber integral J(mu; R) for the radial weight."""
    return _core.jint(system, list(mu), R, C)


def predict(system, n, B, qmax=60, R=32.0, C=1.0):
    """Main-term forecast for the weighted representation count, as a dict."""
    return _json.loads(_core.predict(system, list(n), B, qmax, R, C))


def count_reps(system, B, C=1.0):
    """Weighted census of represented triples, as a dict."""
    return _json.loads(_core.count_reps(system, B, C))


__all__ = [
    "BudgetError",
    "InputError",
    "System",
    "certify",
    "classify",
    "count",
    "count_reps",
    "jint",
    "load",
    "predict",
    "random_certified_system",
    "singular_series",
    "sum_all",
    "tsum",
]
