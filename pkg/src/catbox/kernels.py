"""Backend selection for the search kernel.

The compiled ``_core`` extension is used when it was built; otherwise the
pure-Python ``_fallback`` twin, which explores the same nodes in the same
order.  ``CATBOX_BACKEND`` is deliberately not consulted: switch with
``use_backend``.
"""
from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

_active = _core if _core is not None else _fallback


def available() -> list[str]:
    return ["cython", "python"] if _core is not None else ["python"]


def backend_name() -> str:
    return "cython" if _active is _core and _core is not None else "python"


def use_backend(name: str) -> None:
    global _active
    if name == "python":
        _active = _fallback
    elif name == "cython":
        if _core is None:
            raise RuntimeError("compiled kernel is not built; run pip install -e .")
        _active = _core
    else:
        raise ValueError(f"unknown backend {name!r}")


def dfs_search(*args, **kwargs):
    return _active.dfs_search(*args, **kwargs)


def get(name: str):
    """The ``dfs_search`` function of a named backend."""
    if name == "python":
        return _fallback.dfs_search
    if name == "cython" and _core is not None:
        return _core.dfs_search
    raise ValueError(f"backend {name!r} not available")
