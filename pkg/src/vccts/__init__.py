"""Workbench for a located, value-passing process calculus with true-concurrency
semantics, a toy concurrent language compiled into it, and relaxed-memory
rewrite systems."""

__version__ = "0.1.0"


def clear_caches() -> None:
    """Drop the memo tables of the step relations and canonical forms.

    Long runs fill them with millions of small objects; clearing them before
    interpreter shutdown is much faster than letting finalisation do it.
    """
    import gc
    import sys

    for name, mod in list(sys.modules.items()):
        if name == __name__ or name.startswith(__name__ + "."):
            for value in list(vars(mod).values()):
                if callable(getattr(value, "cache_clear", None)):
                    value.cache_clear()
    gc.collect()
