"""lithocheck: batch lithography-friendliness verification for standard cells.

Library-first package: the geometry kernel, layout model, pattern matcher,
scenario generators, router, metrics and report renderer are all importable
on their own; the ``lithocheck`` command line drives the full flow.
"""

from .geometry import (
    ALL_ORIENTATIONS,
    BoolOp,
    Orientation,
    Rect,
    RectSet,
    Transform,
    boolean,
    canonicalize,
    clip,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_ORIENTATIONS",
    "BoolOp",
    "Orientation",
    "Rect",
    "RectSet",
    "Transform",
    "boolean",
    "canonicalize",
    "clip",
    "__version__",
]
