from ._core import (
    ConfigError,
    Env,
    GeomError,
    Halfplane,
    VertexPolytope,
    clip_polygon,
    convex_combination,
    make_env,
    pad_vertices,
    softmax,
    train,
)

__all__ = [
    "ConfigError",
    "Env",
    "GeomError",
    "Halfplane",
    "VertexPolytope",
    "clip_polygon",
    "convex_combination",
    "make_env",
    "pad_vertices",
    "softmax",
    "train",
]
