"""Python bindings for the DiffFake core library."""

from ._core import (
    GmmModel,
    auc,
    blend,
    combine,
    fit_gmm,
    load_model,
    make_blend_mask,
    read_embeddings,
    toy_extract,
    write_embeddings,
)

__all__ = [
    "GmmModel",
    "auc",
    "blend",
    "combine",
    "fit_gmm",
    "load_model",
    "make_blend_mask",
    "read_embeddings",
    "toy_extract",
    "write_embeddings",
]
