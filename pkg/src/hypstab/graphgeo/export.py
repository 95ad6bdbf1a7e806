"""CSV export of a node field."""

import numpy as np

from ..io import write_csv

__all__ = ["field_header", "field_rows", "export_field_csv"]


def field_header(n):
    return ([f"x{i + 1}" for i in range(n)] + ["W", "S1", "S2", "S3"]
            + [f"lambda_{i + 1}" for i in range(n)])


def field_rows(field, mask=None):
    """One row per valid node (``mask`` restricts further), in lattice order."""
    n = field.n
    keep = field["valid"] if mask is None else field["valid"] & mask
    x = field["x"][keep]
    S = field["S"][keep]
    S3 = S[:, 3] if S.shape[1] > 3 else np.zeros(len(S))
    cols = [x, field["W"][keep][:, None], S[:, 1:3], S3[:, None], field["lam"][keep]]
    return np.concatenate(cols, axis=1)


def export_field_csv(field, path, mask=None):
    write_csv(path, field_header(field.n), field_rows(field, mask))
