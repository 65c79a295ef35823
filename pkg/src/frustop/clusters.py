"""Connected clusters of cells that touch at a lattice point."""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .lattice import CellComplex


def point_clusters(complex: CellComplex, k: int, mask: np.ndarray) -> np.ndarray:
    """Label selected k-cells by cluster; two cells are joined when they share a site.

    Unselected cells get label -1.  Labels are numbered in order of the
    lowest cell index in each cluster.
    """
    mask = np.asarray(mask, dtype=bool)
    labels = np.full(complex.counts[k], -1, dtype=np.int64)
    chosen = np.flatnonzero(mask)
    if len(chosen) == 0:
        return labels
    corners = complex.cell_vertices(k)[chosen]
    n_cells, n_sites = len(chosen), complex.n_sites
    rows = np.repeat(np.arange(n_cells), corners.shape[1])
    cols = n_cells + corners.ravel()
    size = n_cells + n_sites
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
    _, comp = connected_components(graph, directed=False)
    comp = comp[:n_cells]
    # renumber so cluster ids follow first appearance
    _, first = np.unique(comp, return_index=True)
    order = np.argsort(first)
    remap = np.empty(len(order), dtype=np.int64)
    remap[np.unique(comp)[order]] = np.arange(len(order))
    labels[chosen] = remap[comp]
    return labels


def cluster_sizes(labels: np.ndarray) -> np.ndarray:
    valid = labels[labels >= 0]
    if len(valid) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.bincount(valid)


def group(labels: np.ndarray) -> list[np.ndarray]:
    """Cell indices per cluster, in label order."""
    sizes = cluster_sizes(labels)
    order = np.argsort(labels, kind="stable")
    order = order[labels[order] >= 0]
    return np.split(order, np.cumsum(sizes)[:-1]) if len(sizes) else []
