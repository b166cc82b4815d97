import logging

import numpy as np
import torch

from torch_bmst.errors import DisconnectedGraphError
from torch_bmst.geometry.grid import UniformGrid
from torch_bmst.geometry.metrics import MAX_CHUNK_ENTRIES, MetricKind, coordinate_differences
from torch_bmst.mst.union_find import UnionFind

logger = logging.getLogger(__name__)


def _nearest_outside(points, queries, grid, comp, comp_upper, metric):
    """
    For every query vertex, the nearest point of `grid` lying in another component.

    Blocks of (2r + 1)^d cells around the query cell are scanned with r = 1, 2, 4, ...
    A point outside the block is farther than r * cell_side, so a query is settled once its
    best distance is below that reach, or once the reach exceeds the best distance already
    known for its component (nothing farther can improve the component's choice).
    """
    A = queries.shape[0]
    best_d = torch.full((A,), torch.inf, dtype=points.dtype, device=points.device)
    best_p = torch.full((A,), -1, dtype=torch.long, device=points.device)
    query_cells = grid.cell_of(points[queries])
    n_target = grid.indices.shape[0]
    no_index = points.shape[0]

    active = torch.arange(A, device=points.device)
    radius = 1
    while active.numel() > 0:
        scan_all = grid.covers_all(radius)
        width = n_target if scan_all else grid.offsets(radius).shape[0] * grid.max_occupancy
        chunk = max(1, MAX_CHUNK_ENTRIES // max(1, width * points.shape[-1]))
        for start in range(0, active.numel(), chunk):
            rows = active[start:start + chunk]
            qv = queries[rows]
            if scan_all:
                cand = grid.all_indices().unsqueeze(0).expand(rows.numel(), -1)
            else:
                cand = grid.candidates(query_cells[rows], radius)
            safe = cand.clamp(min=0)
            valid = (cand >= 0) & (comp[safe] != comp[qv].unsqueeze(1))
            diff = coordinate_differences(metric, points[safe], points[qv].unsqueeze(1))
            dd = diff.pow(2).sum(-1).sqrt()
            dd = torch.where(valid, dd, torch.full_like(dd, torch.inf))
            m = dd.min(dim=1).values
            tie = valid & (dd == m.unsqueeze(1))
            partner = torch.where(tie, cand, torch.full_like(cand, no_index)).min(dim=1).values
            best_d[rows] = m
            best_p[rows] = torch.where(torch.isfinite(m), partner, torch.full_like(partner, -1))

        comp_upper.scatter_reduce_(0, comp[queries[active]], best_d[active], reduce='amin')
        if scan_all:
            break
        reach = radius * grid.cell_side
        settled = (best_d[active] < reach) | (comp_upper[comp[queries[active]]] <= reach)
        active = active[~settled]
        radius *= 2
    return best_d, best_p


def grid_boruvka(points, metric=MetricKind.UNIT_CUBE, is_red=None, points_per_cell=2.0):
    """
    Exact MST of the complete (bipartite if is_red is given) geometric graph by Boruvka rounds.
    Nearest-outside-component queries go through uniform grids, so the full edge set is never built.
    :return: tree edges as an (n - 1, 2) int64 array of (lo, hi) vertex pairs
    """
    metric = MetricKind.parse(metric)
    n = points.shape[0]
    device = points.device
    if is_red is None:
        everyone = torch.arange(n, device=device)
        searches = [(everyone, UniformGrid.for_density(points, metric, points_per_cell, indices=everyone))]
    else:
        is_red = torch.as_tensor(is_red, dtype=torch.bool, device=device)
        red = torch.nonzero(is_red).flatten()
        blue = torch.nonzero(~is_red).flatten()
        red_grid = UniformGrid.for_density(points[red], metric, points_per_cell, indices=red)
        blue_grid = UniformGrid.for_density(points[blue], metric, points_per_cell, indices=blue)
        searches = [(red, blue_grid), (blue, red_grid)]

    uf = UnionFind(n)
    edges = []
    rounds = 0
    while uf.count > 1:
        rounds += 1
        comp = torch.from_numpy(uf.roots()).to(device)
        best_d = torch.full((n,), torch.inf, dtype=points.dtype, device=device)
        best_p = torch.full((n,), -1, dtype=torch.long, device=device)
        comp_upper = torch.full((n,), torch.inf, dtype=points.dtype, device=device)
        for queries, grid in searches:
            d_q, p_q = _nearest_outside(points, queries, grid, comp, comp_upper, metric)
            best_d[queries] = d_q
            best_p[queries] = p_q

        # per component: the lightest outgoing edge, ties by lowest vertex index
        comp_min = torch.full((n,), torch.inf, dtype=points.dtype, device=device)
        comp_min.scatter_reduce_(0, comp, best_d, reduce='amin')
        is_best = torch.isfinite(best_d) & (best_d == comp_min[comp])
        vertex = torch.where(is_best, torch.arange(n, device=device), torch.full((n,), n, device=device))
        chosen = torch.full((n,), n, dtype=torch.long, device=device)
        chosen.scatter_reduce_(0, comp, vertex, reduce='amin')
        chosen = chosen[chosen < n]

        u = chosen.cpu().numpy()
        v = best_p[chosen].cpu().numpy()
        w = best_d[chosen].cpu().numpy()
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        added = 0
        for e in np.lexsort((hi, lo, w)):
            if uf.union(int(lo[e]), int(hi[e])):
                edges.append((int(lo[e]), int(hi[e])))
                added += 1
        if added == 0:
            roots = uf.roots()
            raise DisconnectedGraphError(0, int(np.nonzero(roots != roots[0])[0][0]))
        logger.debug(f'Boruvka round {rounds}: added {added} edges, {uf.count} components left')

    return np.asarray(edges, dtype=np.int64).reshape(-1, 2)
