"""Pure numpy provisioning kernels (fallback for the compiled ``_ckernels``).

Routing tables are CSR-style: pair ``k`` owns candidate paths
``pair_ptr[k]:pair_ptr[k+1]``; path ``q`` crosses the intermediate islands
``nodes[node_ptr[q]:node_ptr[q+1]]``. ``pair_ids`` maps local pairs to rows of
``demand`` and ``choice``.
"""

import numpy as np


def path_volumes(pce, demand, choice, multipath, pair_ids, pair_ptr, node_ptr, nodes):
    n_pairs = len(pair_ptr) - 1
    n_paths = len(node_ptr) - 1
    if n_paths == 0:
        return np.zeros(0)
    path_of_entry = np.repeat(np.arange(n_paths), np.diff(node_ptr))
    blocked = np.bincount(path_of_entry, weights=(pce[nodes] == 0), minlength=n_paths)
    full = blocked == 0
    pair_of_path = np.repeat(np.arange(n_pairs), np.diff(pair_ptr))
    has_full = np.bincount(pair_of_path, weights=full, minlength=n_pairs) > 0
    surv = full | ~has_full[pair_of_path]
    n_surv = np.bincount(pair_of_path, weights=surv, minlength=n_pairs)
    d = np.asarray(demand, dtype=float)[pair_ids]
    if multipath:
        share = np.divide(d, n_surv, out=np.zeros(n_pairs), where=n_surv > 0)
        return np.where(surv, share[pair_of_path], 0.0)
    # rank of each survivor within its pair, 0-based
    csum = np.cumsum(surv)
    start = np.concatenate(([0], csum))[np.asarray(pair_ptr[:-1])]
    rank = csum - 1 - start[pair_of_path]
    pick = np.minimum(np.floor(np.asarray(choice)[pair_ids] * n_surv), n_surv - 1)
    hit = surv & (rank == pick[pair_of_path])
    return np.where(hit, d[pair_of_path], 0.0)


def island_loads(vol, node_ptr, nodes, n):
    path_of_entry = np.repeat(np.arange(len(node_ptr) - 1), np.diff(node_ptr))
    return np.bincount(nodes, weights=vol[path_of_entry], minlength=n).astype(float)


def load_at(i, pce, demand, choice, multipath, pair_ids, pair_ptr, node_ptr, nodes):
    vol = path_volumes(pce, demand, choice, multipath, pair_ids, pair_ptr, node_ptr, nodes)
    if len(vol) == 0:
        return 0.0
    path_of_entry = np.repeat(np.arange(len(node_ptr) - 1), np.diff(node_ptr))
    through = np.bincount(path_of_entry, weights=(nodes == i), minlength=len(vol)) > 0
    return float(vol[through].sum())


def load_at_batch(i, pce_rows, demand, choice, multipath, pair_ids, pair_ptr, node_ptr, nodes):
    return np.array(
        [
            load_at(i, row, demand, choice, multipath, pair_ids, pair_ptr, node_ptr, nodes)
            for row in pce_rows
        ]
    )
