"""Maximum-weight bipartite assignment with a deterministic tie-break.

The solver is the shortest-augmenting-path form of the Hungarian method
(O(k^3)) on integer weights.  Its dual potentials describe every optimal
assignment at once: a perfect matching is optimal exactly when it only uses
edges that are tight under the final potentials.  Among those, the
lexicographically smallest one (row by row, smallest column first, dummy
columns last) is then picked by alternating-path exchanges.
"""

from __future__ import annotations

from collections import deque
from typing import Optional, Sequence

_INF = float("inf")


def _hungarian_min(cost: Sequence[Sequence[int]]) -> tuple[list[int], list[int], list[int]]:
    """Solve a square min-cost assignment.

    Returns ``(row_to_col, u, v)`` with ``u[i] + v[j] <= cost[i][j]`` for
    every cell and equality on the assigned cells.
    """
    n = len(cost)
    # 1-based internals; index 0 is the virtual source column
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    owner = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = [_INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = owner[j0]
            row = cost[i0 - 1]
            ui0 = u[i0]
            delta = _INF
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[owner[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while True:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
            if j0 == 0:
                break

    row_to_col = [0] * n
    for j in range(1, n + 1):
        row_to_col[owner[j] - 1] = j - 1
    return row_to_col, [int(x) for x in u[1:]], [int(x) for x in v[1:]]


def max_weight_assignment(weights: Sequence[Sequence[int]]) -> list[Optional[int]]:
    """Return the lexicographically smallest maximum-weight assignment.

    ``weights`` is an R x C matrix of non-negative integers.  The result maps
    each row to a column, or to ``None`` when the row stays unmatched (only
    possible when R > C).  Exactly ``min(R, C)`` rows are matched.  Ties
    between optimal assignments are broken by scanning rows in order and
    giving each the smallest column that still admits an optimal completion.
    """
    n_rows = len(weights)
    n_cols = len(weights[0]) if n_rows else 0
    if n_rows == 0 or n_cols == 0:
        return [None] * n_rows
    k = max(n_rows, n_cols)
    cost = [[0] * k for _ in range(k)]
    for i in range(n_rows):
        wi = weights[i]
        if len(wi) != n_cols:
            raise ValueError("weights must be rectangular")
        for j in range(n_cols):
            if wi[j] < 0:
                raise ValueError("weights must be non-negative")
            cost[i][j] = -wi[j]

    row_to_col, u, v = _hungarian_min(cost)
    tight = [[j for j in range(k) if u[i] + v[j] == cost[i][j]] for i in range(k)]
    match_row: list[Optional[int]] = list(row_to_col)
    match_col: list[Optional[int]] = [None] * k
    for i, j in enumerate(row_to_col):
        match_col[j] = i

    fixed = [False] * k
    for i in range(n_rows):
        for c in tight[i]:  # ascending; padding columns come last
            if match_row[i] == c:
                break
            r = match_col[c]
            if fixed[r]:
                continue
            if _exchange(i, c, r, tight, match_row, match_col, fixed):
                break
        fixed[i] = True

    return [c if c is not None and c < n_cols else None for c in match_row[:n_rows]]


def _exchange(i, c, r, tight, match_row, match_col, fixed) -> bool:
    """Try to move row ``i`` onto column ``c`` (currently held by row ``r``).

    Succeeds when row ``r`` can reach ``i``'s old column through an
    alternating path of tight edges that avoids fixed rows and column ``c``.
    """
    c0 = match_row[i]
    parent: dict[int, int] = {}
    queue = deque([r])
    found = False
    while queue and not found:
        x = queue.popleft()
        for y in tight[x]:
            if y == c or y in parent:
                continue
            if y == c0:
                parent[y] = x
                found = True
                break
            owner = match_col[y]
            if owner == x or owner == i or fixed[owner]:
                continue
            parent[y] = x
            queue.append(owner)
    if not found:
        return False

    match_row[i] = c
    match_col[c] = i
    y = c0
    while True:
        x = parent[y]
        prev = match_row[x] if x != r else None
        match_row[x] = y
        match_col[y] = x
        if x == r:
            break
        y = prev
    return True
