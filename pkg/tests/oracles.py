"""Independent reference implementations the tests compare against.

None of these share code with the package: the LCS oracle enumerates
subsequences, the distance oracle delegates to networkx, and the trace-check
oracle is a literal truth table.
"""

from __future__ import annotations

from itertools import combinations, product

import networkx as nx


def subsequences(s: str) -> set[str]:
    out = set()
    for k in range(len(s) + 1):
        for idx in combinations(range(len(s)), k):
            out.add("".join(s[i] for i in idx))
    return out


def lcs_brute(a: str, b: str) -> int:
    """Length of the longest string that is a subsequence of both (exhaustive)."""
    common = subsequences(a) & subsequences(b)
    return max(len(s) for s in common)


class SubsequenceTable:
    """Exhaustive LCS oracle for every pair of strings over ``alphabet`` up to ``max_len``.

    Each string gets a bitmask over the universe of all strings (ordered by
    length) marking its subsequences; the LCS of two strings is the length of
    the highest set bit of the AND of their masks.
    """

    def __init__(self, alphabet: str, max_len: int):
        self.strings = ["".join(p) for n in range(max_len + 1) for p in product(alphabet, repeat=n)]
        index = {s: i for i, s in enumerate(self.strings)}
        self.lengths = [len(s) for s in self.strings]
        self.masks = []
        for s in self.strings:
            m = 0
            for sub in subsequences(s):
                m |= 1 << index[sub]
            self.masks.append(m)

    def lcs(self, i: int, j: int) -> int:
        return self.lengths[(self.masks[i] & self.masks[j]).bit_length() - 1]


def distances_oracle(adjacency: dict, targets: set) -> dict:
    """Shortest 0/1-weighted distance from every node to any target (networkx Dijkstra).

    ``adjacency`` maps node -> list of (successor, cost).
    """
    g = nx.DiGraph()
    for src, outs in adjacency.items():
        g.add_node(src)
        for dst, cost in outs:
            g.add_edge(src, dst, weight=cost)
    for t in targets:
        g.add_node(t)
    rev = g.reverse(copy=True)
    present = [t for t in targets if t in rev]
    if not present:
        return {}
    return dict(nx.multi_source_dijkstra_path_length(rev, present, weight="weight"))


# (d_i > 0, d_d > 0, d_ti > 0, d_td > 0) -> rejected?
# written out by hand: reject when insertions were inferred but no tainted op inserted,
# or deletions were inferred but no tainted op deleted
TRACE_CHECK_TABLE = {
    (False, False, False, False): False,
    (False, False, False, True): False,
    (False, False, True, False): False,
    (False, False, True, True): False,
    (False, True, False, False): True,
    (False, True, False, True): False,
    (False, True, True, False): True,
    (False, True, True, True): False,
    (True, False, False, False): True,
    (True, False, False, True): True,
    (True, False, True, False): False,
    (True, False, True, True): False,
    (True, True, False, False): True,
    (True, True, False, True): True,
    (True, True, True, False): True,
    (True, True, True, True): False,
}
