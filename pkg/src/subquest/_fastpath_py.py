"""Pure-Python kernels; `subquest._fastpath` is the compiled twin.

Both modules expose the same two functions and must stay behaviorally
identical; the test suite compares them when the extension is built.
"""

BACKEND = "python"


def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute edit distance."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    curr = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        curr[0] = i
        ca = a[i - 1]
        for j in range(1, len(b) + 1):
            cost = 0 if ca == b[j - 1] else 1
            curr[j] = min(prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + cost)
        prev, curr = curr, prev
    return prev[len(b)]


def lcs_pairs(xs: list, ys: list) -> list:
    """Matched (i, j) index pairs of one longest common subsequence.
    Backtracking prefers deletions from `xs`, which keeps pairs stable for
    equal-length inputs."""
    m, n = len(xs), len(ys)
    if m == 0 or n == 0:
        return []
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        xi = xs[i - 1]
        row = table[i]
        prev_row = table[i - 1]
        for j in range(1, n + 1):
            if xi == ys[j - 1]:
                row[j] = prev_row[j - 1] + 1
            else:
                row[j] = prev_row[j] if prev_row[j] >= row[j - 1] else row[j - 1]
    pairs = []
    i, j = m, n
    while i > 0 and j > 0:
        if xs[i - 1] == ys[j - 1]:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif table[i - 1][j] >= table[i][j - 1]:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs
