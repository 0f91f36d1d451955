"""Binary linear block codes under test: construction, encoding, small-code utilities.

Codes are immutable after construction and carry whichever optional
structure their decoders need: an explicit codebook (exhaustive ML), a
trellis (Viterbi), or a sparse parity-check description (message passing).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

MAX_CODEBOOK_K = 16


class AlistParseError(ValueError):
    """Malformed alist text; message carries the offending line number."""


@dataclass(eq=False)
class Trellis:
    """Feedforward convolutional encoder state machine.

    next_state[s, b] and out_bits[s, b] give the successor state and the
    polynomial output bits (packed little-endian into one int) when input
    bit b is shifted into state s.
    """

    num_states: int
    num_polys: int
    next_state: np.ndarray
    out_bits: np.ndarray
    info_len: int
    constraint_length: int


@dataclass(eq=False)
class AlistMatrix:
    """Sparse binary matrix in MacKay alist convention (row/column adjacency)."""

    n_cols: int
    n_rows: int
    col_lists: list[np.ndarray]
    row_lists: list[np.ndarray]

    @property
    def max_col_deg(self) -> int:
        return max((len(c) for c in self.col_lists), default=0)

    @property
    def max_row_deg(self) -> int:
        return max((len(r) for r in self.row_lists), default=0)

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        for j, rows in enumerate(self.col_lists):
            h[rows, j] = 1
        return h


@dataclass(eq=False)
class LinearBlockCode:
    """A binary (n, k) linear block code with a cached generator matrix.

    encode() maps k information bits to n code bits via c = u G (mod 2);
    the all-zero word always encodes to the all-zero codeword.
    """

    name: str
    n: int
    k: int
    generator: np.ndarray
    parity_check: np.ndarray | None = None
    trellis: Trellis | None = None
    codebook: np.ndarray | None = field(default=None, repr=False)
    _codebook_signs: np.ndarray | None = field(default=None, repr=False)
    _mp_graph: object = field(default=None, repr=False)

    @property
    def rate(self) -> float:
        return self.k / self.n

    def encode(self, info_bits) -> np.ndarray:
        u = np.asarray(info_bits, dtype=np.uint8)
        if u.shape != (self.k,):
            raise ValueError(f"expected {self.k} information bits, got shape {u.shape}")
        return (u @ self.generator) % 2

    def codebook_signs(self) -> np.ndarray:
        """(2^k, n) matrix of +-1 symbol signs, row index = info word as integer."""
        if self.codebook is None:
            raise ValueError(f"code {self.name!r} has no explicit codebook")
        if self._codebook_signs is None:
            self._codebook_signs = 1.0 - 2.0 * self.codebook.astype(np.float64)
        return self._codebook_signs


def _build_codebook(generator: np.ndarray, k: int) -> np.ndarray:
    u = ((np.arange(2**k)[:, None] >> np.arange(k)[None, :]) & 1).astype(np.uint8)
    return (u @ generator) % 2


def repetition_code(n: int) -> LinearBlockCode:
    """The (n, 1) repetition code; n = 1 is uncoded BPSK."""
    if n < 1:
        raise ValueError("repetition length must be >= 1")
    g = np.ones((1, n), dtype=np.uint8)
    code = LinearBlockCode(name=f"repetition({n})", n=n, k=1, generator=g)
    code.codebook = _build_codebook(g, 1)
    return code


def hamming_7_4() -> LinearBlockCode:
    """Systematic (7, 4) Hamming code, minimum distance 3."""
    p = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]], dtype=np.uint8)
    g = np.hstack([np.eye(4, dtype=np.uint8), p])
    h = np.hstack([p.T, np.eye(3, dtype=np.uint8)])
    code = LinearBlockCode(name="hamming(7,4)", n=7, k=4, generator=g, parity_check=h)
    code.codebook = _build_codebook(g, 4)
    return code


def _poly_taps(poly_octal: int, constraint_length: int) -> np.ndarray:
    taps = int(str(poly_octal), 8)
    if taps == 0:
        raise ValueError("generator polynomial must be nonzero")
    if taps >> constraint_length:
        raise ValueError(f"polynomial {poly_octal:o} wider than constraint length {constraint_length}")
    # Bit i of the returned vector weights the input delayed by i steps.
    return np.array([(taps >> (constraint_length - 1 - i)) & 1 for i in range(constraint_length)], dtype=np.uint8)


def convolutional_code(polynomials, constraint_length: int, info_len: int) -> LinearBlockCode:
    """Zero-tail terminated feedforward convolutional code as a block code.

    polynomials are given in octal (e.g. (133, 171) with constraint length 7).
    The encoder appends constraint_length - 1 zero tail bits, so
    n = (info_len + constraint_length - 1) * len(polynomials) and the trellis
    ends in the zero state.
    """
    if info_len < 1:
        raise ValueError("info_len must be >= 1")
    if constraint_length < 2:
        raise ValueError("constraint_length must be >= 2")
    polys = [_poly_taps(p, constraint_length) for p in polynomials]
    num_polys = len(polys)
    mem = constraint_length - 1
    n = (info_len + mem) * num_polys

    # Generator rows are shifted copies of the interleaved impulse response.
    impulse = np.zeros(n, dtype=np.uint8)
    for t in range(constraint_length):
        for j, taps in enumerate(polys):
            impulse[t * num_polys + j] = taps[t]
    g = np.zeros((info_len, n), dtype=np.uint8)
    for i in range(info_len):
        g[i, i * num_polys : i * num_polys + constraint_length * num_polys] = impulse[: constraint_length * num_polys]

    num_states = 1 << mem
    next_state = np.zeros((num_states, 2), dtype=np.int64)
    out_bits = np.zeros((num_states, 2), dtype=np.int64)
    for s in range(num_states):
        for b in (0, 1):
            # Register layout: [current input, previous inputs...]; state is the register tail.
            reg = np.empty(constraint_length, dtype=np.uint8)
            reg[0] = b
            for i in range(mem):
                reg[1 + i] = (s >> i) & 1
            packed = 0
            for j, taps in enumerate(polys):
                packed |= int(np.bitwise_xor.reduce(reg & taps)) << j
            out_bits[s, b] = packed
            next_state[s, b] = ((s << 1) | b) & (num_states - 1)
    trellis = Trellis(
        num_states=num_states,
        num_polys=num_polys,
        next_state=next_state,
        out_bits=out_bits,
        info_len=info_len,
        constraint_length=constraint_length,
    )
    name = "conv(" + ",".join(str(p) for p in polynomials) + f",K={constraint_length})"
    code = LinearBlockCode(name=name, n=n, k=info_len, generator=g, trellis=trellis)
    if info_len <= MAX_CODEBOOK_K:
        code.codebook = _build_codebook(g, info_len)
    return code


def gf2_row_reduce(h: np.ndarray):
    """Row-reduce a binary matrix over GF(2).

    Returns (rref, pivot_cols); rank = len(pivot_cols).
    """
    m = h.copy().astype(np.uint8)
    rows, cols = m.shape
    pivot_cols = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot = np.nonzero(m[r:, c])[0]
        if pivot.size == 0:
            continue
        p = r + pivot[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        hit = np.nonzero(m[:, c])[0]
        hit = hit[hit != r]
        m[hit] ^= m[r]
        pivot_cols.append(c)
        r += 1
    return m, pivot_cols


def parse_alist(text: str) -> AlistMatrix:
    """Parse MacKay-convention alist text (1-based indices, 0 padding allowed)."""
    lines = text.splitlines()
    tokens_per_line = []
    for ln, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped:
            tokens_per_line.append((ln, []))
            continue
        try:
            tokens_per_line.append((ln, [int(t) for t in stripped.split()]))
        except ValueError:
            raise AlistParseError(f"line {ln}: non-integer token in {stripped!r}")
    content = [(ln, toks) for ln, toks in tokens_per_line if toks]
    if not content:
        raise AlistParseError("line 1: empty alist")

    def take(idx, expect, what):
        if idx >= len(content):
            raise AlistParseError(f"line {len(lines)}: unexpected end of alist, missing {what}")
        ln, toks = content[idx]
        if expect is not None and len(toks) != expect:
            raise AlistParseError(f"line {ln}: expected {expect} values for {what}, got {len(toks)}")
        return ln, toks

    _, (n, m) = take(0, 2, "matrix size")
    if n < 1 or m < 1:
        raise AlistParseError("line 1: matrix dimensions must be positive")
    _, (max_col, max_row) = take(1, 2, "max degrees")
    _, col_degs = take(2, n, "column degrees")
    _, row_degs = take(3, m, "row degrees")
    if max(col_degs) > max_col or max(row_degs) > max_row:
        raise AlistParseError("line 3: degree exceeds declared maximum")

    col_lists = []
    for j in range(n):
        ln, toks = take(4 + j, None, f"column {j + 1} adjacency")
        vals = [t for t in toks if t != 0]
        if len(toks) not in (col_degs[j], max_col):
            raise AlistParseError(f"line {ln}: column {j + 1} lists {len(toks)} entries, degree is {col_degs[j]}")
        if len(vals) != col_degs[j]:
            raise AlistParseError(f"line {ln}: column {j + 1} has {len(vals)} nonzero entries, degree is {col_degs[j]}")
        if any(t < 1 or t > m for t in vals):
            raise AlistParseError(f"line {ln}: row index out of range in column {j + 1}")
        col_lists.append(np.array(sorted(v - 1 for v in vals), dtype=np.int64))
    row_lists = []
    for i in range(m):
        ln, toks = take(4 + n + i, None, f"row {i + 1} adjacency")
        vals = [t for t in toks if t != 0]
        if len(vals) != row_degs[i]:
            raise AlistParseError(f"line {ln}: row {i + 1} has {len(vals)} nonzero entries, degree is {row_degs[i]}")
        if any(t < 1 or t > n for t in vals):
            raise AlistParseError(f"line {ln}: column index out of range in row {i + 1}")
        row_lists.append(np.array(sorted(v - 1 for v in vals), dtype=np.int64))

    alist = AlistMatrix(n_cols=n, n_rows=m, col_lists=col_lists, row_lists=row_lists)
    # The two adjacency views must describe the same matrix.
    check = [[] for _ in range(m)]
    for j, rows in enumerate(alist.col_lists):
        for r in rows:
            check[r].append(j)
    for i in range(m):
        if not np.array_equal(np.array(check[i], dtype=np.int64), alist.row_lists[i]):
            raise AlistParseError(f"line {4 + n + i}: row {i + 1} adjacency disagrees with column lists")
    return alist


def write_alist(h: np.ndarray) -> str:
    """Serialize a dense binary matrix to alist text (entries padded with 0)."""
    m, n = h.shape
    col_lists = [np.nonzero(h[:, j])[0] + 1 for j in range(n)]
    row_lists = [np.nonzero(h[i, :])[0] + 1 for i in range(m)]
    max_col = max(len(c) for c in col_lists)
    max_row = max(len(r) for r in row_lists)
    out = [f"{n} {m}", f"{max_col} {max_row}"]
    out.append(" ".join(str(len(c)) for c in col_lists))
    out.append(" ".join(str(len(r)) for r in row_lists))
    for c in col_lists:
        padded = list(c) + [0] * (max_col - len(c))
        out.append(" ".join(str(v) for v in padded))
    for r in row_lists:
        padded = list(r) + [0] * (max_row - len(r))
        out.append(" ".join(str(v) for v in padded))
    return "\n".join(out) + "\n"


def ldpc_from_alist(text: str, name: str = "ldpc") -> LinearBlockCode:
    """Build an LDPC code from alist text.

    k = n - rank(H) over GF(2); a systematic encoder is derived once by
    Gaussian elimination (information bits go to the non-pivot columns).
    Rank-deficient H is accepted with a warning and an adjusted k.
    """
    alist = parse_alist(text)
    h = alist.to_dense()
    n = alist.n_cols
    rref, pivot_cols = gf2_row_reduce(h)
    rank = len(pivot_cols)
    if rank < alist.n_rows:
        warnings.warn(
            f"parity-check matrix is rank deficient ({rank} < {alist.n_rows}); k adjusted to {n - rank}",
            stacklevel=2,
        )
    k = n - rank
    if k == 0:
        raise ValueError("parity-check matrix leaves no information bits")
    free_cols = np.array(sorted(set(range(n)) - set(pivot_cols)), dtype=np.int64)
    pivot_cols = np.array(pivot_cols, dtype=np.int64)
    # For c with c[free] = u: c[pivot[i]] = sum_f rref[i, f] * u_f (mod 2).
    parity_map = rref[:rank][:, free_cols]
    g = np.zeros((k, n), dtype=np.uint8)
    g[np.arange(k), free_cols] = 1
    g[:, pivot_cols] = parity_map.T
    code = LinearBlockCode(name=name, n=n, k=k, generator=g, parity_check=h)
    if k <= MAX_CODEBOOK_K:
        code.codebook = _build_codebook(g, k)
    return code


def peg_regular_ldpc(n: int, col_deg: int, row_deg: int, seed: int) -> np.ndarray:
    """Grow a regular LDPC parity-check matrix edge by edge, seeded.

    For each variable node, every new edge goes to a check node as far away
    as possible in the current graph (maximizing local girth), among the
    not-yet-full checks of minimum degree; remaining ties are broken by the
    seeded generator. n * col_deg must equal m * row_deg with m = n * col_deg
    / row_deg, so the result is exactly (col_deg, row_deg)-regular.
    """
    if (n * col_deg) % row_deg != 0:
        raise ValueError("n * col_deg must be divisible by row_deg")
    m = n * col_deg // row_deg
    rng = np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), 0]))
    check_of_var: list[list[int]] = [[] for _ in range(n)]
    vars_of_check: list[list[int]] = [[] for _ in range(m)]
    check_deg = np.zeros(m, dtype=np.int64)

    for v in range(n):
        for _ in range(col_deg):
            open_checks = check_deg < row_deg
            if not check_of_var[v]:
                candidates = np.nonzero(open_checks & (check_deg == check_deg[open_checks].min()))[0]
            else:
                # BFS from v through the bipartite graph; prefer checks the
                # current graph cannot reach at all, otherwise the deepest
                # frontier (maximizes the shortest cycle the new edge closes).
                seen_c = np.zeros(m, dtype=bool)
                seen_v = np.zeros(n, dtype=bool)
                seen_v[v] = True
                frontier = list(check_of_var[v])
                for c in frontier:
                    seen_c[c] = True
                while True:
                    next_vars = []
                    for c in frontier:
                        for u in vars_of_check[c]:
                            if not seen_v[u]:
                                seen_v[u] = True
                                next_vars.append(u)
                    next_checks = []
                    for u in next_vars:
                        for c in check_of_var[u]:
                            if not seen_c[c]:
                                seen_c[c] = True
                                next_checks.append(c)
                    if not next_checks:
                        break
                    frontier = next_checks
                unreached = ~seen_c & open_checks
                if unreached.any():
                    pool = np.nonzero(unreached)[0]
                else:
                    pool = np.array([c for c in frontier if open_checks[c]], dtype=np.int64)
                    if pool.size == 0:
                        adjacent = np.zeros(m, dtype=bool)
                        adjacent[check_of_var[v]] = True
                        pool = np.nonzero(open_checks & ~adjacent)[0]
                candidates = pool[check_deg[pool] == check_deg[pool].min()]
            c = int(candidates[rng.integers(candidates.size)])
            check_of_var[v].append(c)
            vars_of_check[c].append(v)
            check_deg[c] += 1

    h = np.zeros((m, n), dtype=np.uint8)
    for v, checks in enumerate(check_of_var):
        h[checks, v] = 1
    return h


def shipped_ldpc_1152() -> LinearBlockCode:
    """The packaged regular (3,6) LDPC code, n = 1152, k = 576 (full-rank H)."""
    text = resources.files("srwer.assets").joinpath("ldpc_n1152_reg36.alist").read_text()
    return ldpc_from_alist(text, name="ldpc(1152,576,reg36)")


def code_from_spec(spec: str) -> LinearBlockCode:
    """Build a code from a compact spec string.

    Accepted forms: "hamming74", "uncoded", "repetition:N", "ldpc36",
    "conv:POLY1,POLY2:K:INFO_LEN", "alist:PATH".
    """
    spec = spec.strip()
    if spec == "hamming74":
        return hamming_7_4()
    if spec == "uncoded":
        return repetition_code(1)
    if spec == "ldpc36":
        return shipped_ldpc_1152()
    kind, _, rest = spec.partition(":")
    if kind == "repetition":
        return repetition_code(int(rest))
    if kind == "conv":
        parts = rest.split(":")
        if len(parts) != 3:
            raise ValueError(f"conv spec needs POLYS:K:INFO_LEN, got {spec!r}")
        polys = [int(p) for p in parts[0].split(",")]
        return convolutional_code(polys, int(parts[1]), int(parts[2]))
    if kind == "alist":
        with open(rest) as fh:
            return ldpc_from_alist(fh.read(), name=f"ldpc({rest})")
    raise ValueError(f"unknown code spec {spec!r}")


def min_distance(code: LinearBlockCode) -> int:
    """Minimum Hamming weight over nonzero codewords, brute force (k <= 20)."""
    if code.k > 20:
        raise ValueError(f"min_distance supports k <= 20, got k={code.k}")
    best = code.n
    batch = 1 << min(code.k, 12)
    for start in range(0, 2**code.k, batch):
        idx = np.arange(start, start + batch, dtype=np.int64)
        u = ((idx[:, None] >> np.arange(code.k)[None, :]) & 1).astype(np.uint8)
        w = ((u @ code.generator) % 2).sum(axis=1)
        w = w[idx > 0] if start == 0 else w
        if w.size:
            best = min(best, int(w.min()))
    return best
