"""Soft-decision decoders; each one defines the decision region under test.

All decoders are deterministic functions of (received vector, channel gains,
noise density). Ties are broken toward the lowest codeword / state index so
that region boundaries are reproducible. With unit gains the fading path is
bit-identical to the AWGN path.
"""

from __future__ import annotations

import numpy as np

from .codes import LinearBlockCode

LLR_CLIP = 50.0
_ATANH_EPS = 1e-15


class UnsupportedCodeError(ValueError):
    """The code lacks the structure (codebook, trellis, parity check) this decoder needs."""


def bpsk_llr(y, gains=None, n0: float = 1.0, es: float = 1.0) -> np.ndarray:
    """Per-bit LLR 4 h sqrt(Es) y / N0; positive values favor bit 0."""
    y = np.asarray(y, dtype=np.float64)
    h = np.ones_like(y) if gains is None else np.asarray(gains, dtype=np.float64)
    return 4.0 * h * np.sqrt(es) * y / n0


class MlExhaustiveDecoder:
    """Correlation argmax over the full codebook (k <= 16)."""

    algorithm = "ml_exhaustive"
    max_iterations = None

    def __init__(self, code: LinearBlockCode):
        if code.codebook is None:
            raise UnsupportedCodeError(f"{code.name}: exhaustive ML needs an explicit codebook")
        self.code = code
        self.name = "ml_exhaustive"

    def decode(self, y, gains=None, n0: float = 1.0) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        w = y if gains is None else np.asarray(gains, dtype=np.float64) * y
        corr = self.code.codebook_signs() @ w
        # argmax takes the first maximum: ties go to the lowest codeword index.
        return self.code.codebook[int(np.argmax(corr))]


class ViterbiSoftDecoder:
    """Max-correlation Viterbi on a zero-tail terminated trellis."""

    algorithm = "viterbi_soft"
    max_iterations = None

    def __init__(self, code: LinearBlockCode):
        if code.trellis is None:
            raise UnsupportedCodeError(f"{code.name}: Viterbi needs a trellis")
        self.code = code
        self.name = "viterbi_soft"
        t = code.trellis
        ns, npoly = t.num_states, t.num_polys
        # Predecessors of state s: both arrive on input bit s & 1.
        pred = np.zeros((ns, 2), dtype=np.int64)
        counts = np.zeros(ns, dtype=np.int64)
        for s_prev in range(ns):
            for b in (0, 1):
                nxt = t.next_state[s_prev, b]
                pred[nxt, counts[nxt]] = s_prev
                counts[nxt] += 1
        self._pred = pred
        # Sign of each output symbol per (state, input bit): +1 for bit 0.
        signs = np.zeros((ns, 2, npoly), dtype=np.float64)
        for s in range(ns):
            for b in (0, 1):
                packed = t.out_bits[s, b]
                for j in range(npoly):
                    signs[s, b, j] = 1.0 - 2.0 * ((packed >> j) & 1)
        self._signs = signs

    def decode(self, y, gains=None, n0: float = 1.0) -> np.ndarray:
        t = self.code.trellis
        ns, npoly = t.num_states, t.num_polys
        steps = t.info_len + t.constraint_length - 1
        y = np.asarray(y, dtype=np.float64)
        w = (y if gains is None else np.asarray(gains, dtype=np.float64) * y).reshape(steps, npoly)

        metrics = np.full(ns, -np.inf)
        metrics[0] = 0.0
        bp = np.zeros((steps, ns), dtype=np.uint8)
        states = np.arange(ns)
        arrival_bit = states & 1
        for step in range(steps):
            branch = self._signs @ w[step]  # (ns, 2): metric of leaving state s on bit b
            cand0 = metrics[self._pred[:, 0]] + branch[self._pred[:, 0], arrival_bit]
            cand1 = metrics[self._pred[:, 1]] + branch[self._pred[:, 1], arrival_bit]
            take1 = cand1 > cand0  # ties keep candidate 0, the lower predecessor state
            metrics = np.where(take1, cand1, cand0)
            bp[step] = take1
            if step >= t.info_len:
                metrics[arrival_bit == 1] = -np.inf  # zero tail
        s = 0
        bits = np.zeros(steps, dtype=np.uint8)
        for step in range(steps - 1, -1, -1):
            bits[step] = s & 1
            s = self._pred[s, bp[step, s]]
        return self.code.encode(bits[: t.info_len])


class _MessagePassingGraph:
    """Padded edge arrays for flooding-schedule message passing.

    Edge E (one past the last real edge) is a sentinel slot that holds the
    neutral element so irregular rows/columns can be processed as dense
    (m, max_row_deg) / (n, max_col_deg) blocks.
    """

    def __init__(self, h: np.ndarray):
        m, n = h.shape
        rows, cols = np.nonzero(h)
        order = np.lexsort((cols, rows))  # check-major edge order
        self.edge_check = rows[order]
        self.edge_var = cols[order]
        self.num_edges = self.edge_var.size
        self.m, self.n = m, n
        pad = self.num_edges

        row_deg = h.sum(axis=1).astype(np.int64)
        col_deg = h.sum(axis=0).astype(np.int64)
        dc, dv = int(row_deg.max()), int(col_deg.max())
        # With constant row degree the check-major edge vector reshapes to
        # (m, dc) for free; otherwise fall back to padded gathers.
        self.rows_regular = bool((row_deg == dc).all())
        self.check_edges = np.full((m, dc), pad, dtype=np.int64)
        pos = 0
        for i in range(m):
            self.check_edges[i, : row_deg[i]] = np.arange(pos, pos + row_deg[i])
            pos += row_deg[i]
        self.var_edges = np.full((n, dv), pad, dtype=np.int64)
        fill = np.zeros(n, dtype=np.int64)
        for e in range(self.num_edges):
            v = self.edge_var[e]
            self.var_edges[v, fill[v]] = e
            fill[v] += 1
        # Var index of each check-side slot, sentinel slot -> bit buffer slot n.
        ev = np.concatenate([self.edge_var, [n]])
        self.check_var = ev[self.check_edges]


def _graph_for(code: LinearBlockCode) -> _MessagePassingGraph:
    if code.parity_check is None:
        raise UnsupportedCodeError(f"{code.name}: message passing needs a parity-check structure")
    if code._mp_graph is None:
        code._mp_graph = _MessagePassingGraph(code.parity_check)
    return code._mp_graph


class LdpcDecoder:
    """Flooding-schedule LDPC decoder, sum-product or min-sum check rule.

    Stops early as soon as the hard decision satisfies every parity check;
    otherwise returns the (possibly non-codeword) hard decision after
    max_iterations. SPA clips messages to +-LLR_CLIP to keep the tanh rule
    away from overflow; min-sum is left unclipped and is therefore exactly
    equivariant to a joint positive scaling of the input LLRs.
    """

    def __init__(self, code: LinearBlockCode, rule: str = "spa", max_iterations: int = 25, es: float = 1.0):
        if rule not in ("spa", "msa"):
            raise ValueError(f"unknown check rule {rule!r}")
        if max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        self.code = code
        self.rule = rule
        self.max_iterations = max_iterations
        self.es = es
        self.graph = _graph_for(code)
        self.name = f"ldpc_{rule}"

    @property
    def algorithm(self) -> str:
        return f"ldpc_{self.rule}"

    def decode(self, y, gains=None, n0: float = 1.0) -> np.ndarray:
        llr = bpsk_llr(y, gains, n0, self.es)
        return self.decode_llr(llr)

    def decode_llr(self, llr: np.ndarray) -> np.ndarray:
        g = self.graph
        pad = g.num_edges
        spa = self.rule == "spa"
        if spa:
            llr = np.clip(llr, -LLR_CLIP, LLR_CLIP)
        v_msg = np.empty(pad + 1)
        v_msg[:pad] = llr[g.edge_var]
        v_msg[pad] = np.inf
        c_msg = np.zeros(pad + 1)
        rows = np.arange(g.m)
        bits_ext = np.zeros(g.n + 1, dtype=np.uint8)
        c_view = c_msg[:pad].reshape(g.m, -1) if g.rows_regular else None

        for _ in range(self.max_iterations):
            vm = v_msg[:pad].reshape(g.m, -1) if g.rows_regular else v_msg[g.check_edges]
            if spa:
                t = np.tanh(0.5 * vm)
                left = np.ones_like(t)
                np.cumprod(t[:, :-1], axis=1, out=left[:, 1:])
                right = np.ones_like(t)
                np.cumprod(t[:, :0:-1], axis=1, out=right[:, -2::-1])
                loo = left * right
                np.clip(loo, -1.0 + _ATANH_EPS, 1.0 - _ATANH_EPS, out=loo)
                out = np.arctanh(loo, out=loo)
                out *= 2.0
                np.clip(out, -LLR_CLIP, LLR_CLIP, out=out)
            else:
                mag = np.abs(vm)
                sign = np.where(vm < 0.0, -1.0, 1.0)
                amin = mag.argmin(axis=1)
                m1 = mag[rows, amin]
                mag[rows, amin] = np.inf
                m2 = mag.min(axis=1)
                out = np.where(np.arange(vm.shape[1])[None, :] == amin[:, None], m2[:, None], m1[:, None])
                out *= sign.prod(axis=1)[:, None] * sign
            if g.rows_regular:
                c_view[:] = out
            else:
                c_msg[g.check_edges] = out
                c_msg[pad] = 0.0

            cm = c_msg[g.var_edges]  # (n, dv)
            posterior = llr + cm.sum(axis=1)
            v_new = posterior[:, None] - cm
            if spa:
                np.clip(v_new, -LLR_CLIP, LLR_CLIP, out=v_new)
            v_msg[g.var_edges] = v_new
            v_msg[pad] = np.inf

            bits = (posterior < 0.0).astype(np.uint8)
            bits_ext[: g.n] = bits
            if not (bits_ext[g.check_var].sum(axis=1) & 1).any():
                return bits
        return bits


def ml_exhaustive_decode(code, y, gains=None, n0: float = 1.0) -> np.ndarray:
    return MlExhaustiveDecoder(code).decode(y, gains, n0)


def viterbi_soft_decode(code, y, gains=None, n0: float = 1.0) -> np.ndarray:
    if getattr(code, "_viterbi", None) is None:
        code._viterbi = ViterbiSoftDecoder(code)
    return code._viterbi.decode(y, gains, n0)


def ldpc_spa_decode(code, y, gains=None, n0: float = 1.0, max_iterations: int = 25) -> np.ndarray:
    return LdpcDecoder(code, "spa", max_iterations).decode(y, gains, n0)


def ldpc_msa_decode(code, y, gains=None, n0: float = 1.0, max_iterations: int = 25) -> np.ndarray:
    return LdpcDecoder(code, "msa", max_iterations).decode(y, gains, n0)


def make_decoder(algorithm: str, code: LinearBlockCode, max_iterations: int = 25):
    """Build a decoder by algorithm name: ml, viterbi, spa or msa."""
    algorithm = algorithm.lower()
    if algorithm in ("ml", "ml_exhaustive"):
        return MlExhaustiveDecoder(code)
    if algorithm in ("viterbi", "viterbi_soft"):
        return ViterbiSoftDecoder(code)
    if algorithm in ("spa", "ldpc_spa"):
        return LdpcDecoder(code, "spa", max_iterations)
    if algorithm in ("msa", "ldpc_msa"):
        return LdpcDecoder(code, "msa", max_iterations)
    raise ValueError(f"unknown decoder algorithm {algorithm!r}")
