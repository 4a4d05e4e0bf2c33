"""Pairing enumeration and evaluation for products of supertraces.

A pattern holds two source traces (one insertion of each sign block), plain
traces (psi psit)^n with a single shared bond index, and dressed traces in
which each pair of slots carries its own summed index chained by propagation
matrix elements.  Gaussian integration pairs every psi slot with a psit slot
and yields one resolvent factor per pair.

Which pairings survive is decided exactly, not heuristically: for every
pairing the superspace coefficient is evaluated by summing the contraction
deltas, the alternating inner-index signs, the graded trace closure signs
and the Grassmann reordering signs over all superspace index assignments,
with generic matrices in the two source insertions.  A pairing whose
coefficient vanishes identically (it does so structurally, e.g. whenever a
trace is not linked through contractions to the sources) is discarded.  The
contraction deltas glue the indices into closed cycles, so the assignment
sum runs over one binary value per cycle and stays cheap.

Surviving pairings are classified: summed bond indices occurring in exactly
two resolvent factors (the source indices) are chained away into
higher-order factors, and pairings with identical classified form merge
into one term with a multiplicity.  Overall sign factors are not tracked;
term classes are defined up to a positive multiplicity.
"""

import itertools
import string
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_PSI_SLOTS = 12
_SUPERFACTOR_TOL = 1e-9


@dataclass(frozen=True)
class TracePattern:
    """Trace content of one expansion term: plain exponents and dressed ones.

    ``plain[i] = n_i >= 2`` and ``dressed[j] = l_j >= 1``; the two source
    traces are always present and are not listed.
    """

    plain: tuple = ()
    dressed: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "plain", tuple(int(n) for n in self.plain))
        object.__setattr__(self, "dressed", tuple(int(l) for l in self.dressed))
        if any(n < 2 for n in self.plain):
            raise ValueError("plain trace exponents must be >= 2")
        if any(l < 1 for l in self.dressed):
            raise ValueError("dressed trace exponents must be >= 1")
        if self.psi_slots > MAX_PSI_SLOTS:
            raise ValueError(
                f"pattern has {self.psi_slots} psi slots; cap is {MAX_PSI_SLOTS}"
            )

    @property
    def psi_slots(self) -> int:
        return 2 + sum(self.plain) + sum(self.dressed)

    @property
    def trace_count(self) -> int:
        return 2 + len(self.plain) + len(self.dressed)


@dataclass(frozen=True)
class ContractionTerm:
    """One surviving class of pairings, in classified (collapsed) form."""

    pattern: TracePattern
    w_factors: tuple  # (("tr", order) | (order, var_a, var_b)), vars are tuples
    b_factors: tuple  # (("B"|"Bdag", var_a, var_b))
    multiplicity: int
    representative: tuple  # one pairing of the class: psit slot per psi slot
    canonical: str

    def w_orders(self):
        return sorted({f[1] if f[0] == "tr" else f[0] for f in self.w_factors})


@dataclass(frozen=True)
class TermValue:
    value: complex
    two_b: int
    tag: str = ""
    canonical: str = ""


# -- slot/index bookkeeping -------------------------------------------------


def _slot_tables(pattern: TracePattern):
    """Per-slot trace ids and per-slot bond summation variables.

    Sources and plain traces share one variable per trace; dressed traces
    carry one variable per slot.
    """
    psi_trace = []
    psit_trace = []
    psi_var = []
    psit_var = []
    trace_sizes = []
    tid = 0
    for _ in range(2):  # the two sources
        psi_trace.append(tid)
        psit_trace.append(tid)
        psi_var.append(("t", tid))
        psit_var.append(("t", tid))
        trace_sizes.append(1)
        tid += 1
    for n in pattern.plain:
        for _ in range(n):
            psi_trace.append(tid)
            psit_trace.append(tid)
            psi_var.append(("t", tid))
            psit_var.append(("t", tid))
        trace_sizes.append(n)
        tid += 1
    for l in pattern.dressed:
        for i in range(l):
            psi_trace.append(tid)
            psit_trace.append(tid)
            psi_var.append(("p", tid, i))
            psit_var.append(("q", tid, i))
        trace_sizes.append(l)
        tid += 1
    return psi_trace, psit_trace, psi_var, psit_var, trace_sizes


def _b_factors(pattern: TracePattern):
    """Propagation-matrix factors of every dressed trace (pairing independent)."""
    factors = []
    tid = 2 + len(pattern.plain)
    for l in pattern.dressed:
        for i in range(l):
            factors.append(("B", ("q", tid, (i - 1) % l), ("p", tid, i)))
            factors.append(("Bdag", ("p", tid, i), ("q", tid, i)))
        tid += 1
    return factors


# -- superspace coefficient of one pairing ------------------------------------


class _Layout:
    """Superspace word structure of a pattern.

    Each trace is a cyclic word of elements; elements are insertions or
    (psi | psit) slots.  Propagation-matrix insertions in dressed traces are
    scalars in superspace and do not appear.  The element order of the two
    source traces follows the source expression: (ins, psi, psit) for the
    retarded insertion and (ins, psit, psi) for the advanced one.
    """

    def __init__(self, pattern: TracePattern):
        self.words = []  # element ids per trace, in word order
        self.kind = []  # per element: "ins" | "psi" | "psit"
        self.psi_elem = []  # element id of psi slot k (slot order of _slot_tables)
        self.psit_elem = []

        def add(kind):
            self.kind.append(kind)
            return len(self.kind) - 1

        e = add("ins")
        p = add("psi")
        q = add("psit")
        self.words.append([e, p, q])
        self.psi_elem.append(p)
        self.psit_elem.append(q)
        e = add("ins")
        q = add("psit")
        p = add("psi")
        self.words.append([e, q, p])
        self.psi_elem.append(p)
        self.psit_elem.append(q)
        for size in list(pattern.plain) + list(pattern.dressed):
            word = []
            for _ in range(size):
                p = add("psi")
                q = add("psit")
                word.extend([p, q])
                self.psi_elem.append(p)
                self.psit_elem.append(q)
            self.words.append(word)
        self.insertions = [w[0] for w in self.words[:2]]
        # global order of slot elements, as they appear in the product
        self.slot_order = [e for w in self.words for e in w if self.kind[e] != "ins"]


@lru_cache(maxsize=None)
def _layout(pattern: TracePattern) -> _Layout:
    return _Layout(pattern)


def _index_loops(layout: _Layout, pairing):
    """Group the ports (element, side) into closed index cycles.

    Ports: side 0 is the left index of an element, side 1 the right one.
    Trace edges tie right to next-left along each word; contraction edges
    tie psi.left to psit.right and psi.right to psit.left; insertions pass
    through.  Returns the loop id of every port and the loop count.
    """
    link = {}
    for word in layout.words:
        for i, e in enumerate(word):
            nxt = word[(i + 1) % len(word)]
            link.setdefault((e, 1), []).append((nxt, 0))
            link.setdefault((nxt, 0), []).append((e, 1))
    for e in layout.insertions:
        link.setdefault((e, 0), []).append((e, 1))
        link.setdefault((e, 1), []).append((e, 0))
    for a, b in enumerate(pairing):
        pa = layout.psi_elem[a]
        pb = layout.psit_elem[b]
        link.setdefault((pa, 0), []).append((pb, 1))
        link.setdefault((pb, 1), []).append((pa, 0))
        link.setdefault((pa, 1), []).append((pb, 0))
        link.setdefault((pb, 0), []).append((pa, 1))
    loop_of = {}
    n_loops = 0
    for start in link:
        if start in loop_of:
            continue
        stack = [start]
        while stack:
            port = stack.pop()
            if port in loop_of:
                continue
            loop_of[port] = n_loops
            stack.extend(link[port])
        n_loops += 1
    return loop_of, n_loops


def pairing_superfactor(pattern: TracePattern, pairing, source_plus, source_minus):
    """Exact superspace coefficient of one pairing, for given 2x2 insertions.

    Sums over all superspace index assignments: contraction deltas (outer
    indices equal, inner indices equal), the (-1)^inner contraction weight,
    the graded closure sign of every supertrace, and the Grassmann
    reordering sign of bringing each contracted pair together through the
    uncontracted remainder of the word.  Resolvent and propagation factors
    are bond-space objects and are left out; the returned number multiplies
    the pairing's bond-index monomial.
    """
    layout = _layout(pattern)
    loop_of, n_loops = _index_loops(layout, pairing)
    order = layout.slot_order
    pos = {e: i for i, e in enumerate(order)}
    partner = {}
    for a, b in enumerate(pairing):
        pa, pb = layout.psi_elem[a], layout.psit_elem[b]
        partner[pa] = pb
        partner[pb] = pa
    total = 0.0 + 0.0j
    for assign in itertools.product((0, 1), repeat=n_loops):
        idx = {port: assign[loop] for port, loop in loop_of.items()}
        weight = 1.0 + 0.0j
        for word in layout.words:
            weight *= -1.0 if idx[(word[0], 0)] else 1.0
        sp = layout.insertions[0]
        sm = layout.insertions[1]
        weight *= source_plus[idx[(sp, 0)], idx[(sp, 1)]]
        weight *= source_minus[idx[(sm, 0)], idx[(sm, 1)]]
        if weight == 0.0:
            continue
        parity = [0] * len(layout.kind)
        for e in order:
            parity[e] = (idx[(e, 0)] + idx[(e, 1)]) % 2
        sign = 1
        done = [False] * len(order)
        for i, e in enumerate(order):
            if done[i]:
                continue
            j = pos[partner[e]]
            done[i] = True
            done[j] = True
            pj = parity[order[j]]
            if pj:
                for k in range(i + 1, j):
                    if not done[k] and parity[order[k]]:
                        sign = -sign
            first, second = e, order[j]
            if layout.kind[first] == "psit":
                if parity[first] and parity[second]:
                    sign = -sign
                first, second = second, first
            # canonical <psi psit>: weight (-1)^t on the inner index
            if idx[(first, 1)]:
                sign = -sign
        total += weight * sign
    return total


@lru_cache(maxsize=None)
def _generic_insertions():
    rng = np.random.default_rng(0xA5C3)
    draws = []
    for _ in range(2):
        sp = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        sm = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        draws.append((sp, sm))
    return draws


def _pairing_survives(pattern: TracePattern, pairing) -> bool:
    """True when the superspace coefficient is generically nonzero."""
    return any(
        abs(pairing_superfactor(pattern, pairing, sp, sm)) > _SUPERFACTOR_TOL
        for sp, sm in _generic_insertions()
    )


# -- enumeration ---------------------------------------------------------------


def _connected_pairings(pattern: TracePattern):
    """All pairings whose trace multigraph is connected, by backtracking.

    Components that run out of unpaired slots without containing both
    sources can never reconnect, so those branches are pruned early; this
    is a cheap prefilter, the exact superfactor decides afterwards.
    """
    psi_trace, psit_trace, _, _, trace_sizes = _slot_tables(pattern)
    n = len(psi_trace)
    n_traces = pattern.trace_count
    used = [False] * n
    assign = [0] * n
    out = []

    def find(parent, x):
        while parent[x] != x:
            x = parent[x]
        return x

    def rec(a, parent, free, has_sp, has_sm):
        if a == n:
            out.append(tuple(assign))
            return
        ta = psi_trace[a]
        for b in range(n):
            if used[b]:
                continue
            tb = psit_trace[b]
            parent2 = parent.copy()
            free2 = free.copy()
            sp2 = has_sp.copy()
            sm2 = has_sm.copy()
            ra, rb = find(parent2, ta), find(parent2, tb)
            if ra != rb:
                parent2[rb] = ra
                free2[ra] += free2[rb]
                sp2[ra] = sp2[ra] or sp2[rb]
                sm2[ra] = sm2[ra] or sm2[rb]
            free2[ra] -= 2
            if free2[ra] == 0 and not (sp2[ra] and sm2[ra]):
                continue
            used[b] = True
            assign[a] = b
            rec(a + 1, parent2, free2, sp2, sm2)
            used[b] = False
        return

    parent0 = list(range(n_traces))
    free0 = [2 * s for s in trace_sizes]
    sp0 = [t == 0 for t in range(n_traces)]
    sm0 = [t == 1 for t in range(n_traces)]
    rec(0, parent0, free0, sp0, sm0)
    return out


def surviving_pairings(pattern: TracePattern):
    """Pairings that are connected and carry a nonvanishing superfactor."""
    return [
        pairing
        for pairing in _connected_pairings(pattern)
        if _pairing_survives(pattern, pairing)
    ]


# -- classification ----------------------------------------------------------


def _raw_w_factors(pattern: TracePattern, pairing):
    _, _, psi_var, psit_var, _ = _slot_tables(pattern)
    return [(1, psi_var[a], psit_var[b]) for a, b in enumerate(pairing)]


def _collapse(w_factors, b_vars):
    """Chain away variables that occur in exactly two resolvent factors."""
    factors = [list(f) for f in w_factors]
    closed = []  # ("tr", order)
    while True:
        usage = {}
        for i, (n, a, b) in enumerate(factors):
            usage.setdefault(a, []).append((i, 0))
            usage.setdefault(b, []).append((i, 1))
        merged = False
        for v, occ in usage.items():
            if v in b_vars or len(occ) != 2:
                continue
            (i1, s1), (i2, s2) = occ
            if i1 == i2:
                n, a, b = factors.pop(i1)
                closed.append(("tr", n))
                merged = True
                break
            if s1 == s2:
                continue  # structurally impossible for source variables
            if s1 == 1:
                (i1, s1), (i2, s2) = (i2, s2), (i1, s1)
            # factors[i1] = (n1, v, y), factors[i2] = (n2, x, v)
            n1, _, y = factors[i1]
            n2, x, _ = factors[i2]
            keep, drop = (i1, i2) if i1 < i2 else (i2, i1)
            factors[keep] = [n1 + n2, x, y]
            factors.pop(drop)
            merged = True
            break
        if not merged:
            return [tuple(f) for f in factors], closed


def _symmetry_ops(pattern: TracePattern):
    """Variable renamings that leave a pattern invariant.

    Permutations of plain traces with equal exponent, permutations of
    dressed traces with equal exponent, and cyclic rotation inside each
    dressed trace.
    """
    plain_base = 2
    dressed_base = 2 + len(pattern.plain)
    plain_groups = {}
    for i, n in enumerate(pattern.plain):
        plain_groups.setdefault(n, []).append(plain_base + i)
    dressed_groups = {}
    for i, l in enumerate(pattern.dressed):
        dressed_groups.setdefault(l, []).append(dressed_base + i)

    plain_perm_sets = [list(itertools.permutations(g)) for g in plain_groups.values()]
    dressed_perm_sets = [list(itertools.permutations(g)) for g in dressed_groups.values()]
    rotation_sets = [range(l) for l in pattern.dressed]

    ops = []
    for plain_choice in itertools.product(*plain_perm_sets) if plain_perm_sets else [()]:
        trace_map = {}
        for group, perm in zip(plain_groups.values(), plain_choice):
            trace_map.update(dict(zip(group, perm)))
        for dressed_choice in (
            itertools.product(*dressed_perm_sets) if dressed_perm_sets else [()]
        ):
            dmap = dict(trace_map)
            for group, perm in zip(dressed_groups.values(), dressed_choice):
                dmap.update(dict(zip(group, perm)))
            for rots in itertools.product(*rotation_sets) if rotation_sets else [()]:
                rot_by_trace = {
                    dressed_base + i: (r, pattern.dressed[i]) for i, r in enumerate(rots)
                }

                def op(var, dmap=dmap, rot=rot_by_trace):
                    if var[0] == "t":
                        return ("t", dmap.get(var[1], var[1]))
                    kind, tid, i = var
                    r, l = rot.get(tid, (0, 1))
                    return (kind, dmap.get(tid, tid), (i + r) % l)

                ops.append(op)
    return ops


def _canonical(pattern, w_factors, closed, b_factors):
    """Minimal rendering over the pattern's symmetry group."""
    best = None
    for op in _symmetry_ops(pattern):
        ws = sorted((n, op(a), op(b)) for n, a, b in w_factors)
        bs = sorted((kind, op(a), op(b)) for kind, a, b in b_factors)
        key = (tuple(sorted(closed)), tuple(ws), tuple(bs))
        if best is None or key < best:
            best = key
    closed_k, ws_k, bs_k = best
    names = {}

    def letter(v):
        if v not in names:
            names[v] = string.ascii_lowercase[len(names)]
        return names[v]

    parts = [f"trW{n}" for _, n in closed_k]
    parts += [f"W{n}[{letter(a)},{letter(b)}]" for n, a, b in ws_k]
    parts += [
        ("B" if kind == "B" else "B+") + f"[{letter(a)},{letter(b)}]"
        for kind, a, b in bs_k
    ]
    return " * ".join(parts), closed_k, ws_k, bs_k


def enumerate_contractions(pattern: TracePattern):
    """All surviving contraction classes of ``pattern``, sorted canonically."""
    b_factors = _b_factors(pattern)
    b_vars = {v for _, a, b in b_factors for v in (a, b)}
    classes = {}
    for pairing in surviving_pairings(pattern):
        raw = _raw_w_factors(pattern, pairing)
        factors, closed = _collapse(raw, b_vars)
        canon, closed_k, ws_k, bs_k = _canonical(pattern, factors, closed, b_factors)
        if canon in classes:
            entry = classes[canon]
            entry[3] += 1
            if pairing < entry[4]:
                entry[4] = pairing
        else:
            classes[canon] = [closed_k, ws_k, bs_k, 1, pairing]
    return [
        ContractionTerm(
            pattern=pattern,
            w_factors=tuple(classes[canon][0]) + tuple(classes[canon][1]),
            b_factors=tuple(classes[canon][2]),
            multiplicity=classes[canon][3],
            representative=tuple(classes[canon][4]),
            canonical=canon,
        )
        for canon in sorted(classes)
    ]


def classify_cycles(term: ContractionTerm) -> str:
    """Canonical text form of a term's factor structure."""
    return term.canonical


# -- evaluation ---------------------------------------------------------------


def _w_lookup(w_matrices, order):
    if hasattr(w_matrices, "w"):
        return w_matrices.w(order)
    try:
        return w_matrices[order]
    except (KeyError, IndexError):
        raise ValueError(f"resolvent order {order} not supplied") from None


def evaluate_term(
    term: ContractionTerm, w_matrices, bcal=None, prefactor: float = 1.0
) -> TermValue:
    """Numeric value of a term class: multiplicity * prefactor * class sum.

    Sums are evaluated as traces and matrix contractions via einsum, never
    by explicit loops over index tuples.  ``w_matrices`` is a mapping from
    order to matrix or an object with a ``w(order)`` method; ``bcal`` is
    required when the pattern has dressed traces.
    """
    scalar = 1.0 + 0.0j
    operands = []
    subscripts = []
    letters = {}

    def letter(v):
        if v not in letters:
            if len(letters) >= 26:
                raise ValueError("too many summation variables for einsum")
            letters[v] = string.ascii_lowercase[len(letters)]
        return letters[v]

    two_b = None
    for f in term.w_factors:
        if f[0] == "tr":
            w = _w_lookup(w_matrices, f[1])
            scalar *= np.trace(w)
            two_b = w.shape[0]
        else:
            n, a, b = f
            w = _w_lookup(w_matrices, n)
            operands.append(w)
            subscripts.append(letter(a) + letter(b))
            two_b = w.shape[0]
    if term.b_factors:
        if bcal is None:
            raise ValueError("pattern has dressed traces; bcal is required")
        bdag = bcal.conj().T
        for kind, a, b in term.b_factors:
            operands.append(bcal if kind == "B" else bdag)
            subscripts.append(letter(a) + letter(b))
        two_b = bcal.shape[0]
    if operands:
        expr = ",".join(subscripts) + "->"
        scalar *= np.einsum(expr, *operands, optimize="greedy")
    value = scalar * term.multiplicity * prefactor
    return TermValue(
        value=complex(value),
        two_b=int(two_b) if two_b is not None else 0,
        canonical=term.canonical,
    )


def evaluate_term_bruteforce(term: ContractionTerm, w1: np.ndarray, bcal=None) -> complex:
    """Value of one representative pairing by explicit index summation.

    Uses only the order-1 resolvent matrix and the raw (uncollapsed) factor
    list, so it is independent of both the chain-collapse logic and the
    einsum evaluation; feasible for small matrices only.
    """
    pattern = term.pattern
    raw = _raw_w_factors(pattern, term.representative)
    b_factors = _b_factors(pattern)
    variables = sorted(
        {v for _, a, b in raw for v in (a, b)}
        | {v for _, a, b in b_factors for v in (a, b)}
    )
    index = {v: i for i, v in enumerate(variables)}
    two_b = w1.shape[0]
    bdag = bcal.conj().T if bcal is not None else None
    total = 0.0 + 0.0j
    for assignment in itertools.product(range(two_b), repeat=len(variables)):
        prod = 1.0 + 0.0j
        for _, a, b in raw:
            prod *= w1[assignment[index[a]], assignment[index[b]]]
            if prod == 0.0:
                break
        else:
            for kind, a, b in b_factors:
                m = bcal if kind == "B" else bdag
                prod *= m[assignment[index[a]], assignment[index[b]]]
            total += prod
    return total
