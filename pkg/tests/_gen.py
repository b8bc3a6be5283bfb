"""Random instance generators shared by the test modules."""
from __future__ import annotations

import random
from itertools import product

from pdverify.lagrangian import finite_instance
from pdverify.lra import parse_prenex
from pdverify.systems import ExplicitTS


def random_table(rng: random.Random, max_x: int = 6, max_y: int = 6, values=(-1, 0, 1)):
    xs = list(range(rng.randint(1, max_x)))
    ys = list(range(rng.randint(1, max_y)))
    table = {(x, y): rng.choice(values) for x in xs for y in ys}
    return xs, ys, table


def table_instance(xs, ys, table, codomain=(-1, 0, 1)):
    return finite_instance(lambda x, y: table[(x, y)], xs, ys, codomain)


def monotone_instance(rng: random.Random, max_items: int = 4, max_x: int = 6):
    """Y = subsets of a few items joined by union, L(x, y) = max of per-item scores
    (-1 on the empty set), so L is monotone in y."""
    from itertools import combinations

    items = list(range(rng.randint(1, max_items)))
    xs = list(range(rng.randint(1, max_x)))
    score = {(x, i): rng.choice((-1, 0, 1)) for x in xs for i in items}
    ys = [frozenset(c) for k in range(len(items) + 1) for c in combinations(items, k)]

    def L(x, y):
        return max((score[x, i] for i in y), default=-1)

    return finite_instance(L, xs, ys, join_y=frozenset.union, initial_y=frozenset())


def random_system(rng: random.Random, max_states: int = 5, p_trans: float = 0.3) -> ExplicitTS:
    states = tuple(range(rng.randint(1, max_states)))
    init = tuple(s for s in states if rng.random() < 0.35) or (states[0],)
    trans = tuple((s, t) for s in states for t in states if rng.random() < p_trans)
    bad = tuple(s for s in states if rng.random() < 0.3)
    return ExplicitTS(states, init, trans, bad)


def all_systems(n: int):
    """Every explicit system on ``n`` states with a non-empty init set and no bad states."""
    states = tuple(range(n))
    pairs = [(s, t) for s in states for t in states]
    for init_bits in product((False, True), repeat=n):
        if not any(init_bits):
            continue
        init = tuple(s for s, b in zip(states, init_bits) if b)
        for bits in product((False, True), repeat=len(pairs)):
            yield ExplicitTS(states, init, tuple(p for p, b in zip(pairs, bits) if b))


def sequences(states, max_len: int, first=None, last=None):
    """State sequences of length 1..max_len, optionally constrained at both ends."""
    out = []
    for n in range(1, max_len + 1):
        for seq in product(states, repeat=n):
            if first is not None and seq[0] not in first:
                continue
            if last is not None and seq[-1] not in last:
                continue
            out.append(seq)
    return out


# quantified sentences ------------------------------------------------------------

def _atom(rng: random.Random, vs) -> str:
    parts = []
    for v in rng.sample(vs, rng.randint(1, min(2, len(vs)))):
        c = rng.choice([1, -1, 2])
        parts.append(v if c == 1 else f"(* {c} {v})")
    lhs = parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"
    return f"({rng.choice(['<', '<=', '='])} {lhs} {rng.randint(-2, 2)})"


def _qf(rng: random.Random, vs, depth: int) -> str:
    if depth == 0 or rng.random() < 0.3:
        return _atom(rng, vs)
    return f"({rng.choice(['and', 'or'])} {_qf(rng, vs, depth - 1)} {_qf(rng, vs, depth - 1)})"


def random_sentence(rng: random.Random, max_quants: int = 4):
    vs = [f"v{i}" for i in range(rng.randint(1, max_quants))]
    text = _qf(rng, vs, 3)
    for v in reversed(vs):
        text = f"({rng.choice(['exists', 'forall'])} ({v}) {text})"
    return parse_prenex(text)


# finite truncations of the safety Lagrangians --------------------------------------

def cegar_oracle_instance(ts: ExplicitTS):
    """l_cegar with X = init-to-bad sequences of length <= |S| and Y = singleton subsets plus the empty set."""
    from pdverify.cegar import PredicatePool, CegarConfig, cegar_instance
    from pdverify.ice import powerset_preds

    preds = powerset_preds(ts.states)
    xs = sequences(ts.states, len(ts.states), ts.init, ts.bad) or [ts.init[:1]]
    ys = [frozenset()] + [frozenset([p]) for p in preds]
    L = cegar_instance(ts, PredicatePool.of(preds), CegarConfig())
    L.enum_x = lambda: iter(xs)
    L.enum_y = lambda: iter(ys)
    return L


def subset_pool(ts: ExplicitTS):
    from pdverify.cegar import PredicatePool
    from pdverify.systems import explicit_pred
    from itertools import combinations

    preds = [explicit_pred("{" + ",".join(map(str, c)) + "}", c, k)
             for k in range(len(ts.states) + 1) for c in combinations(ts.states, k)]
    return PredicatePool.of(preds)


# strategy skeletons -------------------------------------------------------------

def _choice_terms(ctx, consts):
    from pdverify.lra import LinTerm

    return [LinTerm.const_term(c) for c in consts] + [LinTerm.var(v) for v in ctx]


def enum_skeletons(phi, side: str = "sat", consts=(0, 1), max_branches: int = 2, ctx=()):
    """Every skeleton of the given side whose choice nodes pick 1..max_branches
    distinct terms from the constants and the variables bound so far."""
    from itertools import combinations, product as cart
    from pdverify.lra import EXISTS
    from pdverify.skeleton import Choice, Leaf, Pass

    if not phi.prefix:
        return [Leaf()]
    q, v = phi.head()
    rest = enum_skeletons(phi.body(), side, consts, max_branches, ctx + (v,))
    if (q == EXISTS) != (side == "sat"):
        return [Pass(v, c) for c in rest]
    below = enum_skeletons(phi.body(), side, consts, max_branches, ctx)
    out = []
    terms = _choice_terms(ctx, consts)
    for k in range(1, max_branches + 1):
        for ts in combinations(terms, k):
            for kids in cart(below, repeat=k):
                out.append(Choice(v, tuple(zip(ts, kids))))
    return out


def below(sk):
    """Every skeleton ``a`` with ``leq(a, sk)``."""
    from itertools import combinations, product as cart
    from pdverify.skeleton import Choice, Leaf, Pass

    if isinstance(sk, Leaf):
        return [sk]
    if isinstance(sk, Pass):
        return [Pass(sk.var, c) for c in below(sk.child)]
    out = []
    for k in range(1, len(sk.branches) + 1):
        for bs in combinations(sk.branches, k):
            for kids in cart(*(below(c) for _, c in bs)):
                out.append(Choice(sk.var, tuple((t, c) for (t, _), c in zip(bs, kids))))
    return out


def random_skeleton(rng: random.Random, phi, side: str = "sat", ctx=()):
    from pdverify.lra import EXISTS, LinTerm
    from pdverify.skeleton import Choice, Leaf, Pass

    if not phi.prefix:
        return Leaf()
    q, v = phi.head()
    if (q == EXISTS) != (side == "sat"):
        return Pass(v, random_skeleton(rng, phi.body(), side, ctx + (v,)))
    branches = []
    for _ in range(rng.randint(1, 2)):
        coeffs = {u: rng.choice((-1, 0, 1, 2)) for u in ctx}
        t = LinTerm.build(coeffs, rng.randint(-3, 3))
        branches.append((t, random_skeleton(rng, phi.body(), side, ctx)))
    return Choice(v, tuple(branches))
