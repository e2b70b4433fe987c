"""Conversion to short Greibach normal form.

Short GNF allows exactly two body shapes: the empty body, and
(letter, nonterminal, nonterminal).  The conversion pipeline is

    trim -> epsilon elimination -> unit removal -> left-recursion
    elimination -> head substitution -> terminal wrapping ->
    binarisation -> padding with an epsilon nonterminal

with a fresh start symbol added at the end (plus an epsilon production
when the original start was nullable).  Every stage preserves the
language; on unambiguous inputs each stage also preserves the number of
derivation trees per word, so unambiguity survives the conversion.

Grammars in which some word has infinitely many trees cannot be
converted faithfully (short GNF forces finite counts); those show up as
unit cycles after epsilon elimination and raise UnitCycleError.
"""

from __future__ import annotations

from .grammar import Body, Grammar, GrammarError, nullable_set, trim


class UnitCycleError(GrammarError):
    """A reachable, productive cycle of unit productions: some word has
    infinitely many derivation trees, so no count-preserving conversion
    exists."""


def _fresh(base: str, taken: set[str]) -> str:
    name = base
    k = 2
    while name in taken:
        name = f"{base}{k}"
        k += 1
    taken.add(name)
    return name


def _dedupe(bodies: list[Body]) -> list[Body]:
    return list(dict.fromkeys(bodies))


def _eliminate_epsilon(prods: dict[str, list[Body]], nullable: set[str]) -> dict[str, list[Body]]:
    """Drop nullable occurrences in all combinations; remove empty bodies.
    Duplicates arising here only happen for ambiguous inputs."""
    out: dict[str, list[Body]] = {}
    for lhs, bodies in prods.items():
        new: list[Body] = []
        for body in bodies:
            variants: list[tuple[str, ...]] = [()]
            for sym in body:
                if sym in nullable:
                    variants = [v + (sym,) for v in variants] + variants
                else:
                    variants = [v + (sym,) for v in variants]
            for v in variants:
                if v:
                    new.append(v)
        out[lhs] = _dedupe(new)
    return out


def _remove_units(prods: dict[str, list[Body]]) -> dict[str, list[Body]]:
    """Replace unit productions X -> Y by Y's non-unit bodies, transitively.
    The unit graph must be acyclic."""
    nts = set(prods)
    unit_targets = {
        lhs: [b[0] for b in bodies if len(b) == 1 and b[0] in nts]
        for lhs, bodies in prods.items()
    }
    # topological order of the unit graph, cycles rejected
    order: list[str] = []
    mark: dict[str, int] = {}  # 1 = on stack, 2 = done

    for root in prods:
        if mark.get(root):
            continue
        stack: list[tuple[str, int]] = [(root, 0)]
        while stack:
            node, idx = stack.pop()
            if idx == 0:
                if mark.get(node) == 2:
                    continue
                mark[node] = 1
            targets = unit_targets[node]
            if idx < len(targets):
                stack.append((node, idx + 1))
                nxt = targets[idx]
                if mark.get(nxt) == 1:
                    raise UnitCycleError(
                        f"unit-production cycle through {nxt!r}: some word has "
                        "infinitely many derivation trees"
                    )
                if mark.get(nxt) != 2:
                    stack.append((nxt, 0))
            else:
                mark[node] = 2
                order.append(node)

    resolved: dict[str, list[Body]] = {}
    for lhs in order:  # dependencies first
        new: list[Body] = []
        for body in prods[lhs]:
            if len(body) == 1 and body[0] in nts:
                new.extend(resolved[body[0]])
            else:
                new.append(body)
        resolved[lhs] = _dedupe(new)
    return {lhs: resolved[lhs] for lhs in prods}


def _eliminate_left_recursion(
    prods: dict[str, list[Body]], taken: set[str]
) -> dict[str, list[Body]]:
    """Paull's algorithm.  Afterwards no nonterminal can derive a sentential
    form starting with itself, so head substitution terminates."""
    names = list(prods)
    pos = {x: i for i, x in enumerate(names)}
    nts = set(names)
    out = {lhs: list(bodies) for lhs, bodies in prods.items()}
    for i, a_i in enumerate(names):
        # substitute earlier nonterminals out of leading position
        changed = True
        while changed:
            changed = False
            new: list[Body] = []
            for body in out[a_i]:
                head = body[0]
                if head in nts and pos[head] < i:
                    new.extend(d + body[1:] for d in out[head])
                    changed = True
                else:
                    new.append(body)
            out[a_i] = _dedupe(new)
        rec = [b[1:] for b in out[a_i] if b[0] == a_i]
        base = [b for b in out[a_i] if b[0] != a_i]
        if not rec:
            continue
        if not base:
            # no base case: the nonterminal derives nothing
            out[a_i] = []
            continue
        r = _fresh(f"R_{a_i}", taken)
        out[a_i] = _dedupe(base + [b + (r,) for b in base])
        out[r] = _dedupe([a for a in rec if a] + [a + (r,) for a in rec if a])
        pos[r] = len(pos)
    return out


def _substitute_heads(
    prods: dict[str, list[Body]], terminals: set[str]
) -> dict[str, list[Body]]:
    """Rewrite every body to start with a terminal by expanding leading
    nonterminals, in topological order of the leading-symbol graph (acyclic
    once left recursion is gone)."""
    heads = {
        lhs: {b[0] for b in bodies if b and b[0] not in terminals}
        for lhs, bodies in prods.items()
    }
    order: list[str] = []
    mark: dict[str, int] = {}
    for root in prods:
        if mark.get(root):
            continue
        stack = [(root, iter(heads[root]))]
        mark[root] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if mark.get(nxt) == 1:
                    raise GrammarError(
                        f"leading-symbol cycle at {nxt!r} after left-recursion elimination"
                    )
                if not mark.get(nxt):
                    mark[nxt] = 1
                    stack.append((nxt, iter(heads[nxt])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                mark[node] = 2
                order.append(node)
    done: dict[str, list[Body]] = {}
    for lhs in order:
        new: list[Body] = []
        for body in prods[lhs]:
            if body and body[0] not in terminals:
                new.extend(d + body[1:] for d in done[body[0]])
            else:
                new.append(body)
        done[lhs] = _dedupe(new)
    return {lhs: done[lhs] for lhs in prods}


def to_short_gnf(g: Grammar) -> Grammar:
    """Convert to short GNF.  Idempotent: grammars already in short GNF are
    returned unchanged.  Raises UnitCycleError when some word provably has
    infinitely many derivation trees."""
    if g.is_short_gnf:
        return g
    trimmed, _ = trim(g)
    nullable = nullable_set(trimmed)
    start_nullable = trimmed.start in nullable
    terminals = set(g.alphabet.letters)
    taken = set(terminals) | set(trimmed.productions)

    prods = _eliminate_epsilon(trimmed.productions, nullable)
    prods = _remove_units(prods)
    prods = _eliminate_left_recursion(prods, taken)
    prods = _substitute_heads(prods, terminals)

    # wrap terminals occurring after the head
    wrappers: dict[str, str] = {}
    wrapped: dict[str, list[Body]] = {}
    for lhs, bodies in prods.items():
        new = []
        for body in bodies:
            tail = []
            for sym in body[1:]:
                if sym in terminals:
                    if sym not in wrappers:
                        wrappers[sym] = _fresh(f"T_{sym}", taken)
                    tail.append(wrappers[sym])
                else:
                    tail.append(sym)
            new.append((body[0], *tail))
        wrapped[lhs] = new
    for letter, wrap in wrappers.items():
        wrapped[wrap] = [(letter,)]

    # binarise long tails with suffix symbols; each suffix symbol expands the
    # productions of its first element, so the set of needed suffixes is the
    # finite closure of body tails under taking suffixes
    eps_nt = _fresh("E", taken)
    seq_names: dict[tuple[str, ...], str] = {}
    pending: list[tuple[str, ...]] = []

    def seq(symbols: tuple[str, ...]) -> str:
        if not symbols:
            return eps_nt
        if len(symbols) == 1:
            return symbols[0]
        if symbols not in seq_names:
            seq_names[symbols] = _fresh("G_" + ".".join(symbols), taken)
            pending.append(symbols)
        return seq_names[symbols]

    final: dict[str, list[Body]] = {}
    for lhs, bodies in wrapped.items():
        final[lhs] = [
            body if len(body) <= 3 else (body[0], body[1], seq(body[2:]))
            for body in bodies
        ]
    while pending:
        symbols = pending.pop()
        name = seq_names[symbols]
        head, rest = symbols[0], symbols[1:]
        final[name] = _dedupe(
            [(b[0], seq(b[1:]), seq(rest)) for b in wrapped[head]]
        )

    # pad to (letter, nonterminal, nonterminal)
    for lhs, bodies in final.items():
        final[lhs] = [
            body if len(body) == 3 else (body + (eps_nt,) * (3 - len(body)))
            for body in bodies
        ]
    final[eps_nt] = [()]

    # fresh start; the epsilon production restores the empty word
    old_start_bodies = final.get(trimmed.start, [])
    start = _fresh("S0", taken)
    final[start] = ([()] if start_nullable else []) + list(old_start_bodies)

    status = "claimed" if g.unambiguity_status != "unknown" else "unknown"
    result = Grammar(g.alphabet, start, final, unambiguity_status=status)
    out, _ = trim(result)
    if not out.is_short_gnf:
        raise GrammarError("conversion failed to reach short GNF")  # internal check
    return out
