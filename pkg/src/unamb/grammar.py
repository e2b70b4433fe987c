"""Context-free grammars with exact derivation counting.

The counting engine is the backbone of every unambiguity check in this
package: a grammar is unambiguous up to length N exactly when, for every
n <= N, the total number of derivation trees over all words of length n
equals the number of distinct words of length n.  Both quantities are
computed here by independent dynamic programs.

Counts live in the semiring of naturals extended with infinity, because
grammars with erasing or unit cycles give some words infinitely many
trees.  Infinity is detected structurally (a positive cycle in the
same-length dependency graph), never by iteration caps, so every finite
count returned is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

from .alphabet import Alphabet, FormatError, decode_word

Body = tuple[str, ...]

_RESERVED = {"eps", "|", "->"}


class GrammarError(ValueError):
    """Raised for structurally invalid grammars or invalid grammar inputs."""


class InfiniteDerivationsError(GrammarError):
    """A word has infinitely many derivation trees (erasing or unit cycle)."""

    def __init__(self, word: tuple[int, ...], message: str):
        super().__init__(message)
        self.word = word


@dataclass
class Grammar:
    """A CFG over an ordered alphabet.

    `productions` maps each nonterminal to its ordered list of bodies; a
    body is a tuple of symbol names (letters or nonterminals), () meaning
    the empty word.  Nonterminal names and letter names must be disjoint.
    `unambiguity_status` is bookkeeping only: "unknown", "claimed", or
    "bounded-verified(N)" once a bounded check has passed.
    """

    alphabet: Alphabet
    start: str
    productions: dict[str, list[Body]]
    unambiguity_status: str = "unknown"

    def __post_init__(self) -> None:
        self.validate()

    @property
    def nonterminals(self) -> tuple[str, ...]:
        return tuple(self.productions.keys())

    def is_terminal(self, sym: str) -> bool:
        return sym in self.alphabet

    @property
    def is_short_gnf(self) -> bool:
        """True when every body is () or (letter, nonterminal, nonterminal)."""
        for bodies in self.productions.values():
            for body in bodies:
                if body == ():
                    continue
                if len(body) != 3 or not self.is_terminal(body[0]):
                    return False
                if self.is_terminal(body[1]) or self.is_terminal(body[2]):
                    return False
        return True

    def production_pairs(self):
        for lhs, bodies in self.productions.items():
            for body in bodies:
                yield lhs, body

    def size(self) -> int:
        return sum(1 + len(b) for _, b in self.production_pairs())

    def validate(self) -> None:
        nts = set(self.productions.keys())
        for name in nts:
            if not name or any(ch.isspace() for ch in name) or name in _RESERVED:
                raise GrammarError(f"invalid nonterminal name: {name!r}")
            if "|" in name or name.startswith("#"):
                raise GrammarError(f"nonterminal may not contain '|' or start with '#': {name!r}")
            if name in self.alphabet:
                raise GrammarError(f"symbol {name!r} is both a letter and a nonterminal")
        if self.start not in nts:
            raise GrammarError(f"start symbol {self.start!r} has no production entry")
        for lhs, bodies in self.productions.items():
            seen = set()
            for body in bodies:
                if body in seen:
                    raise GrammarError(f"duplicate production {lhs} -> {body}")
                seen.add(body)
                for sym in body:
                    if sym not in self.alphabet and sym not in nts:
                        raise GrammarError(f"undeclared symbol {sym!r} in a body of {lhs}")


# ---------------------------------------------------------------------------
# file format


def parse_grammar(text: str) -> Grammar:
    """Parse the grammar file format:

        alphabet: a b
        start: S
        S -> a S b S | eps
        X ->

    `eps` is the empty body; a production line with nothing after the
    arrow declares a nonterminal with no alternatives.  Blank lines and
    lines starting with '#' are ignored.
    """
    alphabet: Alphabet | None = None
    start: str | None = None
    productions: dict[str, list[Body]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("alphabet:"):
            if alphabet is not None:
                raise FormatError(f"line {lineno}: duplicate alphabet line")
            alphabet = Alphabet(tuple(line[len("alphabet:"):].split()))
            continue
        if line.startswith("start:"):
            if start is not None:
                raise FormatError(f"line {lineno}: duplicate start line")
            fields = line[len("start:"):].split()
            if len(fields) != 1:
                raise FormatError(f"line {lineno}: start line needs exactly one symbol")
            start = fields[0]
            continue
        if "->" not in line:
            raise FormatError(f"line {lineno}: expected a production line, got {line!r}")
        lhs_part, _, rhs_part = line.partition("->")
        lhs_fields = lhs_part.split()
        if len(lhs_fields) != 1:
            raise FormatError(f"line {lineno}: production head must be one symbol")
        lhs = lhs_fields[0]
        bodies = productions.setdefault(lhs, [])
        rhs_part = rhs_part.strip()
        if not rhs_part:
            continue
        for alt in rhs_part.split("|"):
            symbols = alt.split()
            if not symbols:
                raise FormatError(f"line {lineno}: empty alternative (use 'eps')")
            if symbols == ["eps"]:
                bodies.append(())
            elif "eps" in symbols:
                raise FormatError(f"line {lineno}: 'eps' cannot be mixed with symbols")
            else:
                bodies.append(tuple(symbols))
    if alphabet is None:
        raise FormatError("missing alphabet line")
    if start is None:
        raise FormatError("missing start line")
    try:
        return Grammar(alphabet, start, productions)
    except GrammarError as exc:
        raise FormatError(str(exc)) from exc


def print_grammar(g: Grammar) -> str:
    lines = ["alphabet: " + " ".join(g.alphabet.letters), "start: " + g.start]
    for lhs, bodies in g.productions.items():
        if not bodies:
            lines.append(f"{lhs} ->")
            continue
        alts = " | ".join("eps" if b == () else " ".join(b) for b in bodies)
        lines.append(f"{lhs} -> {alts}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# trimming


def trim(g: Grammar) -> tuple[Grammar, dict]:
    """Remove unproductive and unreachable nonterminals and the productions
    using them.  The start symbol survives even when its language is empty.
    """
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, bodies in g.productions.items():
            if lhs in productive:
                continue
            for body in bodies:
                if all(g.is_terminal(s) or s in productive for s in body):
                    productive.add(lhs)
                    changed = True
                    break

    def body_ok(body: Body) -> bool:
        return all(g.is_terminal(s) or s in productive for s in body)

    reachable = {g.start}
    frontier = [g.start]
    while frontier:
        x = frontier.pop()
        for body in g.productions.get(x, []):
            if not body_ok(body):
                continue
            for sym in body:
                if not g.is_terminal(sym) and sym not in reachable:
                    reachable.add(sym)
                    frontier.append(sym)

    kept = {
        lhs: [b for b in bodies if body_ok(b)]
        for lhs, bodies in g.productions.items()
        if lhs in reachable
    }
    if g.start not in kept:
        kept[g.start] = []
    removed = {
        "unproductive": sorted(set(g.productions) - productive),
        "unreachable": sorted(set(g.productions) - reachable),
    }
    out = Grammar(g.alphabet, g.start, kept, unambiguity_status=g.unambiguity_status)
    return out, removed


def is_language_empty(g: Grammar) -> bool:
    """L(g) = empty iff the start symbol is unproductive."""
    t, _ = trim(g)
    return not t.productions[t.start]


# ---------------------------------------------------------------------------
# counts over the naturals extended with infinity (None = infinite)

Count = int | None


def _cmul(a: Count, b: Count) -> Count:
    if a == 0 or b == 0:
        return 0
    if a is None or b is None:
        return None
    return a * b


def _cadd(a: Count, b: Count) -> Count:
    if a is None or b is None:
        return None
    return a + b


def _solve_affine_counts(
    names: list[str],
    base: dict[str, Count],
    edges: dict[str, list[tuple[str, Count]]],
) -> dict[str, Count]:
    """Least solution of c[X] = base[X] + sum coeff * c[Y] over N u {inf}.

    Coefficients are >= 1 or infinite (zero-coefficient edges must not be
    passed in).  c[X] is infinite exactly when X reaches, inside the
    subgraph of positive nodes, either an infinite-coefficient edge into a
    positive node or a cycle of positive nodes; on the rest the system is
    acyclic and solved exactly by memoised substitution.
    """
    pos: set[str] = {x for x in names if base.get(x, 0) != 0}
    changed = True
    while changed:
        changed = False
        for x in names:
            if x in pos:
                continue
            if any(y in pos for y, _ in edges.get(x, [])):
                pos.add(x)
                changed = True
    # Edges that matter: both endpoints positive (a zero target adds nothing).
    live = {
        x: [(y, c) for y, c in edges.get(x, []) if y in pos]
        for x in pos
    }
    bad: set[str] = set()
    for x in pos:
        for y, c in live[x]:
            if c is None:
                bad.add(x)
    # Nodes on cycles of the live graph, found via iterative removal of
    # nodes with no live successors (what remains feeds a cycle).
    succ_count = {x: len(live[x]) for x in pos}
    preds: dict[str, list[str]] = {x: [] for x in pos}
    for x in pos:
        for y, _ in live[x]:
            preds[y].append(x)
    queue = [x for x in pos if succ_count[x] == 0]
    feeds_cycle = set(pos)
    while queue:
        x = queue.pop()
        feeds_cycle.discard(x)
        for p in preds[x]:
            succ_count[p] -= 1
            if succ_count[p] == 0:
                queue.append(p)
    bad |= feeds_cycle
    # Everything reaching a bad node is infinite.
    infinite = set(bad)
    changed = True
    while changed:
        changed = False
        for x in pos:
            if x in infinite:
                continue
            if any(y in infinite for y, _ in live[x]):
                infinite.add(x)
                changed = True

    out: dict[str, Count] = {}
    order: list[str] = []
    marked: set[str] = set()
    for root in names:
        if root not in pos or root in infinite or root in marked:
            continue
        stack: list[tuple[str, int]] = [(root, 0)]
        marked.add(root)
        while stack:
            x, i = stack.pop()
            succs = live.get(x, [])
            while i < len(succs) and succs[i][0] in marked:
                i += 1
            if i < len(succs):
                stack.append((x, i + 1))
                y = succs[i][0]
                marked.add(y)
                stack.append((y, 0))
            else:
                order.append(x)
    for x in order:
        if x in infinite:
            continue
        total: Count = base.get(x, 0)
        for y, c in live.get(x, []):
            total = _cadd(total, _cmul(c, out.get(y, 0)))
        out[x] = total
    for x in names:
        if x in infinite:
            out[x] = None
        elif x not in pos:
            out[x] = 0
    return out


def nullable_set(g: Grammar) -> set[str]:
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, bodies in g.productions.items():
            if lhs in nullable:
                continue
            for body in bodies:
                if all(not g.is_terminal(s) and s in nullable for s in body):
                    nullable.add(lhs)
                    changed = True
                    break
    return nullable


def epsilon_tree_counts(g: Grammar) -> dict[str, Count]:
    """Number of derivation trees of the empty word per nonterminal."""
    names = list(g.productions.keys())
    nullable = nullable_set(g)
    # The affine solver wants base + linear edges, but eps-tree counting is
    # multiplicative across a body.  Rank bodies by how many nullable
    # nonterminals they contain: bodies of only-nullable symbols form a
    # monotone system solved by the same positive-cycle analysis, run on a
    # graph where each body contributes an edge per occurrence.  To keep
    # products exact we instead iterate substitution in dependency order,
    # using the cycle analysis just for infinity detection.
    dep: dict[str, list[tuple[str, Count]]] = {x: [] for x in names}
    basepos: dict[str, Count] = {x: 0 for x in names}
    for lhs, body in g.production_pairs():
        if any(g.is_terminal(s) or s not in nullable for s in body):
            continue
        if body == ():
            basepos[lhs] = _cadd(basepos[lhs], 1)
        else:
            for sym in body:
                dep[lhs].append((sym, 1))
    # Positive-cycle analysis on the erasing-dependency graph decides
    # which counts are infinite; products are then exact on the rest.
    marker = _solve_affine_counts(names, basepos, dep)
    infinite = {x for x in names if marker[x] is None}

    memo: dict[str, Count] = {}

    def count(x: str) -> Count:
        if x in infinite:
            return None
        if x not in nullable:
            return 0
        if x in memo:
            return memo[x]
        total: Count = 0
        for body in g.productions[x]:
            if any(g.is_terminal(s) or s not in nullable for s in body):
                continue
            prod: Count = 1
            for sym in body:
                prod = _cmul(prod, count(sym))
            total = _cadd(total, prod)
        memo[x] = total
        return total

    return {x: count(x) for x in names}


# ---------------------------------------------------------------------------
# derivation counting for a single word


def count_derivations(g: Grammar, word: tuple[int, ...]) -> int:
    """Exact number of distinct derivation trees of `word` from the start
    symbol.  Raises InfiniteDerivationsError when that number is infinite.
    Membership holds iff the result is >= 1.
    """
    m = len(g.alphabet)
    for letter in word:
        if not 0 <= letter < m:
            raise GrammarError(f"letter index {letter} outside alphabet of size {m}")
    eps = epsilon_tree_counts(g)
    n = len(word)
    if n == 0:
        value = eps[g.start]
        if value is None:
            raise InfiniteDerivationsError(word, "the empty word has infinitely many trees")
        return value

    names = list(g.productions.keys())
    table: dict[tuple[str, int, int], Count] = {}

    def value_at(sym: str, i: int, j: int) -> Count:
        if g.is_terminal(sym):
            if j - i == 1 and word[i] == g.alphabet.index(sym):
                return 1
            return 0
        if i == j:
            return eps[sym]
        return table[(sym, i, j)]

    for length in range(1, n + 1):
        for i in range(0, n - length + 1):
            j = i + length
            base: dict[str, Count] = {x: 0 for x in names}
            edges: dict[str, list[tuple[str, Count]]] = {x: [] for x in names}
            for lhs, body in g.production_pairs():
                if not body:
                    continue
                # Same-span linear part: one symbol takes the whole span,
                # every other symbol erases.
                for p, sym in enumerate(body):
                    if g.is_terminal(sym):
                        continue
                    coeff: Count = 1
                    for q, other in enumerate(body):
                        if q != p:
                            coeff = _cmul(coeff, value_at(other, i, i) if not g.is_terminal(other) else 0)
                    if coeff != 0:
                        edges[lhs].append((sym, coeff))
                # Splits where no nonterminal part covers the whole span:
                # every piece is strictly smaller, hence already computed.
                cur: dict[int, Count] = {i: 1}
                for sym in body:
                    nxt: dict[int, Count] = {}
                    if g.is_terminal(sym):
                        idx = g.alphabet.index(sym)
                        for pos, acc in cur.items():
                            if acc == 0 or pos >= j or word[pos] != idx:
                                continue
                            nxt[pos + 1] = _cadd(nxt.get(pos + 1, 0), acc)
                    else:
                        for pos, acc in cur.items():
                            if acc == 0:
                                continue
                            for end in range(pos, j + 1):
                                if end - pos == length:
                                    continue  # full-span nonterminal: linear case
                                v = value_at(sym, pos, end)
                                if v == 0:
                                    continue
                                nxt[end] = _cadd(nxt.get(end, 0), _cmul(acc, v))
                    cur = nxt
                if j in cur and cur[j] != 0:
                    base[lhs] = _cadd(base[lhs], cur[j])
            solved = _solve_affine_counts(names, base, edges)
            for x in names:
                table[(x, i, j)] = solved[x]

    result = table[(g.start, 0, n)]
    if result is None:
        raise InfiniteDerivationsError(word, "word has infinitely many derivation trees")
    return result


def derives(g: Grammar, word: tuple[int, ...]) -> bool:
    try:
        return count_derivations(g, word) >= 1
    except InfiniteDerivationsError:
        return True


# ---------------------------------------------------------------------------
# totals and bounded languages


def derivation_totals(g: Grammar, max_len: int) -> dict[str, list[Count]]:
    """t[X][n] = total derivation trees over all words of length n from X.

    Same-length dependencies (a body where one nonterminal carries the
    whole length and the rest erase) are solved by the affine-counts
    analysis, so infinite totals are detected exactly.
    """
    eps = epsilon_tree_counts(g)
    names = list(g.productions.keys())
    totals: dict[str, list[Count]] = {x: [eps[x]] for x in names}

    for n in range(1, max_len + 1):
        base: dict[str, Count] = {x: 0 for x in names}
        edges: dict[str, list[tuple[str, Count]]] = {x: [] for x in names}
        for lhs, body in g.production_pairs():
            if not body:
                continue
            for p, sym in enumerate(body):
                if g.is_terminal(sym):
                    continue
                coeff: Count = 1
                for q, other in enumerate(body):
                    if q != p:
                        coeff = _cmul(coeff, 0 if g.is_terminal(other) else eps[other])
                if coeff != 0:
                    edges[lhs].append((sym, coeff))
            cur: dict[int, Count] = {0: 1}
            for sym in body:
                nxt: dict[int, Count] = {}
                if g.is_terminal(sym):
                    for used, acc in cur.items():
                        if acc != 0 and used + 1 <= n:
                            nxt[used + 1] = _cadd(nxt.get(used + 1, 0), acc)
                else:
                    rows = totals[sym]
                    for used, acc in cur.items():
                        if acc == 0:
                            continue
                        for part in range(0, n - used + 1):
                            if part == n:
                                continue  # full-length nonterminal: linear case
                            v = rows[part]
                            if v == 0:
                                continue
                            nxt[used + part] = _cadd(nxt.get(used + part, 0), _cmul(acc, v))
                cur = nxt
            if n in cur and cur[n] != 0:
                base[lhs] = _cadd(base[lhs], cur[n])
        solved = _solve_affine_counts(names, base, edges)
        for x in names:
            totals[x].append(solved[x])
    return totals


def bounded_language(g: Grammar, max_len: int) -> dict[str, list[set[int]]]:
    """T[X][n] = the set of length-n words derivable from X, as packed codes.

    Short-GNF grammars are filled in one pass by increasing length; the
    general case iterates to a fixpoint (sets only grow and are bounded).
    """
    m = len(g.alphabet)
    pow_m = [m ** i for i in range(max_len + 1)]
    names = list(g.productions.keys())
    table: dict[str, list[set[int]]] = {x: [set() for _ in range(max_len + 1)] for x in names}

    def fold_body(body: Body, limit: int) -> list[set[int]]:
        cur: list[set[int]] = [set() for _ in range(limit + 1)]
        cur[0].add(0)
        for sym in body:
            nxt: list[set[int]] = [set() for _ in range(limit + 1)]
            if g.is_terminal(sym):
                idx = g.alphabet.index(sym)
                for i in range(limit):
                    if cur[i]:
                        nxt[i + 1] = {u * m + idx for u in cur[i]}
            else:
                rows = table[sym]
                for i in range(limit + 1):
                    su = cur[i]
                    if not su:
                        continue
                    for j in range(limit - i + 1):
                        sv = rows[j]
                        if not sv:
                            continue
                        shift = pow_m[j]
                        update = nxt[i + j].update
                        for u in su:
                            update(map((u * shift).__add__, sv))
            cur = nxt
        return cur

    if g.is_short_gnf:
        for lhs, body in g.production_pairs():
            if body == ():
                table[lhs][0].add(0)
        for n in range(1, max_len + 1):
            for lhs, body in g.production_pairs():
                if not body:
                    continue
                a = g.alphabet.index(body[0])
                ys, zs = table[body[1]], table[body[2]]
                target = table[lhs][n]
                for i in range(n):
                    su, sv = ys[i], zs[n - 1 - i]
                    if not su or not sv:
                        continue
                    shift = pow_m[n - 1 - i]
                    head = a * pow_m[n - 1]
                    update = target.update
                    for u in su:
                        update(map((head + u * shift).__add__, sv))
        return table

    # Refold a body only when a nonterminal it mentions grew last sweep;
    # the first sweep processes every body so terminal-only ones land.
    first = True
    dirty: set[str] = set()
    while first or dirty:
        grew: set[str] = set()
        for lhs, bodies in g.productions.items():
            rows = table[lhs]
            for body in bodies:
                if not first and not any(
                    not g.is_terminal(sym) and sym in dirty for sym in body
                ):
                    continue
                for n, words in enumerate(fold_body(body, max_len)):
                    before = len(rows[n])
                    rows[n] |= words
                    if len(rows[n]) != before:
                        grew.add(lhs)
        dirty = grew
        first = False
    return table


def language_words(g: Grammar, max_len: int) -> list[list[tuple[int, ...]]]:
    """Members of L(g) by length, decoded and sorted lexicographically."""
    m = len(g.alphabet)
    rows = bounded_language(g, max_len)[g.start]
    return [
        [decode_word(n, code, m) for code in sorted(rows[n])]
        for n in range(max_len + 1)
    ]


# ---------------------------------------------------------------------------
# bounded unambiguity


@dataclass
class UnambiguityReport:
    ok: bool
    bound: int
    witness: tuple[int, ...] | None = None
    witness_count: int | None = None  # None with ok=False means infinite

    def __str__(self) -> str:
        if self.ok:
            return f"unambiguous for all words of length <= {self.bound}"
        count = "infinite" if self.witness_count is None else str(self.witness_count)
        return f"ambiguous: witness {self.witness} has {count} derivation trees"


def check_unambiguous_bounded(g: Grammar, bound: int) -> UnambiguityReport:
    """Compare total derivation trees against distinct-word counts for every
    length <= bound; on a mismatch, hunt the shortest witness word and its
    exact tree count.  Passing sets g.unambiguity_status.
    """
    gt, _ = trim(g)
    members = bounded_language(gt, bound)[gt.start]
    totals = derivation_totals(gt, bound)[gt.start]
    m = len(g.alphabet)
    for n in range(bound + 1):
        want = len(members[n])
        if totals[n] == want:
            continue
        # Some member of this length has >= 2 trees (or infinitely many).
        for code in sorted(members[n]):
            word = decode_word(n, code, m)
            try:
                c = count_derivations(gt, word)
            except InfiniteDerivationsError:
                return UnambiguityReport(False, bound, word, None)
            if c >= 2:
                return UnambiguityReport(False, bound, word, c)
        raise GrammarError(
            f"internal inconsistency: totals {totals[n]} != members {want} at length {n} "
            "but no witness found"
        )
    g.unambiguity_status = f"bounded-verified({bound})"
    return UnambiguityReport(True, bound)
