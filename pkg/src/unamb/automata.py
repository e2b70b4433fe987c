"""Finite automata with transition identities.

Transitions are numbered by their position in the transition tuple; two
runs are distinct when their transition-id sequences differ, which is the
notion of unambiguity used throughout.  Machines carry no epsilon moves.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .alphabet import Alphabet, FormatError
from .grammar import Grammar

Transition = tuple[str, int, str]  # (source, letter index, target)


class AutomatonError(ValueError):
    """Raised for malformed machines or unmet operation preconditions."""


def fresh_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    k = 2
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


@dataclass
class Automaton:
    alphabet: Alphabet
    states: tuple[str, ...]
    initial: tuple[str, ...]
    accepting: tuple[str, ...]
    transitions: tuple[Transition, ...]
    klass: str = field(default="NFA")  # "DFA" | "UFA" | "NFA"

    def __post_init__(self) -> None:
        self.validate()
        if self.klass == "NFA" and self.is_deterministic:
            self.klass = "DFA"

    def validate(self) -> None:
        if len(set(self.states)) != len(self.states):
            raise AutomatonError("duplicate state names")
        for s in self.states:
            if not s or any(ch.isspace() for ch in s):
                raise AutomatonError(f"invalid state name: {s!r}")
            if "|" in s or s.startswith("#"):
                raise AutomatonError(f"state name may not contain '|' or start with '#': {s!r}")
        declared = set(self.states)
        for group, label in ((self.initial, "initial"), (self.accepting, "accepting")):
            if len(set(group)) != len(group):
                raise AutomatonError(f"duplicate {label} states")
            for s in group:
                if s not in declared:
                    raise AutomatonError(f"{label} state {s!r} not declared")
        seen = set()
        for p, a, q in self.transitions:
            if p not in declared or q not in declared:
                raise AutomatonError(f"transition {p} -> {q} uses undeclared states")
            if not 0 <= a < len(self.alphabet):
                raise AutomatonError(f"letter index {a} outside the alphabet")
            if (p, a, q) in seen:
                raise AutomatonError(f"duplicate transition ({p}, {self.alphabet.name(a)}, {q})")
            seen.add((p, a, q))
        if self.klass not in ("DFA", "UFA", "NFA"):
            raise AutomatonError(f"unknown class {self.klass!r}")
        if self.klass == "DFA" and not self.is_deterministic:
            raise AutomatonError("class is DFA but the machine is nondeterministic")

    @property
    def is_deterministic(self) -> bool:
        if len(self.initial) != 1:
            return False
        seen = set()
        for p, a, _ in self.transitions:
            if (p, a) in seen:
                return False
            seen.add((p, a))
        return True

    @property
    def is_total(self) -> bool:
        """Every (state, letter) pair has at least one outgoing transition."""
        pairs = {(p, a) for p, a, _ in self.transitions}
        return all(
            (s, a) in pairs for s in self.states for a in range(len(self.alphabet))
        )

    def by_source(self) -> dict[str, list[tuple[int, int, str]]]:
        """state -> list of (transition id, letter, target)."""
        out: dict[str, list[tuple[int, int, str]]] = {s: [] for s in self.states}
        for tid, (p, a, q) in enumerate(self.transitions):
            out[p].append((tid, a, q))
        return out

    def step(self, states: frozenset[str], letter: int) -> frozenset[str]:
        return frozenset(q for p, a, q in self.transitions if a == letter and p in states)

    def accepts(self, word: tuple[int, ...]) -> bool:
        cur = frozenset(self.initial)
        for letter in word:
            if not cur:
                return False
            cur = self.step(cur, letter)
        return any(s in cur for s in self.accepting)


# ---------------------------------------------------------------------------
# file format


def parse_automaton(text: str) -> Automaton:
    """Parse the automaton file format:

        alphabet: a b
        states: p q
        initial: p
        accepting: q
        p a q
        q b q

    Blank lines and '#' comments are ignored.
    """
    alphabet: Alphabet | None = None
    states: tuple[str, ...] | None = None
    initial: tuple[str, ...] | None = None
    accepting: tuple[str, ...] | None = None
    raw_transitions: list[tuple[str, str, str]] = []
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.strip()
        if not line or line.startswith("#"):
            continue
        for key in ("alphabet", "states", "initial", "accepting"):
            if line.startswith(key + ":"):
                fields = tuple(line[len(key) + 1:].split())
                if key == "alphabet":
                    alphabet = Alphabet(fields)
                elif key == "states":
                    states = fields
                elif key == "initial":
                    initial = fields
                else:
                    accepting = fields
                break
        else:
            fields3 = line.split()
            if len(fields3) != 3:
                raise FormatError(f"line {lineno}: expected 'state letter state'")
            raw_transitions.append((fields3[0], fields3[1], fields3[2]))
    if alphabet is None:
        raise FormatError("missing alphabet line")
    if states is None:
        raise FormatError("missing states line")
    if initial is None:
        raise FormatError("missing initial line")
    if accepting is None:
        raise FormatError("missing accepting line")
    transitions = tuple((p, alphabet.index(a), q) for p, a, q in raw_transitions)
    try:
        return Automaton(alphabet, states, initial, accepting, transitions)
    except AutomatonError as exc:
        raise FormatError(str(exc)) from exc


def print_automaton(a: Automaton) -> str:
    lines = [
        "alphabet: " + " ".join(a.alphabet.letters),
        "states: " + " ".join(a.states),
        "initial: " + " ".join(a.initial),
        "accepting: " + " ".join(a.accepting),
    ]
    for p, letter, q in a.transitions:
        lines.append(f"{p} {a.alphabet.name(letter)} {q}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# structural operations


def trim_automaton(a: Automaton) -> Automaton:
    """Keep states both reachable from an initial state and co-reachable to
    an accepting state; only those can appear on accepting runs."""
    fwd: dict[str, list[str]] = {s: [] for s in a.states}
    bwd: dict[str, list[str]] = {s: [] for s in a.states}
    for p, _, q in a.transitions:
        fwd[p].append(q)
        bwd[q].append(p)

    def closure(seed, graph):
        seen = set(seed)
        todo = list(seed)
        while todo:
            x = todo.pop()
            for y in graph[x]:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        return seen

    keep = closure(a.initial, fwd) & closure(a.accepting, bwd)
    return Automaton(
        a.alphabet,
        tuple(s for s in a.states if s in keep),
        tuple(s for s in a.initial if s in keep),
        tuple(s for s in a.accepting if s in keep),
        tuple(t for t in a.transitions if t[0] in keep and t[2] in keep),
    )


def totalize(a: Automaton) -> Automaton:
    """Add a non-accepting sink so every (state, letter) pair has a move.
    Already-total machines are returned unchanged."""
    if a.is_total and a.states:
        return a
    taken = set(a.states)
    sink = fresh_name("sink", taken)
    states = a.states + (sink,)
    pairs = {(p, la) for p, la, _ in a.transitions}
    extra = [
        (s, la, sink)
        for s in states
        for la in range(len(a.alphabet))
        if (s, la) not in pairs
    ]
    klass = a.klass if a.klass != "DFA" else "DFA"
    return Automaton(a.alphabet, states, a.initial, a.accepting,
                     a.transitions + tuple(extra), klass)


def single_initial(a: Automaton) -> Automaton:
    """Normalise to exactly one initial state (fresh start that copies the
    outgoing transitions of all old initials; accepting iff one of them is)."""
    if len(a.initial) == 1:
        return a
    taken = set(a.states)
    start = fresh_name("start", taken)
    old = set(a.initial)
    extra = [(start, la, q) for p, la, q in a.transitions if p in old]
    # Copies of distinct transitions can coincide; the validator forbids
    # duplicates, so deduplicate while preserving order.
    extra = list(dict.fromkeys(extra))
    accepting = a.accepting + ((start,) if any(s in old for s in a.accepting) else ())
    return Automaton(a.alphabet, a.states + (start,), (start,), accepting,
                     a.transitions + tuple(extra))


def dfa_complement(a: Automaton) -> Automaton:
    """Complement of a deterministic machine: totalise, then swap accepting
    states.  The result is a total DFA."""
    if not a.is_deterministic:
        raise AutomatonError("complement requires a deterministic automaton")
    if not a.initial:
        raise AutomatonError("complement requires an initial state")
    t = totalize(a)
    accepting = tuple(s for s in t.states if s not in set(t.accepting))
    return Automaton(t.alphabet, t.states, t.initial, accepting, t.transitions, "DFA")


def product_automaton(a: Automaton, b: Automaton) -> Automaton:
    """Synchronous product accepting the intersection.  A run of the product
    is a pair (run of a, run of b), so the product of an unambiguous machine
    with a deterministic one stays unambiguous."""
    if a.alphabet != b.alphabet:
        raise AutomatonError("product requires identical alphabets")
    taken: set[str] = set()
    names: dict[tuple[str, str], str] = {}
    for p in a.states:
        for q in b.states:
            name = fresh_name(f"{p}&{q}", taken)
            names[(p, q)] = name
            taken.add(name)
    trans = [
        (names[(p1, q1)], a1, names[(p2, q2)])
        for p1, a1, p2 in a.transitions
        for q1, b1, q2 in b.transitions
        if a1 == b1
    ]
    return Automaton(
        a.alphabet,
        tuple(names[(p, q)] for p in a.states for q in b.states),
        tuple(names[(p, q)] for p in a.initial for q in b.initial),
        tuple(names[(p, q)] for p in a.accepting for q in b.accepting),
        tuple(trans),
    )


def disjoint_union_automata(a: Automaton, b: Automaton) -> Automaton:
    """Side-by-side union; accepts L(a) | L(b)."""
    if a.alphabet != b.alphabet:
        raise AutomatonError("union requires identical alphabets")
    taken = set(a.states)
    rename = {s: fresh_name(s, taken) for s in b.states}
    for s in rename.values():
        taken.add(s)
    return Automaton(
        a.alphabet,
        a.states + tuple(rename[s] for s in b.states),
        a.initial + tuple(rename[s] for s in b.initial),
        a.accepting + tuple(rename[s] for s in b.accepting),
        a.transitions + tuple((rename[p], la, rename[q]) for p, la, q in b.transitions),
    )


def concat_automata(a: Automaton, b: Automaton) -> Automaton:
    """Machine for L(a)L(b) without epsilon moves: bridge transitions jump
    from accepting states of a into b's second states, so every accepting
    run decomposes as (a-run on u, split, b-run on v).  An a-accepting
    initial state covers the empty left part; when b is nullable, a's
    accepting states stay accepting to cover the empty right part."""
    if a.alphabet != b.alphabet:
        raise AutomatonError("concatenation requires identical alphabets")
    taken = set(a.states)
    rename = {s: fresh_name(s, taken) for s in b.states}
    for s in rename.values():
        taken.add(s)
    b_initial = set(b.initial)
    # distinct b-initials can step to the same target on the same letter;
    # the resulting bridge triples collapse, which only loses run counts
    # when b was already ambiguous in its first letter
    bridge = list(dict.fromkeys(
        (f, la, rename[q])
        for f in a.accepting
        for p, la, q in b.transitions
        if p in b_initial
    ))
    b_accepts_eps = any(s in b_initial for s in b.accepting)
    accepting = tuple(rename[s] for s in b.accepting) + (a.accepting if b_accepts_eps else ())
    return Automaton(
        a.alphabet,
        a.states + tuple(rename[s] for s in b.states),
        a.initial,
        tuple(dict.fromkeys(accepting)),
        a.transitions + tuple((rename[p], la, rename[q]) for p, la, q in b.transitions) + tuple(bridge),
    )


# ---------------------------------------------------------------------------
# decision procedures


def subset_oracle_inclusion(
    a: Automaton, b: Automaton, max_states: int = 1 << 20
) -> tuple[bool, tuple[int, ...] | None]:
    """Exact L(a) subseteq L(b) via breadth-first search over the pair
    (subset of a-states, subset of b-states); returns (holds, witness) where
    the witness is a shortest word in L(a) minus L(b)."""
    if a.alphabet != b.alphabet:
        raise AutomatonError("inclusion oracle requires identical alphabets")
    acc_a, acc_b = set(a.accepting), set(b.accepting)
    start = (frozenset(a.initial), frozenset(b.initial))
    seen = {start}
    queue: deque[tuple[frozenset[str], frozenset[str], tuple[int, ...]]] = deque(
        [(start[0], start[1], ())]
    )
    while queue:
        sa, sb, word = queue.popleft()
        if any(s in acc_a for s in sa) and not any(s in acc_b for s in sb):
            return False, word
        for letter in range(len(a.alphabet)):
            na, nb = a.step(sa, letter), b.step(sb, letter)
            if not na:
                continue  # nothing of L(a) survives down this branch
            key = (na, nb)
            if key not in seen:
                seen.add(key)
                if len(seen) > max_states:
                    raise AutomatonError("inclusion oracle exceeded its state budget")
                queue.append((na, nb, word + (letter,)))
    return True, None


def check_unambiguous_nfa(a: Automaton) -> tuple[bool, tuple[int, ...] | None]:
    """Exact unambiguity decision by the self-product construction on the
    trimmed machine: track pairs of runs plus a flag recording whether the
    two transition-id sequences have diverged.  Returns (ok, witness); a
    witness is a shortest word with two distinct accepting runs.  Upgrades
    a.klass to UFA on success."""
    t = trim_automaton(a)
    acc = set(t.accepting)
    by_src = t.by_source()
    seen: set[tuple[str, str, bool]] = set()
    queue: deque[tuple[str, str, bool, tuple[int, ...]]] = deque()
    for p in t.initial:
        for q in t.initial:
            flag = p != q
            if (p, q, flag) not in seen:
                seen.add((p, q, flag))
                queue.append((p, q, flag, ()))
    while queue:
        p, q, flag, word = queue.popleft()
        if flag and p in acc and q in acc:
            return False, word
        for tid1, la, p2 in by_src[p]:
            for tid2, lb, q2 in by_src[q]:
                if la != lb:
                    continue
                nflag = flag or tid1 != tid2
                key = (p2, q2, nflag)
                if key not in seen:
                    seen.add(key)
                    queue.append((p2, q2, nflag, word + (la,)))
    if a.klass == "NFA":
        a.klass = "UFA"
    return True, None


def count_accepting_paths(a: Automaton, max_len: int) -> list[int]:
    """f(n) = number of accepting transition-id paths of length n, exact.
    For unambiguous machines this equals the number of accepted words."""
    vec = {s: 0 for s in a.states}
    for s in a.initial:
        vec[s] = 1
    acc = set(a.accepting)
    out = [sum(v for s, v in vec.items() if s in acc)]
    for _ in range(max_len):
        nxt = {s: 0 for s in a.states}
        for p, _, q in a.transitions:
            if vec[p]:
                nxt[q] += vec[p]
        vec = nxt
        out.append(sum(v for s, v in vec.items() if s in acc))
    return out


def shortest_rejected_word(
    a: Automaton, max_len: int, max_states: int = 1 << 20
) -> tuple[int, ...] | None:
    """Shortest word not accepted, by BFS over the subset construction."""
    acc = set(a.accepting)
    start = frozenset(a.initial)
    seen = {start}
    queue: deque[tuple[frozenset[str], tuple[int, ...]]] = deque([(start, ())])
    while queue:
        cur, word = queue.popleft()
        if not any(s in acc for s in cur):
            return word
        if len(word) >= max_len:
            continue
        for letter in range(len(a.alphabet)):
            nxt = a.step(cur, letter)
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > max_states:
                    raise AutomatonError("subset search exceeded its state budget")
                queue.append((nxt, word + (letter,)))
    return None


def shortest_accepted_word(a: Automaton) -> tuple[int, ...] | None:
    t = trim_automaton(a)
    if not t.initial:
        return None
    acc = set(t.accepting)
    seen = set(t.initial)
    queue: deque[tuple[str, tuple[int, ...]]] = deque((s, ()) for s in t.initial)
    by_src = t.by_source()
    while queue:
        s, word = queue.popleft()
        if s in acc:
            return word
        for _, la, q in by_src[s]:
            if q not in seen:
                seen.add(q)
                queue.append((q, word + (la,)))
    return None


# ---------------------------------------------------------------------------
# conversion to a right-linear grammar


def automaton_to_right_linear(a: Automaton, prefix: str = "Q_") -> Grammar:
    """Short-GNF right-linear grammar with L(grammar) = L(a).  Runs map
    bijectively to derivations, so a DFA (or any unambiguous machine with a
    single initial state) yields an unambiguous grammar."""
    if len(a.initial) != 1:
        a = single_initial(a)
    taken = {letter for letter in a.alphabet.letters}
    names: dict[str, str] = {}
    for s in a.states:
        name = fresh_name(prefix + s, taken)
        names[s] = name
        taken.add(name)
    eps_name = fresh_name(prefix + "eps", taken)
    productions: dict[str, list[tuple[str, ...]]] = {names[s]: [] for s in a.states}
    acc = set(a.accepting)
    for s in a.states:
        if s in acc:
            productions[names[s]].append(())
    for p, la, q in a.transitions:
        productions[names[p]].append((a.alphabet.name(la), names[q], eps_name))
    productions[eps_name] = [()]
    start = names[a.initial[0]]
    status = "claimed" if a.klass in ("DFA", "UFA") else "unknown"
    return Grammar(a.alphabet, start, productions, unambiguity_status=status)
