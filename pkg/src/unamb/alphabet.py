"""Finite alphabets and words.

A word is a tuple of 0-based letter indices into an ordered alphabet.
Letter names are arbitrary non-whitespace strings; indices, not names, are
what the engines operate on, so renaming letters never changes semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class FormatError(ValueError):
    """Raised when a textual input does not follow its file format."""


@dataclass(frozen=True)
class Alphabet:
    """An ordered, duplicate-free tuple of letter names."""

    letters: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if len(set(self.letters)) != len(self.letters):
            raise FormatError(f"duplicate letters in alphabet: {self.letters}")
        for name in self.letters:
            # '|' separates grammar alternatives and a leading '#' starts a
            # comment, so names carrying either would not round-trip.
            if not name or any(ch.isspace() for ch in name):
                raise FormatError(f"letter name must be non-empty and whitespace-free: {name!r}")
            if "|" in name or name.startswith("#"):
                raise FormatError(f"letter name may not contain '|' or start with '#': {name!r}")
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.letters)})

    def __len__(self) -> int:
        return len(self.letters)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise FormatError(f"letter {name!r} is not in alphabet {self.letters}") from None

    def name(self, index: int) -> str:
        return self.letters[index]

    def word_from_names(self, names: list[str] | tuple[str, ...]) -> tuple[int, ...]:
        return tuple(self.index(a) for a in names)

    def format_word(self, word: tuple[int, ...]) -> str:
        """Render a word for reports: letters joined by spaces, or 'eps'."""
        if not word:
            return "eps"
        return " ".join(self.letters[i] for i in word)


def encode_word(word: tuple[int, ...], base: int) -> tuple[int, int]:
    """Pack a word into (length, integer code); codes order words of one
    length lexicographically, which the bounded-language sets rely on."""
    code = 0
    for letter in word:
        code = code * base + letter
    return len(word), code


def decode_word(length: int, code: int, base: int) -> tuple[int, ...]:
    out = [0] * length
    for pos in range(length - 1, -1, -1):
        code, out[pos] = divmod(code, base)
    return tuple(out)
