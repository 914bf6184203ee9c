"""
Membership oracles for the automata laboratory.

Each language studied by the lab gets a simulation-free membership predicate and,
where useful, a member generator. These are the ground truth that machine verdicts
are audited against.

Inputs are accepted either as text or as token sequences. L_j words use the tokens
"a0", "a1", ...; every other language is written one character per symbol.
"""

import math
import re
from enum import Enum
from typing import List, Sequence, Tuple

KAPPA = "κ"

_LD_FIRST = 8


class LanguageId(str, Enum):
    LD = "ld"
    GCM = "gcm"
    JK = "jk"
    JK_PADDED = "jk-padded"
    ERB = "erb"
    LJ = "lj"


def parse_language(name: str) -> Tuple[LanguageId, int | None]:
    """Resolve a language name such as "erb" or "lj3" into its id and parameter.

    Raises:
        ValueError: If the name is unknown or L_j is requested with j < 2.
    """
    match = re.fullmatch(r"lj(\d+)", name)
    if match:
        j = int(match.group(1))
        if j < 2:
            raise ValueError(f"L_j needs j >= 2, got {j}")
        return LanguageId.LJ, j
    try:
        return LanguageId(name), None
    except ValueError:
        known = ", ".join(lang.value for lang in LanguageId if lang is not LanguageId.LJ)
        raise ValueError(f"unknown language {name!r}; expected {known} or lj<j>") from None


def _symbols(word) -> Tuple[str, ...]:
    return tuple(word)


def ld_members_up_to(limit: int) -> List[int]:
    """Lengths of all members of L_D up to `limit`.

    The lengths start at 8 and the i-th gap (i >= 1) is 2^i (i + 1) + 2, which is the
    number of steps the unary counter machine spends between consecutive accepting
    configurations.
    """
    members = []
    length = _LD_FIRST
    i = 1
    while length <= limit:
        members.append(length)
        length += 2**i * (i + 1) + 2
        i += 1
    return members


def is_member_ld(word) -> bool:
    symbols = _symbols(word)
    if any(symbol != "a" for symbol in symbols):
        return False
    return len(symbols) in ld_members_up_to(len(symbols))


def _split_ab(word) -> Tuple[int, int] | None:
    text = "".join(_symbols(word))
    match = re.fullmatch(r"(a*)(b*)", text)
    if not match:
        return None
    return len(match.group(1)), len(match.group(2))


def is_member_gcm(word) -> bool:
    """True iff word = a^m b^M with M a common multiple of 1..m (a^0 b^M always)."""
    counts = _split_ab(word)
    if counts is None:
        return False
    m, big_m = counts
    return big_m % math.lcm(*range(1, m + 1)) == 0


def is_member_jk(word) -> bool:
    counts = _split_ab(word)
    return counts is not None and counts[0] != counts[1]


def least_distinguishing_modulus(r: int, s: int) -> int | None:
    """Smallest l > 1 with r ≢ s (mod l); None iff r == s."""
    if r < 0 or s < 0:
        raise ValueError("counts must be non-negative")
    if r == s:
        return None
    modulus = 2
    while r % modulus == s % modulus:
        modulus += 1
    return modulus


def h_kappa(word):
    """Erase every κ, keeping the input's type (text or tuple)."""
    if isinstance(word, str):
        return word.replace(KAPPA, "")
    return tuple(symbol for symbol in word if symbol != KAPPA)


def is_member_jk_padded(word) -> bool:
    """Necessary condition for the padded language: the κ-free image is in L_{j≠k}.

    Where the κ's may sit is defined by the padded machine itself.
    """
    return is_member_jk(h_kappa(word))


def _binary(i: int) -> str:
    return format(i, "b")


def erb_member(k: int) -> str:
    """The member a(0)a(1)^R ... a(2k)a(2k+1)^R of the even-reversed-binaries language."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    blocks = [
        _binary(i) if i % 2 == 0 else _binary(i)[::-1] for i in range(2 * k + 2)
    ]
    return "".join("a" + block for block in blocks)


def is_member_erb(word) -> bool:
    text = "".join(_symbols(word))
    if not text.startswith("a") or set(text) - {"a", "0", "1"}:
        return False
    blocks = text[1:].split("a")
    if len(blocks) < 4 or len(blocks) % 2:
        return False
    return all(
        block == (_binary(i) if i % 2 == 0 else _binary(i)[::-1])
        for i, block in enumerate(blocks)
    )


def lj_tokens(word) -> Tuple[str, ...]:
    """Split an L_j word written as "a1a0a1a0a0" into its tokens."""
    if not isinstance(word, str):
        return tuple(word)
    compact = re.sub(r"\s+", "", word)
    tokens = re.findall(r"a\d+", compact)
    if "".join(tokens) != compact:
        raise ValueError(f"not an L_j word: {word!r}")
    return tuple(tokens)


def _lj_word(level: int, k: int) -> List[str]:
    if level == 1:
        return ["a0"] * k
    word = []
    for i in range(1, k + 1):
        word.append(f"a{level - 1}")
        word.extend(_lj_word(level - 1, i))
    return word


def lj_member(j: int, k: int) -> str:
    """The k-th member of L_j, e.g. lj_member(2, 3) == "a1a0a1a0a0a1a0a0a0"."""
    if j < 2 or k < 1:
        raise ValueError(f"L_j members need j >= 2 and k >= 1, got j={j}, k={k}")
    return "".join(_lj_word(j, k))


def _lj_index(level: int, tokens: Sequence[str]) -> int | None:
    """Index k with tokens == w_{level,k}, or None."""
    if level == 1:
        if tokens and all(token == "a0" for token in tokens):
            return len(tokens)
        return None
    delimiter = f"a{level - 1}"
    if not tokens or tokens[0] != delimiter:
        return None
    segments: List[List[str]] = []
    for token in tokens:
        if token == delimiter:
            segments.append([])
        else:
            segments[-1].append(token)
    for i, segment in enumerate(segments, start=1):
        if _lj_index(level - 1, segment) != i:
            return None
    return len(segments)


def is_member_lj(j: int, word) -> bool:
    if j < 2:
        raise ValueError(f"L_j needs j >= 2, got {j}")
    try:
        tokens = lj_tokens(word)
    except ValueError:
        return False
    if any(int(token[1:]) >= j for token in tokens):
        return False
    return _lj_index(j, tokens) is not None


def is_member(language: LanguageId, word, j: int | None = None) -> bool:
    """Dispatch to the oracle of `language`."""
    language = LanguageId(language)
    if language is LanguageId.LD:
        return is_member_ld(word)
    if language is LanguageId.GCM:
        return is_member_gcm(word)
    if language is LanguageId.JK:
        return is_member_jk(word)
    if language is LanguageId.JK_PADDED:
        return is_member_jk_padded(word)
    if language is LanguageId.ERB:
        return is_member_erb(word)
    if j is None:
        raise ValueError("L_j needs a parameter j")
    return is_member_lj(j, word)
