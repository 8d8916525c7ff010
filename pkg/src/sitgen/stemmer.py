"""English suffix-stripping stemmer (Porter's 1980 algorithm) and title tokenizer.

The stemmer follows the original algorithm exactly, including the
longest-match rule: within a step, only the longest matching suffix is
considered, and when its condition fails the step performs no change.
"""

from __future__ import annotations

import re
import unicodedata

_VOWELS = frozenset("aeiou")


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of VC blocks in the [C](VC)^m[V] decomposition."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        vowel = not _is_consonant(stem, i)
        if prev_vowel and not vowel:
            m += 1
        prev_vowel = vowel
    return m


def _contains_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(stem: str) -> bool:
    return (
        len(stem) >= 2
        and stem[-1] == stem[-2]
        and _is_consonant(stem, len(stem) - 1)
    )


def _ends_cvc(stem: str) -> bool:
    if len(stem) < 3:
        return False
    return (
        _is_consonant(stem, len(stem) - 3)
        and not _is_consonant(stem, len(stem) - 2)
        and _is_consonant(stem, len(stem) - 1)
        and stem[-1] not in "wxy"
    )


def _apply_rules(word: str, rules) -> str:
    """First (i.e. longest) matching suffix wins; failed condition = no-op."""
    for suffix, repl, cond in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if cond is None or cond(stem):
                return stem + repl
            return word
    return word


_STEP2 = [
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
]
_STEP2.sort(key=lambda r: -len(r[0]))

_STEP3 = [
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
]
_STEP3.sort(key=lambda r: -len(r[0]))

_STEP4_PLAIN = [
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
]
_STEP4 = sorted(_STEP4_PLAIN, key=len, reverse=True)


def porter_stem(word: str) -> str:
    """Stem one lowercase token; tokens shorter than 3 characters pass through."""
    if len(word) <= 2 or not word.isalpha():
        return word

    # Step 1a
    word = _apply_rules(word, [
        ("sses", "ss", None),
        ("ies", "i", None),
        ("ss", "ss", None),
        ("s", "", None),
    ])

    # Step 1b
    if word.endswith("eed"):
        stem = word[:-3]
        if _measure(stem) > 0:
            word = stem + "ee"
    else:
        fired = False
        for suffix in ("ed", "ing"):
            if word.endswith(suffix):
                stem = word[: -len(suffix)]
                if _contains_vowel(stem):
                    word = stem
                    fired = True
                break
        if fired:
            if word.endswith(("at", "bl", "iz")):
                word += "e"
            elif _ends_double_consonant(word) and word[-1] not in "lsz":
                word = word[:-1]
            elif _measure(word) == 1 and _ends_cvc(word):
                word += "e"

    # Step 1c
    if word.endswith("y") and _contains_vowel(word[:-1]):
        word = word[:-1] + "i"

    # Step 2
    word = _apply_rules(
        word, [(s, r, lambda st: _measure(st) > 0) for s, r in _STEP2]
    )

    # Step 3
    word = _apply_rules(
        word, [(s, r, lambda st: _measure(st) > 0) for s, r in _STEP3]
    )

    # Step 4: "ion" only after s or t, all others plain (m>1)
    rules4 = [(s, "", lambda st: _measure(st) > 1) for s in _STEP4]
    rules4.append(
        ("ion", "", lambda st: _measure(st) > 1 and st[-1:] in ("s", "t"))
    )
    rules4.sort(key=lambda r: -len(r[0]))
    word = _apply_rules(word, rules4)

    # Step 5a
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            word = stem

    # Step 5b
    if _measure(word) > 1 and _ends_double_consonant(word) and word.endswith("l"):
        word = word[:-1]

    return word


_TOKEN_RE = re.compile(r"[0-9a-z]+")


def fold_text(text: str) -> str:
    """Lowercase and strip diacritics/compatibility forms (NFKD fold)."""
    decomposed = unicodedata.normalize("NFKD", text)
    stripped = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    return stripped.lower()


def stem_title(title: str) -> list[str]:
    """Fold, split on non-alphanumeric runs, and stem every token."""
    return [porter_stem(tok) for tok in _TOKEN_RE.findall(fold_text(title))]
