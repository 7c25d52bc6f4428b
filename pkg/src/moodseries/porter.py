"""Porter suffix-stripping stemmer.

Follows M.F. Porter's reference ANSI C implementation (the one that produced
the published ``voc.txt``/``output.txt`` pair), including its two documented
departures from the 1980 description: ``-bli -> -ble`` replaces
``-abli -> -able`` in step 2, and ``-logi -> -log`` is added.

Input is expected to be lowercase ASCII. Words of length <= 2 are returned
unchanged.
"""

from functools import lru_cache

__all__ = ["stem", "PorterStemmer"]


def _is_cons(w, i):
    ch = w[i]
    if ch in "aeiou":
        return False
    if ch == "y":
        return i == 0 or not _is_cons(w, i - 1)
    return True


def _measure(w, j):
    """Number of VC sequences in w[:j + 1]."""
    n = 0
    i = 0
    while True:
        if i > j:
            return n
        if not _is_cons(w, i):
            break
        i += 1
    i += 1
    while True:
        while True:
            if i > j:
                return n
            if _is_cons(w, i):
                break
            i += 1
        i += 1
        n += 1
        while True:
            if i > j:
                return n
            if not _is_cons(w, i):
                break
            i += 1
        i += 1


def _has_vowel(w, j):
    return any(not _is_cons(w, i) for i in range(j + 1))


def _double_cons(w, j):
    return j >= 1 and w[j] == w[j - 1] and _is_cons(w, j)


def _cvc(w, i):
    # consonant-vowel-consonant ending at i, last consonant not w, x or y
    if i < 2 or not _is_cons(w, i) or _is_cons(w, i - 1) or not _is_cons(w, i - 2):
        return False
    return w[i] not in "wxy"


class PorterStemmer:
    """Stateless Porter stemmer; ``stem`` is the only public method."""

    _STEP2 = {
        "a": (("ational", "ate"), ("tional", "tion")),
        "c": (("enci", "ence"), ("anci", "ance")),
        "e": (("izer", "ize"),),
        "l": (("bli", "ble"), ("alli", "al"), ("entli", "ent"), ("eli", "e"), ("ousli", "ous")),
        "o": (("ization", "ize"), ("ation", "ate"), ("ator", "ate")),
        "s": (("alism", "al"), ("iveness", "ive"), ("fulness", "ful"), ("ousness", "ous")),
        "t": (("aliti", "al"), ("iviti", "ive"), ("biliti", "ble")),
        "g": (("logi", "log"),),
    }
    _STEP3 = {
        "e": (("icate", "ic"), ("ative", ""), ("alize", "al")),
        "i": (("iciti", "ic"),),
        "l": (("ical", "ic"), ("ful", "")),
        "s": (("ness", ""),),
    }
    _STEP4 = {
        "a": ("al",),
        "c": ("ance", "ence"),
        "e": ("er",),
        "i": ("ic",),
        "l": ("able", "ible"),
        "n": ("ant", "ement", "ment", "ent"),
        "o": ("ion", "ou"),
        "s": ("ism",),
        "t": ("ate", "iti"),
        "u": ("ous",),
        "v": ("ive",),
        "z": ("ize",),
    }

    def stem(self, word):
        if len(word) <= 2:
            return word
        w = self._step1ab(word)
        w = self._step1c(w)
        w = self._step2(w)
        w = self._step3(w)
        w = self._step4(w)
        w = self._step5(w)
        return w

    @staticmethod
    def _step1ab(w):
        if w.endswith("s"):
            if w.endswith("sses"):
                w = w[:-2]
            elif w.endswith("ies"):
                w = w[:-2]
            elif not w.endswith("ss"):
                w = w[:-1]
        if w.endswith("eed"):
            if _measure(w, len(w) - 4) > 0:
                w = w[:-1]
            return w
        for suffix in ("ed", "ing"):
            if w.endswith(suffix) and _has_vowel(w, len(w) - len(suffix) - 1):
                w = w[: -len(suffix)]
                if w.endswith(("at", "bl", "iz")):
                    return w + "e"
                j = len(w) - 1
                if _double_cons(w, j):
                    if w[j] not in "lsz":
                        return w[:-1]
                    return w
                if _measure(w, j) == 1 and _cvc(w, j):
                    return w + "e"
                return w
        return w

    @staticmethod
    def _step1c(w):
        if w.endswith("y") and _has_vowel(w, len(w) - 2):
            return w[:-1] + "i"
        return w

    @staticmethod
    def _replace(w, rules):
        # first suffix that matches wins, whether or not m > 0 holds
        for suffix, repl in rules:
            if w.endswith(suffix):
                if _measure(w, len(w) - len(suffix) - 1) > 0:
                    return w[: -len(suffix)] + repl
                return w
        return w

    def _step2(self, w):
        if len(w) < 2:
            return w
        rules = self._STEP2.get(w[-2])
        return self._replace(w, rules) if rules else w

    def _step3(self, w):
        rules = self._STEP3.get(w[-1])
        return self._replace(w, rules) if rules else w

    def _step4(self, w):
        if len(w) < 2:
            return w
        suffixes = self._STEP4.get(w[-2])
        if not suffixes:
            return w
        for suffix in suffixes:
            if w.endswith(suffix):
                j = len(w) - len(suffix) - 1
                if suffix == "ion" and (j < 0 or w[j] not in "st"):
                    return w
                if _measure(w, j) > 1:
                    return w[:j + 1]
                return w
        return w

    @staticmethod
    def _step5(w):
        j = len(w) - 1
        if w[j] == "e":
            m = _measure(w, j - 1)
            if m > 1 or (m == 1 and not _cvc(w, j - 1)):
                w = w[:-1]
        j = len(w) - 1
        if w[j] == "l" and _double_cons(w, j) and _measure(w, j) > 1:
            w = w[:-1]
        return w


_STEMMER = PorterStemmer()


@lru_cache(maxsize=1 << 17)
def stem(word):
    """Return the Porter stem of a lowercase ASCII word (memoized)."""
    return _STEMMER.stem(word)
