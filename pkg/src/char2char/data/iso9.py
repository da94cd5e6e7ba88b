"""Cyrillic to Latin transliteration following ISO 9 (one Latin letter per Cyrillic letter)."""
from __future__ import annotations

from collections import Counter
from typing import Optional

_LOWER = {
    # Russian
    "а": "a", "б": "b", "в": "v", "г": "g", "д": "d", "е": "e", "ё": "ë", "ж": "ž",
    "з": "z", "и": "i", "й": "j", "к": "k", "л": "l", "м": "m", "н": "n", "о": "o",
    "п": "p", "р": "r", "с": "s", "т": "t", "у": "u", "ф": "f", "х": "h", "ц": "c",
    "ч": "č", "ш": "š", "щ": "ŝ", "ъ": "ʺ", "ы": "y", "ь": "ʹ", "э": "è",
    "ю": "û", "я": "â",
    # other letters whose ISO 9 form is a single precomposed code point
    "є": "ê", "і": "ì", "ї": "ï", "ў": "ŭ", "ђ": "đ", "ћ": "ć", "ј": "ǰ", "ѓ": "ǵ",
    "ќ": "ḱ", "ѕ": "ẑ",
}

_UPPER = {cyr.upper(): lat.upper() for cyr, lat in _LOWER.items() if cyr not in "ъьј"}
# the sign letters are caseless in ISO 9; capitals get primes so the map stays one-to-one
_UPPER.update({"Ъ": "″", "Ь": "′"})

TABLE: dict[str, str] = {**_LOWER, **_UPPER}
INVERSE: dict[str, str] = {lat: cyr for cyr, lat in TABLE.items()}


def is_cyrillic(ch: str) -> bool:
    return "Ѐ" <= ch <= "ӿ"


def iso9_transliterate(text: str, unmapped: Optional[Counter] = None) -> str:
    """Map every Cyrillic letter in ``text`` to Latin; everything else passes through.

    Cyrillic code points without an entry are kept as is and tallied in
    ``unmapped`` when a counter is given.
    """
    out = []
    for ch in text:
        lat = TABLE.get(ch)
        if lat is None:
            if unmapped is not None and is_cyrillic(ch):
                unmapped[ch] += 1
            out.append(ch)
        else:
            out.append(lat)
    return "".join(out)


def iso9_inverse(text: str) -> str:
    """Undo :func:`iso9_transliterate` on text that was Cyrillic only."""
    return "".join(INVERSE.get(ch, ch) for ch in text)
