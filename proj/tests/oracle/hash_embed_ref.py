"""Reference signed 3-gram feature hashing, written independently of the C++ code.

Used to freeze expected values in test_embed.cpp.
"""
import math
import sys

MASK = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & MASK
    return h


def lower_ascii(s: str) -> str:
    return "".join(chr(ord(c) + 32) if "A" <= c <= "Z" else c for c in s)


def embed(text: str, dim: int = 256):
    v = [0.0] * dim
    if text.strip(" \t\r\n\v\f") == "":
        return v
    t = lower_ascii(text)
    grams = [t] if len(t) < 3 else [t[i:i + 3] for i in range(len(t) - 2)]
    for g in grams:
        h = fnv1a64(g.encode("utf-8"))
        v[h % dim] += -1.0 if h >> 63 else 1.0
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v] if n else v


def inner(a, b):
    return sum(x * y for x, y in zip(a, b))


if __name__ == "__main__":
    h = fnv1a64(b"abc")
    print("fnv1a64(abc) =", hex(h), "index", h % 256, "sign", -1 if h >> 63 else 1)
    q = embed("instruction cache parity error corrected")
    near = embed("data cache parity error corrected")
    far = embed("qzx wvut plomb")
    print("inner(q, near) = %.9f" % inner(q, near))
    print("inner(q, far)  = %.9f" % inner(q, far))
    for s in sys.argv[1:]:
        e = embed(s)
        print(s, [(i, x) for i, x in enumerate(e) if x])
