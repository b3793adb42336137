#!/usr/bin/env python3
"""Convert a byte-level BPE tokenizer.json (Hugging Face format) to a
bpe-merges v1 table readable by `fragkit --tokenizer`."""

import argparse
import json
import sys


def bytes_to_unicode():
    bs = (list(range(ord("!"), ord("~") + 1)) + list(range(ord("¡"), ord("¬") + 1))
          + list(range(ord("®"), ord("ÿ") + 1)))
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, map(chr, cs)))


def escape(raw: bytes) -> str:
    out = []
    for b in raw:
        if 0x21 <= b <= 0x7E and b != 0x5C:
            out.append(chr(b))
        else:
            out.append("\\x%02X" % b)
    return "".join(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("tokenizer_json")
    ap.add_argument("-o", "--out", default="-")
    ap.add_argument("--name", default="hf-bpe")
    args = ap.parse_args()

    with open(args.tokenizer_json, encoding="utf-8") as f:
        model = json.load(f)["model"]
    if model.get("type") != "BPE":
        sys.exit("not a BPE model")

    decode = {c: b for b, c in bytes_to_unicode().items()}
    lines = ["bpe-merges v1 " + args.name]
    for merge in model["merges"]:
        left, right = merge.split(" ", 1) if isinstance(merge, str) else merge
        try:
            lb = bytes(decode[c] for c in left)
            rb = bytes(decode[c] for c in right)
        except KeyError:
            sys.exit("merge %r is not byte-level" % (merge,))
        lines.append(escape(lb) + " " + escape(rb))

    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="ascii", newline="\n") as f:
            f.write(text)


if __name__ == "__main__":
    main()
