#!/usr/bin/env python3
"""Convert a MULAN multi-label ARFF file to the sparse-multilabel text format.

    convert_mulan_arff.py genbase.arff genbase.xml -o data/genbase.txt
    convert_mulan_arff.py medical.arff --labels 45 -o data/medical.txt

Labels are named by the MULAN XML file or taken as the last N attributes.
Numeric attributes are copied, nominal ones become the index of their value
in the declared list, and string attributes are dropped (with a note on
stderr). Both dense and sparse ARFF rows are accepted.
"""

import argparse
import shlex
import sys
import xml.etree.ElementTree as ET


def parse_attribute(line):
    lex = shlex.shlex(line[len("@attribute"):], posix=True)
    lex.whitespace_split = True
    lex.commenters = ""
    name = lex.get_token()
    rest = line[len("@attribute"):].strip()
    # The type follows the (possibly quoted) name.
    if rest[0] in "'\"":
        rest = rest[rest.index(rest[0], 1) + 1:].strip()
    else:
        rest = rest.split(None, 1)[1].strip()
    if rest.startswith("{"):
        values = split_values(rest[1:rest.rindex("}")])
        return name, "nominal", values
    kind = rest.split()[0].lower()
    if kind in ("numeric", "real", "integer"):
        return name, "numeric", None
    if kind == "string":
        return name, "string", None
    raise ValueError(f"unsupported attribute type for {name!r}: {rest}")


def split_values(text):
    lex = shlex.shlex(text, posix=True)
    lex.whitespace = ", \t"
    lex.whitespace_split = True
    lex.commenters = ""
    return list(lex)


def xml_labels(path):
    names = []
    for el in ET.parse(path).iter():
        if el.tag.split("}")[-1] == "label":
            names.append(el.get("name"))
    return names


def encode(attr, raw, line_no):
    name, kind, values = attr
    if raw == "?":
        raise ValueError(f"line {line_no}: missing value for {name!r}")
    if kind == "numeric":
        return float(raw)
    if kind == "nominal":
        if raw not in values:
            raise ValueError(f"line {line_no}: {raw!r} is not a value of {name!r}")
        return float(values.index(raw))
    return None


def rows(lines, start, attrs):
    for line_no in range(start, len(lines)):
        line = lines[line_no].strip()
        if not line or line.startswith("%"):
            continue
        row = {}
        if line.startswith("{"):
            lex = shlex.shlex(line[1:line.rindex("}")], posix=True)
            lex.whitespace = ","
            lex.whitespace_split = True
            lex.commenters = ""
            for item in lex:
                idx, raw = item.strip().split(None, 1)
                idx = int(idx)
                row[idx] = encode(attrs[idx], raw.strip(), line_no + 1)
            # Omitted entries hold value 0 (the first declared value if nominal).
            for idx, attr in enumerate(attrs):
                if idx not in row and attr[1] != "string":
                    row[idx] = 0.0
        else:
            values = split_values(line)
            if len(values) != len(attrs):
                raise ValueError(
                    f"line {line_no + 1}: {len(values)} values for {len(attrs)} attributes")
            for idx, raw in enumerate(values):
                row[idx] = encode(attrs[idx], raw, line_no + 1)
        yield row


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("arff")
    ap.add_argument("xml", nargs="?", help="MULAN label description")
    ap.add_argument("--labels", type=int, help="number of trailing label attributes")
    ap.add_argument("--drop", action="append", default=[], help="attribute to leave out")
    ap.add_argument("--drop-unlabeled", action="store_true",
                    help="skip instances with no labels or with every label")
    ap.add_argument("-o", "--out", required=True)
    args = ap.parse_args()
    if (args.xml is None) == (args.labels is None):
        ap.error("give exactly one of the XML file or --labels")

    with open(args.arff, encoding="utf-8", errors="replace") as fh:
        lines = fh.read().splitlines()

    attrs = []
    data_start = None
    for i, line in enumerate(lines):
        low = line.strip().lower()
        if low.startswith("@attribute"):
            attrs.append(parse_attribute(line.strip()))
        elif low.startswith("@data"):
            data_start = i + 1
            break
    if data_start is None:
        sys.exit("no @data section")

    names = [a[0] for a in attrs]
    label_names = xml_labels(args.xml) if args.xml else names[-args.labels:]
    missing = [n for n in label_names if n not in names]
    if missing:
        sys.exit(f"labels not among the attributes: {missing[:5]}")
    label_idx = [names.index(n) for n in label_names]
    label_set = set(label_idx)
    feature_idx = []
    for i, (name, kind, _) in enumerate(attrs):
        if i in label_set:
            continue
        if kind == "string" or name in args.drop:
            print(f"note: dropping attribute {name!r} ({kind})", file=sys.stderr)
            continue
        feature_idx.append(i)

    out = []
    dropped = 0
    for row in rows(lines, data_start, attrs):
        labels = [str(j) for j, a in enumerate(label_idx) if row[a] != 0.0]
        if not labels or len(labels) == len(label_idx):
            if args.drop_unlabeled:
                dropped += 1
                continue
            sys.exit(f"instance {len(out) + dropped} has {len(labels)} of {len(label_idx)} "
                     "labels; rerun with --drop-unlabeled")
        feats = [f"{k}:{row[a]!r}" for k, a in enumerate(feature_idx) if row[a] != 0.0]
        out.append(",".join(labels) + (" " + " ".join(feats) if feats else ""))

    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"#{len(out)} {len(feature_idx)} {len(label_idx)}\n")
        fh.write("\n".join(out) + "\n")
    print(f"{args.out}: n={len(out)} d={len(feature_idx)} l={len(label_idx)}"
          + (f" ({dropped} instances dropped)" if dropped else ""), file=sys.stderr)


if __name__ == "__main__":
    main()
