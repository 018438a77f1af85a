"""Rebuild an a9a-style LIBSVM file from the raw UCI Adult table.

a9a encodes each Adult record as 123 binary features: continuous columns
cut into quantile bins (capital gain/loss: zero vs. nonzero), categorical
columns one-hot, missing values ('?') left empty. The exact bin edges used
for the published a9a file are not documented, so quantile edges of the
given table are used instead.

    python scripts/make_a9a.py adult.csv data/adult_a9a.txt.gz

adult.csv needs the UCI column names as a header row. One public copy ships
inside the `fairness` wheel on PyPI at fairness/data/raw/adult.csv.
"""

from __future__ import annotations

import argparse
import csv
import gzip

import numpy as np

CATEGORIES = {
    "workclass": ["Private", "Self-emp-not-inc", "Self-emp-inc", "Federal-gov",
                  "Local-gov", "State-gov", "Without-pay", "Never-worked"],
    "education": ["Bachelors", "Some-college", "11th", "HS-grad", "Prof-school",
                  "Assoc-acdm", "Assoc-voc", "9th", "7th-8th", "12th", "Masters",
                  "1st-4th", "10th", "Doctorate", "5th-6th", "Preschool"],
    "marital-status": ["Married-civ-spouse", "Divorced", "Never-married", "Separated",
                       "Widowed", "Married-spouse-absent", "Married-AF-spouse"],
    "occupation": ["Tech-support", "Craft-repair", "Other-service", "Sales",
                   "Exec-managerial", "Prof-specialty", "Handlers-cleaners",
                   "Machine-op-inspct", "Adm-clerical", "Farming-fishing",
                   "Transport-moving", "Priv-house-serv", "Protective-serv", "Armed-Forces"],
    "relationship": ["Wife", "Own-child", "Husband", "Not-in-family", "Other-relative",
                     "Unmarried"],
    "race": ["White", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other", "Black"],
    "sex": ["Female", "Male"],
    "native-country": [
        "United-States", "Cambodia", "England", "Puerto-Rico", "Canada", "Germany",
        "Outlying-US(Guam-USVI-etc)", "India", "Japan", "Greece", "South", "China", "Cuba",
        "Iran", "Honduras", "Philippines", "Italy", "Poland", "Jamaica", "Vietnam", "Mexico",
        "Portugal", "Ireland", "France", "Dominican-Republic", "Laos", "Ecuador", "Taiwan",
        "Haiti", "Columbia", "Hungary", "Guatemala", "Nicaragua", "Scotland", "Thailand",
        "Yugoslavia", "El-Salvador", "Trinadad&Tobago", "Peru", "Hong", "Holand-Netherlands"],
}
QUANTILE_BINS = {"age": 5, "fnlwgt": 5, "education-num": 5, "hours-per-week": 5}
ZERO_SPLIT = ("capital-gain", "capital-loss")
COLUMNS = ["age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
           "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
           "hours-per-week", "native-country"]


def encode(rows: list[dict]) -> list[str]:
    edges = {}
    for col, bins in QUANTILE_BINS.items():
        vals = np.array([float(r[col]) for r in rows])
        edges[col] = np.quantile(vals, np.arange(1, bins) / bins)
    out = []
    for r in rows:
        feats = []
        offset = 0
        for col in COLUMNS:
            raw = r[col].strip()
            if col in QUANTILE_BINS:
                feats.append(offset + 1 + int(np.searchsorted(edges[col], float(raw), "right")))
                offset += QUANTILE_BINS[col]
            elif col in ZERO_SPLIT:
                feats.append(offset + (2 if float(raw) > 0 else 1))
                offset += 2
            else:
                cats = CATEGORIES[col]
                if raw in cats:
                    feats.append(offset + 1 + cats.index(raw))
                offset += len(cats)
        label = "+1" if r["income-per-year"].strip().startswith(">50K") else "-1"
        out.append(label + " " + " ".join(f"{i}:1" for i in feats))
    assert offset == 123
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("adult_csv")
    ap.add_argument("out")
    args = ap.parse_args(argv)
    with open(args.adult_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    lines = encode(rows)
    text = ("\n".join(lines) + "\n").encode()
    if args.out.endswith(".gz"):
        with gzip.GzipFile(args.out, "wb", mtime=0) as fh:
            fh.write(text)
    else:
        with open(args.out, "wb") as fh:
            fh.write(text)
    print(f"wrote {len(lines)} instances to {args.out}")


if __name__ == "__main__":
    main()
