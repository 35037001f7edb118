#!/usr/bin/env python3
"""Download the original UCI tables into data/uci/ and convert them to the
CSV layout used by the checked-in files (header row, '?' for missing).

Only touches the network when run. The matching meta files in data/ apply
to the converted outputs (adult_uci.csv uses the real category lists, so
regenerate its meta with --write-adult-meta).
"""

import argparse
import csv
import io
import json
import pathlib
import urllib.request

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"
UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

SOURCES = {
    "banknote": f"{UCI}/00267/data_banknote_authentication.txt",
    "heart": f"{UCI}/statlog/heart/heart.dat",
    "adult": f"{UCI}/adult/adult.data",
}

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num", "marital_status",
    "occupation", "relationship", "race", "sex", "capital_gain", "capital_loss",
    "hours_per_week", "native_country", "income",
]
ADULT_CATEGORICAL = {
    "workclass", "education", "marital_status", "occupation", "relationship",
    "race", "sex", "native_country",
}


def fetch(url):
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read().decode("utf-8", errors="replace")


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def banknote(out):
    text = fetch(SOURCES["banknote"])
    rows = [line.split(",") for line in text.splitlines() if line.strip()]
    write(out / "banknote_uci.csv", ["variance", "skew", "curtosis", "entropy", "class"], rows)


def heart(out):
    text = fetch(SOURCES["heart"])
    header = [
        "age", "sex", "chest_pain", "resting_blood_pressure", "serum_cholestoral",
        "fasting_blood_sugar", "resting_ecg", "max_heart_rate", "exercise_angina",
        "oldpeak", "slope", "major_vessels", "thal", "diagnosis",
    ]
    rows = []
    for line in text.splitlines():
        cells = line.split()
        if cells:
            cells[-1] = str(int(cells[-1]) - 1)
            rows.append(cells)
    write(out / "heart_statlog.csv", header, rows)


def adult(out, write_meta):
    text = fetch(SOURCES["adult"])
    rows = []
    for record in csv.reader(io.StringIO(text), skipinitialspace=True):
        if len(record) == len(ADULT_COLUMNS):
            rows.append([c.strip() for c in record])
    write(out / "adult_uci.csv", ADULT_COLUMNS, rows)
    if write_meta:
        features = []
        for i, name in enumerate(ADULT_COLUMNS[:-1]):
            if name in ADULT_CATEGORICAL:
                cats = sorted({r[i] for r in rows if r[i] != "?"})
                features.append({"name": name, "type": "categorical", "encoding": "onehot", "categories": cats})
            else:
                features.append({"name": name, "type": "numeric"})
        meta = {"label": "income", "class_names": ["<=50K", ">50K"], "features": features}
        (out / "adult_uci.meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("datasets", nargs="*", default=list(SOURCES))
    ap.add_argument("--write-adult-meta", action="store_true")
    args = ap.parse_args()
    out = DATA / "uci"
    out.mkdir(parents=True, exist_ok=True)
    for name in args.datasets:
        if name == "banknote":
            banknote(out)
        elif name == "heart":
            heart(out)
        elif name == "adult":
            adult(out, args.write_adult_meta)
        else:
            raise SystemExit(f"unknown dataset {name!r}")
        print(f"fetched {name}")


if __name__ == "__main__":
    main()
