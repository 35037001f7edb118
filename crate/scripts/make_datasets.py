#!/usr/bin/env python3
"""Regenerate the offline datasets under data/.

banknote.csv and adult.csv are seeded synthetic stand-ins that follow the
column layout and rough class-conditional statistics of the UCI Banknote
Authentication and Adult Census tables. heart.csv is the Cleveland heart
disease table converted from Orange's bundled copy (pass --heart-tab).

Use scripts/fetch_uci.py to download the real UCI files when network access
is available.
"""

import argparse
import csv
import pathlib

import numpy as np

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def banknote(rng):
    """Four wavelet statistics, 762 genuine (0) and 610 forged (1) notes."""
    want = {0: 762, 1: 610}
    params = {
        0: dict(var=(2.28, 2.0), skew=(4.26, 5.1), kurt=(0.80, 0.35), ent=(2.4, 1.5, 2.4)),
        1: dict(var=(-1.87, 1.9), skew=(-0.99, 5.4), kurt=(2.15, 0.45), ent=(2.4, 1.6, 2.3)),
    }
    rows = []
    for label, n in want.items():
        p = params[label]
        kept = 0
        while kept < n:
            var = rng.normal(*p["var"])
            skew = rng.normal(*p["skew"])
            centred = skew - p["skew"][0]
            kurt = p["kurt"][0] - p["kurt"][1] * centred + 0.045 * centred**2 + rng.normal(0, 1.8)
            ent = p["ent"][0] - rng.gamma(p["ent"][1], p["ent"][2] / p["ent"][1] * 1.5)
            var, skew = np.clip(var, -7.04, 6.82), np.clip(skew, -13.77, 12.95)
            kurt, ent = np.clip(kurt, -5.29, 17.93), np.clip(ent, -8.55, 2.45)
            # genuine notes sit on the positive side of a near-linear boundary
            margin = var + 0.33 * skew + 0.21 * kurt - 0.05 * ent - 0.6
            noisy = rng.random() < 0.003
            if (margin > 0) != (label == 0) and not noisy:
                continue
            rows.append([round(float(v), 5) for v in (var, skew, kurt, ent)] + [label])
            kept += 1
    order = rng.permutation(len(rows))
    header = ["variance", "skew", "curtosis", "entropy", "class"]
    return header, [rows[i] for i in order]


COUNTRIES = [
    "United-States", "Mexico", "Philippines", "Germany", "Canada", "India",
    "England", "Cuba", "Jamaica", "China", "Italy", "South", "Japan",
    "Poland", "Vietnam", "Columbia", "Taiwan", "Haiti", "Iran", "Portugal",
    "Peru", "France",
]
WORKCLASS = ["Private", "Self-emp-not-inc", "Local-gov", "State-gov", "Self-emp-inc", "Federal-gov"]
EDUCATION = [
    ("HS-grad", 9), ("Some-college", 10), ("Bachelors", 13), ("Masters", 14),
    ("Assoc-voc", 11), ("11th", 7), ("Assoc-acdm", 12), ("10th", 6),
    ("Prof-school", 15), ("Doctorate", 16),
]
MARITAL = ["Married-civ-spouse", "Never-married", "Divorced", "Separated", "Widowed"]
OCCUPATION = [
    "Prof-specialty", "Craft-repair", "Exec-managerial", "Adm-clerical", "Sales",
    "Other-service", "Machine-op-inspct", "Transport-moving", "Handlers-cleaners",
]
RELATIONSHIP = ["Husband", "Not-in-family", "Own-child", "Unmarried", "Wife"]
RACE = ["White", "Black", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other"]


def adult(rng, n=3000):
    country_p = np.array([0.55, 0.07] + [0.38 / (len(COUNTRIES) - 2)] * (len(COUNTRIES) - 2))
    country_effect = {c: rng.normal(0, 0.8) for c in COUNTRIES}
    country_effect["Jamaica"] = 1.8
    rows = []
    for _ in range(n):
        age = int(np.clip(rng.gamma(3.0, 7.2) + 17, 17, 90))
        workclass = WORKCLASS[rng.choice(len(WORKCLASS), p=[0.7, 0.08, 0.07, 0.05, 0.05, 0.05])]
        fnlwgt = int(np.clip(rng.lognormal(12.0, 0.5), 12285, 1484705))
        edu, edu_num = EDUCATION[rng.choice(len(EDUCATION), p=[0.32, 0.22, 0.17, 0.06, 0.05, 0.05, 0.04, 0.04, 0.03, 0.02])]
        marital = MARITAL[rng.choice(len(MARITAL), p=[0.46, 0.33, 0.14, 0.04, 0.03])]
        occupation = OCCUPATION[rng.integers(len(OCCUPATION))]
        sex = "Male" if rng.random() < 0.67 else "Female"
        if marital == "Married-civ-spouse":
            relationship = "Husband" if sex == "Male" else "Wife"
        else:
            relationship = RELATIONSHIP[1 + rng.integers(3)]
        race = RACE[rng.choice(len(RACE), p=[0.85, 0.09, 0.03, 0.02, 0.01])]
        gain = int(rng.choice([0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 3103, 5178, 7688, 15024]))
        loss = int(rng.choice([0] * 20 + [1902, 1887]))
        hours = int(np.clip(rng.normal(40, 12), 1, 99))
        country = COUNTRIES[rng.choice(len(COUNTRIES), p=country_p)]
        logit = (
            -8.6
            + 0.045 * min(age, 60)
            + 0.33 * edu_num
            + (2.1 if marital == "Married-civ-spouse" else 0.0)
            + 0.03 * (hours - 40)
            + (1.2 if occupation in ("Exec-managerial", "Prof-specialty") else 0.0)
            + (0.3 if sex == "Male" else 0.0)
            + (2.5 if gain > 5000 else 0.0)
            + (1.0 if loss > 0 else 0.0)
            + country_effect[country]
        )
        label = int(rng.random() < 1 / (1 + np.exp(-logit)))
        rows.append([
            age, workclass, fnlwgt, edu, edu_num, marital, occupation, relationship,
            race, sex, gain, loss, hours, country, ">50K" if label else "<=50K",
        ])
    header = [
        "age", "workclass", "fnlwgt", "education", "education_num", "marital_status",
        "occupation", "relationship", "race", "sex", "capital_gain", "capital_loss",
        "hours_per_week", "native_country", "income",
    ]
    return header, rows


def heart(tab_path):
    lines = pathlib.Path(tab_path).read_text().splitlines()
    names = [n.strip().replace(" ", "_").replace(">", "gt") for n in lines[0].split("\t")]
    names[-1] = "diagnosis"
    rows = []
    for line in lines[3:]:
        if not line.strip():
            continue
        cells = [c.strip() or "?" for c in line.split("\t")]
        rows.append(cells)
    return names, rows


def write(name, header, rows):
    with open(DATA / name, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20200101)
    ap.add_argument("--heart-tab", help="path to Orange/datasets/heart_disease.tab")
    args = ap.parse_args()
    DATA.mkdir(exist_ok=True)

    rng = np.random.default_rng(args.seed)
    header, rows = banknote(rng)
    write("banknote.csv", header, rows)
    write("banknote_sample.csv", header, rows[:100])

    header, rows = adult(rng)
    write("adult.csv", header, rows)
    write("adult_sample.csv", header, rows[:100])

    if args.heart_tab:
        header, rows = heart(args.heart_tab)
        write("heart.csv", header, rows)


if __name__ == "__main__":
    main()
