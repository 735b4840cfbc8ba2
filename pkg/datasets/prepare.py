"""Rebuild the bundled benchmark CSVs and schemas from their raw sources.

The raw files are public UCI / R datasets that happen to ship inside PyPI
distributions, so they can be fetched with ``pip download`` alone:

    pip download --no-deps --no-binary :all: orange3==3.10.0   # car.tab, flare2.tab
    pip download --no-deps scorecardpy==0.1.9.7                # germancredit.csv
    pip download --no-deps mglearn==0.2.0                      # adult.data
    pip download --no-deps rdatasets==0.2.10                   # NMES1988, Caravan

Usage::

    python datasets/prepare.py --downloads /path/to/downloaded/files
"""
from __future__ import annotations

import argparse
import io
import json
import tarfile
import zipfile
from pathlib import Path

import numpy as np
import pandas as pd

HERE = Path(__file__).resolve().parent


def _member(archive: Path, suffix: str) -> bytes:
    if archive.suffix == ".whl":
        with zipfile.ZipFile(archive) as z:
            name = next(n for n in z.namelist() if n.endswith(suffix))
            return z.read(name)
    with tarfile.open(archive) as t:
        name = next(n for n in t.getnames() if n.endswith(suffix))
        return t.extractfile(name).read()


def _find(downloads: Path, prefix: str) -> Path:
    hits = sorted(p for p in downloads.iterdir() if p.name.lower().startswith(prefix.lower()))
    if not hits:
        raise FileNotFoundError(f"no download matching {prefix!r} in {downloads}")
    return hits[-1]


def _orange_tab(raw: bytes) -> pd.DataFrame:
    return pd.read_csv(io.BytesIO(raw), sep="\t", skiprows=[1, 2], dtype=str)


def _write(name: str, frame: pd.DataFrame, schema: dict) -> None:
    out = HERE / name
    out.mkdir(exist_ok=True)
    frame.to_csv(out / "data.csv", index=False, lineterminator="\n")
    (out / "schema.json").write_text(json.dumps(schema, indent=2) + "\n")
    print(f"{name}: {len(frame)} rows")


def _nominal(name, cats):
    return {"name": name, "kind": "nominal", "categories": list(cats)}


def _ordinal(name, cats):
    return {"name": name, "kind": "ordinal", "categories": list(cats)}


def _continuous(name):
    return {"name": name, "kind": "continuous"}


def car(downloads: Path) -> None:
    df = _orange_tab(_member(_find(downloads, "orange3-3.10"), "datasets/car.tab"))
    df.columns = ["buying", "maint", "doors", "persons", "lug_boot", "safety", "class"]
    levels = {
        "buying": ["low", "med", "high", "v-high"],
        "maint": ["low", "med", "high", "v-high"],
        "doors": ["2", "3", "4", "5-more"],
        "persons": ["2", "4", "more"],
        "lug_boot": ["small", "med", "big"],
        "safety": ["low", "med", "high"],
    }
    schema = {
        "predictors": [_ordinal(k, v) for k, v in levels.items()],
        "response": {"name": "class", "type": "binary"},
    }
    _write("car_evaluation", df, schema)


def solar(downloads: Path) -> None:
    df = _orange_tab(_member(_find(downloads, "orange3-3.10"), "datasets/flare2.tab"))
    out = pd.DataFrame({
        "zurich_class": df["Zurich_class"],
        "largest_spot_size": df["largest_spot_size"],
        "spot_distribution": df["larget_spot_distr"],
        "evolution": df["evolution"],
        "previous_24h": df["previous24"],
    })
    # two-valued attributes are coded 1/2 in the source
    for src, dst in [("activity", "activity_reduced"), ("hist_complex", "historically_complex"),
                     ("comp_on_this_", "became_complex"), ("area", "area_large"),
                     ("area_of_largest", "largest_spot_area_large")]:
        out[dst] = (df[src].astype(int) - 1).astype(str)
    out["c_class_flares"] = df["C_class"]
    schema = {
        "predictors": [
            _nominal("zurich_class", list("ABCDEFH")),
            _nominal("largest_spot_size", list("XRSAHK")),
            _nominal("spot_distribution", list("XOIC")),
            _ordinal("evolution", ["1", "2", "3"]),
            _ordinal("previous_24h", ["1", "2", "3"]),
        ] + [_continuous(c) for c in ["activity_reduced", "historically_complex", "became_complex",
                                      "area_large", "largest_spot_area_large"]],
        "response": {"name": "c_class_flares", "type": "binary"},
    }
    _write("solar", out, schema)


def german(downloads: Path) -> None:
    df = pd.read_csv(io.BytesIO(_member(_find(downloads, "scorecardpy"), "data/germancredit.csv")), dtype=str)
    levels = {
        "status_of_existing_checking_account": [
            "... < 0 DM", "0 <= ... < 200 DM",
            "... >= 200 DM / salary assignments for at least 1 year", "no checking account"],
        "credit_history": [
            "no credits taken/ all credits paid back duly", "all credits at this bank paid back duly",
            "existing credits paid back duly till now", "delay in paying off in the past",
            "critical account/ other credits existing (not at this bank)"],
        "purpose": [
            "car (new)", "car (used)", "furniture/equipment", "radio/television",
            "domestic appliances", "repairs", "education", "vacation", "retraining",
            "business", "others"],
        "savings_account_and_bonds": [
            "... < 100 DM", "100 <= ... < 500 DM", "500 <= ... < 1000 DM", "... >= 1000 DM",
            "unknown/ no savings account"],
        "present_employment_since": [
            "unemployed", "... < 1 year", "1 <= ... < 4 years", "4 <= ... < 7 years", "... >= 7 years"],
        "personal_status_and_sex": [
            "male : divorced/separated", "female : divorced/separated/married", "male : single",
            "male : married/widowed", "female : single"],
        "other_debtors_or_guarantors": ["none", "co-applicant", "guarantor"],
        "property": [
            "real estate", "building society savings agreement/ life insurance",
            "car or other, not in attribute Savings account/bonds", "unknown / no property"],
        "other_installment_plans": ["bank", "stores", "none"],
        "housing": ["rent", "own", "for free"],
        "job": [
            "unemployed/ unskilled - non-resident", "unskilled - resident",
            "skilled employee / official",
            "management/ self-employed/ highly qualified employee/ officer"],
    }
    numeric = ["duration_in_month", "credit_amount", "installment_rate_in_percentage_of_disposable_income",
               "present_residence_since", "age_in_years", "number_of_existing_credits_at_this_bank",
               "number_of_people_being_liable_to_provide_maintenance_for"]
    out = df[list(levels) + numeric].copy()
    out["telephone"] = (df["telephone"] != "none").astype(int).astype(str)
    out["foreign_worker"] = (df["foreign_worker"] == "yes").astype(int).astype(str)
    out["creditability"] = df["creditability"]
    schema = {
        "predictors": [_nominal(k, v) for k, v in levels.items()]
        + [_continuous(c) for c in numeric + ["telephone", "foreign_worker"]],
        "response": {"name": "creditability", "type": "binary"},
    }
    _write("german", out, schema)


def debtrivedi(downloads: Path) -> None:
    raw = _member(_find(downloads, "rdatasets"), "AER/NMES1988.pkl.compress")
    df = pd.read_pickle(io.BytesIO(raw), compression="xz")
    school_bins = [-1, 5, 8, 11, 12, 15, 99]
    school_labels = ["0-5", "6-8", "9-11", "12", "13-15", "16+"]
    out = pd.DataFrame({
        "health": df["health"].astype(str),
        "hospital": np.minimum(df["hospital"], 4).astype(str).replace({"4": "4+"}),
        "chronic": np.minimum(df["chronic"], 6).astype(str).replace({"6": "6+"}),
        "region": df["region"].astype(str),
        "school": pd.cut(df["school"], school_bins, labels=school_labels).astype(str),
        "age": df["age"].round(4).astype(str),
        "income": df["income"].round(4).astype(str),
        "male": (df["gender"] == "male").astype(int).astype(str),
        "insurance": (df["insurance"] == "yes").astype(int).astype(str),
        "medicaid": (df["medicaid"] == "yes").astype(int).astype(str),
        "visits": df["visits"].astype(str),
    })
    schema = {
        "predictors": [
            _ordinal("health", ["poor", "average", "excellent"]),
            _ordinal("hospital", ["0", "1", "2", "3", "4+"]),
            _ordinal("chronic", ["0", "1", "2", "3", "4", "5", "6+"]),
            _nominal("region", ["other", "midwest", "northeast", "west"]),
            _ordinal("school", school_labels),
        ] + [_continuous(c) for c in ["age", "income", "male", "insurance", "medicaid"]],
        "response": {"name": "visits", "type": "count"},
    }
    _write("debtrivedi", out, schema)


def adult(downloads: Path) -> None:
    names = ["age", "workclass", "fnlwgt", "education", "education_num", "marital_status", "occupation",
             "relationship", "race", "sex", "capital_gain", "capital_loss", "hours_per_week",
             "native_country", "income"]
    raw = _member(_find(downloads, "mglearn"), "data/adult.data")
    df = pd.read_csv(io.BytesIO(raw), names=names, skipinitialspace=True, dtype=str)
    df = df.replace("?", "Missing")
    age = df["age"].astype(int)
    hours = df["hours_per_week"].astype(int)
    out = pd.DataFrame({
        "age_group": pd.cut(age, [0, 24, 34, 44, 54, 200], labels=["<25", "25-34", "35-44", "45-54", "55+"]).astype(str),
        "workclass": df["workclass"],
        "education": df["education"],
        "marital_status": df["marital_status"],
        "occupation": df["occupation"],
        "relationship": df["relationship"],
        "race": df["race"],
        "hours_group": pd.cut(hours, [0, 34, 39, 40, 49, 200], labels=["<35", "35-39", "40", "41-49", "50+"]).astype(str),
        "native_country": df["native_country"],
        "male": (df["sex"] == "Male").astype(int).astype(str),
        "capital_gain": df["capital_gain"],
        "capital_loss": df["capital_loss"],
        "income": df["income"],
    })
    education = ["Preschool", "1st-4th", "5th-6th", "7th-8th", "9th", "10th", "11th", "12th", "HS-grad",
                 "Some-college", "Assoc-voc", "Assoc-acdm", "Bachelors", "Masters", "Prof-school", "Doctorate"]
    nominal = ["workclass", "marital_status", "occupation", "relationship", "race", "native_country"]
    predictors = [_ordinal("age_group", ["<25", "25-34", "35-44", "45-54", "55+"])]
    for col in ["workclass", "education", "marital_status", "occupation", "relationship", "race",
                "hours_group", "native_country"]:
        if col == "education":
            predictors.append(_ordinal(col, education))
        elif col == "hours_group":
            predictors.append(_ordinal(col, ["<35", "35-39", "40", "41-49", "50+"]))
        else:
            assert col in nominal
            predictors.append(_nominal(col, sorted(out[col].unique())))
    predictors += [_continuous(c) for c in ["male", "capital_gain", "capital_loss"]]
    schema = {"predictors": predictors, "response": {"name": "income", "type": "binary", "positive_label": "<=50K"}}
    _write("adult", out, schema)


def coil2000(downloads: Path) -> None:
    raw = _member(_find(downloads, "rdatasets"), "ISLR/Caravan.pkl.compress")
    df = pd.read_pickle(io.BytesIO(raw), compression="xz").drop(columns=["rownames"])
    categorical = {
        "MOSTYPE": [str(i) for i in range(1, 42)],
        "MGEMLEEF": [str(i) for i in range(1, 7)],
        "MOSHOOFD": [str(i) for i in range(1, 11)],
        "MGODRK": [str(i) for i in range(10)],
        "MGODGE": [str(i) for i in range(10)],
    }
    kinds = {"MOSTYPE": _nominal, "MGEMLEEF": _ordinal, "MOSHOOFD": _nominal, "MGODRK": _ordinal,
             "MGODGE": _ordinal}
    continuous = [c for c in df.columns if c not in categorical and c != "Purchase"]
    out = df[list(categorical) + continuous + ["Purchase"]].astype(str)
    schema = {
        "predictors": [kinds[k](k, v) for k, v in categorical.items()] + [_continuous(c) for c in continuous],
        "response": {"name": "Purchase", "type": "binary"},
    }
    _write("coil2000", out, schema)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--downloads", type=Path, required=True)
    args = parser.parse_args()
    for build in (car, solar, german, debtrivedi, adult, coil2000):
        build(args.downloads)


if __name__ == "__main__":
    main()
