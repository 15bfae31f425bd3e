# analyze_results.py
import argparse

import pandas as pd

from utils import fmt_count

NUMERIC = ["stage", "delta_len", "b_size", "events", "resets", "pulls", "switches",
           "witness_picks", "runtime_sec"]


def load_log(path: str) -> pd.DataFrame:
    df = pd.read_csv(path, dtype={"delta": str, "config_key": str}, keep_default_na=False)
    for col in NUMERIC:
        if col in df.columns:
            df[col] = pd.to_numeric(df[col], errors="coerce")
    return df


def outcome_table(df: pd.DataFrame) -> pd.DataFrame:
    """How often each outcome was taken at each depth of delta_s."""
    rows = []
    for delta in df["delta"]:
        for depth, o in enumerate(delta.split(".") if delta else []):
            rows.append({"depth": depth, "outcome": o})
    if not rows:
        return pd.DataFrame(columns=["depth"])
    return pd.DataFrame(rows).pivot_table(index="depth", columns="outcome", aggfunc="size", fill_value=0)


def growth_table(df: pd.DataFrame, every: int = 10) -> pd.DataFrame:
    show = df[["config_key", "stage", "b_size", "delta_len"]]
    return show[(show["stage"] % every == 0) | (show["stage"] == show.groupby("config_key")["stage"].transform("max"))]


def run_totals(df: pd.DataFrame) -> pd.DataFrame:
    agg = df.groupby("config_key").agg(
        stages=("stage", "max"),
        final_b=("b_size", "last"),
        resets=("resets", "sum"),
        pulls=("pulls", "sum"),
        switches=("switches", "sum"),
        picks=("witness_picks", "sum"),
        runtime_sec=("runtime_sec", "sum"),
    )
    agg["events"] = df.groupby("config_key")["events"].sum().apply(lambda n: fmt_count(int(n)))
    return agg


def main(path: str) -> None:
    df = load_log(path)

    print("\n=== Outcome frequencies by depth ===")
    print(outcome_table(df).to_string())

    print("\n=== B growth ===")
    print(growth_table(df).to_string(index=False))

    print("\n=== Resets and pulls per run ===")
    print(run_totals(df).to_string())


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description="Summarize a stage log written by `splitsim run --log-file`.")
    ap.add_argument("--log-file", default="stage_log.csv", help="CSV stage log.")
    main(ap.parse_args().log_file)
