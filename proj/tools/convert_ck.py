#!/usr/bin/env python3
"""Convert the original minimum-wage survey distribution (public.dat, 46
whitespace-separated columns, '.' for missing) to the 22-column CSV this
project consumes. See docs/data-format.md for the output schema."""

import argparse
import csv
import sys

SOURCE_COLUMNS = [
    "SHEET", "CHAIN", "CO_OWNED", "STATE", "SOUTHJ", "CENTRALJ", "NORTHJ",
    "PA1", "PA2", "SHORE", "NCALLS", "EMPFT", "EMPPT", "NMGRS", "WAGE_ST",
    "INCTIME", "FIRSTINC", "BONUS", "PCTAFF", "MEALS", "OPEN", "HRSOPEN",
    "PSODA", "PFRY", "PENTREE", "NREGS", "NREGS11", "TYPE2", "STATUS2",
    "DATE2", "NCALLS2", "EMPFT2", "EMPPT2", "NMGRS2", "WAGE_ST2", "INCTIME2",
    "FIRSTIN2", "SPECIAL2", "MEALS2", "OPEN2R", "HRSOPEN2", "PSODA2", "PFRY2",
    "PENTREE2", "NREGS2", "NREGS112",
]

WAVE1 = ["EMPFT", "EMPPT", "PCTAFF", "NMGRS", "INCTIME", "PENTREE", "PSODA",
         "NREGS", "OPEN", "HRSOPEN"]

# Wave-2 source column for each output column. The union question (PCTAFF)
# was only asked in wave 1, so it is carried forward; the second-wave opening
# hour lives in OPEN2R.
WAVE2_SOURCE = {
    "EMPFT2": "EMPFT2",
    "EMPPT2": "EMPPT2",
    "PCTAFF2": "PCTAFF",
    "NMGRS2": "NMGRS2",
    "INCTIME2": "INCTIME2",
    "PENTREE2": "PENTREE2",
    "PSODA2": "PSODA2",
    "NREGS2": "NREGS2",
    "OPEN2": "OPEN2R",
    "HRSOPEN2": "HRSOPEN2",
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("source", help="whitespace-separated survey file (public.dat)")
    parser.add_argument("dest", help="output CSV path")
    args = parser.parse_args()

    index = {name: i for i, name in enumerate(SOURCE_COLUMNS)}
    rows = []
    with open(args.source) as fh:
        for line_no, line in enumerate(fh, 1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != len(SOURCE_COLUMNS):
                sys.exit(f"{args.source}:{line_no}: expected {len(SOURCE_COLUMNS)} "
                         f"fields, found {len(fields)}")

            def get(name):
                value = fields[index[name]]
                return "" if value == "." else value

            state = get("STATE")
            if state not in ("0", "1"):
                sys.exit(f"{args.source}:{line_no}: STATE must be 0 or 1, found '{state}'")
            row = [get("SHEET"), "NJ" if state == "1" else "PA"]
            row += [get(name) for name in WAVE1]
            row += [get(WAVE2_SOURCE[name]) for name in WAVE2_SOURCE]
            rows.append(row)

    header = ["SHEET", "STATE"] + WAVE1 + list(WAVE2_SOURCE)
    with open(args.dest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {len(rows)} records to {args.dest}")


if __name__ == "__main__":
    main()
