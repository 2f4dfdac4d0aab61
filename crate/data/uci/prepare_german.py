#!/usr/bin/env python3
"""Convert the raw UCI Statlog German credit file (german.data, space
separated, no header) into the headered CSV this repo's tools read.

  curl -O https://archive.ics.uci.edu/static/public/144/statlog+german+credit+data.zip
  unzip statlog+german+credit+data.zip german.data
  python3 prepare_german.py german.data german.csv

The class column (1 = good, 2 = bad) becomes y (1 = bad).
"""
import csv
import sys

COLUMNS = [
    "checking_status", "duration", "credit_history", "purpose",
    "credit_amount", "savings", "employment", "installment_rate",
    "personal_status", "other_parties", "residence_since", "property",
    "age", "other_installment_plans", "housing", "existing_credits",
    "job", "num_dependents", "telephone", "foreign_worker",
]

def main(src, dst):
    with open(src) as fin, open(dst, "w", newline="") as fout:
        writer = csv.writer(fout)
        writer.writerow(COLUMNS + ["y"])
        for line in fin:
            fields = line.split()
            if not fields:
                continue
            assert len(fields) == 21, f"expected 21 fields, got {len(fields)}"
            writer.writerow(fields[:20] + ["1" if fields[20] == "2" else "0"])

if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
