"""Print the truncation study: OP against the number of s-series terms.

    python scripts/table1.py [--rate 1/12]
"""

import argparse
from fractions import Fraction

from crswipt.validation import TABLE1_PU, TABLE1_SU, table1_rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rate", default="1/12")
    args = ap.parse_args()
    s_values = (1, 2, 4, 8, 12, 16)
    rows = table1_rows(s_values, float(Fraction(args.rate)))
    print(f"{'s':>4}" + "".join(f"{f'PU_a {d}dB':>14}" for d in TABLE1_PU) + "".join(f"{f'SU_1 {d}dB':>14}" for d in TABLE1_SU))
    for k, s in enumerate(s_values):
        cells = [rows[("a", d)][k] for d in TABLE1_PU] + [rows[("1", d)][k] for d in TABLE1_SU]
        print(f"{s:>4}" + "".join(f"{v:>14.6g}" for v in cells))
    print("reference  PU:", TABLE1_PU, " SU (s=1, s=16):", TABLE1_SU)


if __name__ == "__main__":
    main()
