"""Print carry-machine trajectories for j = 1..J digits.

    python3 scripts/trace_table.py --bits 2 --max-digits 3
"""

import argparse

from specden.cli import main as cli


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bits", default="2")
    ap.add_argument("--max-digits", type=int, default=2)
    args = ap.parse_args()
    for j in range(1, args.max_digits + 1):
        print(f"j = {j}")
        cli(["trace", "--bits", args.bits, "--digits", str(j)])
        print()


if __name__ == "__main__":
    main()
