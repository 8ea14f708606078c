"""Compare the compiled LCS kernel with the pure-Python fallback.

    python3 benchmarks/bench_lcs.py [--sizes 50 200 800] [--repeat 5]
"""

import argparse
import random
import string
import timeit

from taintcrawl.taint import lcs
from taintcrawl.taint.lcs import lcs_length_py


def pair(n: int, rng: random.Random) -> tuple[str, str]:
    """A value and a lightly edited copy, the shape the taint stages compare."""
    a = "".join(rng.choice(string.ascii_letters + "#?=&/") for _ in range(n))
    b = list(a)
    for _ in range(max(1, n // 8)):
        b[rng.randrange(n)] = rng.choice(string.digits)
    return a, "".join(b)


def run(sizes, repeat: int, seed: int = 0) -> list[dict]:
    rng = random.Random(seed)
    rows = []
    for n in sizes:
        a, b = pair(n, rng)
        number = max(1, 20000 // (n * n // 50 + 1))
        py = min(timeit.repeat(lambda: lcs_length_py(a, b), number=number, repeat=repeat)) / number
        row = {"n": n, "python_s": py, "compiled_s": None, "speedup": None}
        if lcs.lcs_length_codes is not None:
            assert lcs.lcs_length_ext(a, b) == lcs_length_py(a, b)
            ext = min(timeit.repeat(lambda: lcs.lcs_length_ext(a, b), number=number, repeat=repeat)) / number
            row.update(compiled_s=ext, speedup=py / ext)
        rows.append(row)
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 256, 1024, 2000])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    print(f"active backend: {lcs.BACKEND}")
    print(f"{'n':>6} {'python (s)':>12} {'compiled (s)':>13} {'speedup':>8}")
    for row in run(args.sizes, args.repeat):
        ext = "n/a" if row["compiled_s"] is None else f"{row['compiled_s']:.2e}"
        speed = "n/a" if row["speedup"] is None else f"{row['speedup']:.0f}x"
        print(f"{row['n']:>6} {row['python_s']:>12.2e} {ext:>13} {speed:>8}")


if __name__ == "__main__":
    main()
