"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each workload runs once per backend to warm up (numba compiles on first
call), then ``--repeat`` times; the best time is reported.
"""
import argparse
import time
from importlib.resources import files

from valuedisj.model import apply_fixing, generate_market_split, load_instance
from valuedisj.polyhedra import _kernels as K
from valuedisj.polyhedra import enumerate_feasible_points, hull_facets, select_backend

FIX = files("valuedisj") / "fixtures"


def workloads():
    ex2 = load_instance(FIX / "ex2.mip")
    ex5 = load_instance(FIX / "ex5.mip")
    # instance 1 with x1 = 1, x2 = 0: a 10-dimensional hull with ~300 facets
    sub = apply_fixing(load_instance(FIX / "instance1.mip"), {0: 1, 1: 0})
    ms = generate_market_split(2, 20, 1)
    pts2 = enumerate_feasible_points(ex2)
    pts5 = enumerate_feasible_points(ex5)
    pts_sub = enumerate_feasible_points(sub)
    return [
        ("enumerate market split m=2 n=20", lambda: enumerate_feasible_points(ms)),
        ("enumerate example 5", lambda: enumerate_feasible_points(ex5)),
        ("hull example 5", lambda: hull_facets(pts5)),
        ("hull instance 1, x1=1 x2=0", lambda: hull_facets(pts_sub)),
        ("hull example 2 (14 dims)", lambda: hull_facets(pts2)),
    ]


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if K.HAVE_NUMBA else [])
    print(f"{'workload':36s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, fn in workloads():
        row = {}
        for b in backends:
            select_backend(b)
            row[b] = best_of(fn, args.repeat)
        speed = row["numpy"] / row["numba"] if "numba" in row and row["numba"] > 0 else float("nan")
        print(f"{name:36s}" + "".join(f"{row[b]:11.4f}s" for b in backends) + f"  {speed:9.1f}x")


if __name__ == "__main__":
    main()
