"""Time history enumeration on each backend.

    python benchmarks/bench_histories.py [--repeat N] [--width W]

The case-study spec is small; ``--width`` adds a synthetic spec with W
parallel guarded chains so the gap between backends is visible.
"""

import argparse
import timeit

from wfreconf import kernels
from wfreconf.project import bundled, parse_project
from wfreconf.reconfig import ReconfigSpec, safe_histories

BACKENDS = ("kernel", "python", "bdd")


def synthetic(width):
    proj = parse_project(bundled("case_study.wfr"))
    parser = proj.cpog_parser().__class__(proj.control)
    chains = [f"[v{i}] (a{i} -> b{i}) + [!v{i}] (b{i} -> a{i})" for i in range(width)]
    src = parser.parse(" + ".join(chains))
    dst = parser.parse(" + ".join(f"a{i} -> b{i}" for i in range(width)))
    return ReconfigSpec("r", "r_done", src, dst)


def bench(name, spec, repeat):
    counts = set()
    for backend in BACKENDS:
        counts.add(len(safe_histories(spec, backend=backend)))
        t = min(timeit.repeat(lambda: safe_histories(spec, backend=backend), number=1, repeat=repeat))
        print(f"{name:<12} {backend:<7} {t * 1000:9.2f} ms")
    assert len(counts) == 1, f"backends disagree on {name}: {counts}"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--width", type=int, default=5)
    args = ap.parse_args()
    print(f"kernel backend: {kernels.BACKEND}")
    bench("case-study", parse_project(bundled("case_study.wfr")).spec("S"), args.repeat)
    if args.width:
        bench(f"width-{args.width}", synthetic(args.width), args.repeat)


if __name__ == "__main__":
    main()
