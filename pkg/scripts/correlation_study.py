"""Cross-gain ratio under random phases and the min-max correlation reachable by phase search."""

import _common
from irsbc.chanpen import default_iid_scenario


if __name__ == "__main__":
    args = _common.parser(__doc__).parse_args()
    trials = 500 if args.quick else 10_000
    real = 4 if args.quick else 20
    jobs = {"lemma2_ratio": ("lemma2", {"trials": trials}, [])}
    for bits in (2, 8):
        jobs[f"correlation_b{bits}"] = (
            "correlation", {"scenario": default_iid_scenario(b=bits).to_dict(),
                            "realizations": real}, [])
    _common.run_all(args, jobs)
