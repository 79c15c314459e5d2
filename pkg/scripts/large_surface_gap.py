"""DPC versus ZF sum rate under random phases as the surface grows, with closed-form bounds."""

import _common


if __name__ == "__main__":
    args = _common.parser(__doc__).parse_args()
    trials = 40 if args.quick else 500
    jobs = {"theorem1_10dB": ("theorem1", {"trials": trials}, []),
            "theorem1_0dB": ("theorem1", {"trials": trials, "Pmax_dBm": 0.0}, [])}
    _common.run_all(args, jobs)
