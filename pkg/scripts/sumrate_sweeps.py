"""Average sum rate versus surface size and versus transmit power for four users."""

import _common
from irsbc.chanpen import default_scenario


if __name__ == "__main__":
    args = _common.parser(__doc__).parse_args()
    trials = 4 if args.quick else 100
    scn = default_scenario(K=4, N=8).to_dict()
    jobs = {
        "sumrate_vs_N": ("sweep", {"scenario": scn, "vary": "N", "values": [4, 8, 16, 32],
                                   "trials": trials}, []),
        "sumrate_vs_power": ("sweep", {"scenario": scn, "vary": "Pmax",
                                       "values": [20.0, 25.0, 30.0, 35.0, 40.0],
                                       "trials": trials}, []),
    }
    _common.run_all(args, jobs)
