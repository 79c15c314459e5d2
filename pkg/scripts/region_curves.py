"""Two-user rate regions with and without the surface, plus a correlated-direct-link variant."""

import _common
from irsbc.chanpen import default_scenario

ALL = ["dpc", "dpc-inner", "zf", "zf-static", "tdma",
       "dpc-noirs", "zf-noirs", "zf-static-noirs", "tdma-noirs"]


if __name__ == "__main__":
    args = _common.parser(__doc__).parse_args()
    grid = 6 if args.quick else 20
    extra = ["--method", "alternating"] if args.quick else []
    base = default_scenario()
    jobs = {
        "region_default": ("region", {"scenario": base.to_dict(), "schemes": ALL, "grid": grid},
                           extra),
        "region_correlated": ("region", {"scenario": base.replace(rho_d2=0.8).to_dict(),
                                         "schemes": ALL, "grid": grid}, extra),
    }
    _common.run_all(args, jobs)
