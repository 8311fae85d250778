"""Recompute the hand-derived expected values used by the test suite.

Run ``python3 tests/derive_fixtures.py`` to regenerate
``tests/fixtures/derived_values.json``.  Every entry is evaluated here
with mpmath at 50 digits, independently of the package code, and frozen
to float precision.  Tests compare package output against these numbers.
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50


def log2(x):
    return mp.log(x, 2)


def main() -> None:
    values = {}

    # One Bernoulli block with E=2 observed of N=3 possible edges at the
    # maximum-likelihood probability 2/3:
    #   2*log2(2/3) + 1*log2(1/3)
    ll = 2 * log2(mp.mpf(2) / 3) + 1 * log2(mp.mpf(1) / 3)
    values["block_loglik_e2_n3_bits"] = float(ll)

    # Model cost for T=1, no change points, one community over 3 active
    # nodes, one block with N=3:
    #   log2(M+1) + log2(T - 1 + 2) + 0 + 0.5*log2(3) = 0 + 1 + 0.5*log2(3)
    values["model_bits_t1_c1_n3"] = float(0 + log2(2) + mp.mpf("0.5") * log2(3))

    # Residual of the same fit is the negative block log-likelihood.
    values["residual_bits_e2_n3"] = float(-ll)

    # Their sum: the full criterion for the 3-node path graph at T=1.
    values["full_bits_t1_path3"] = float(0 + log2(2) + mp.mpf("0.5") * log2(3) - ll)

    # Screening distance, 4-node example with disjoint single-edge
    # snapshots: ||diff||_1 = 4 over sqrt(2*2) (each edge counted twice).
    values["distance_disjoint_single_edges"] = float(mp.mpf(4) / mp.sqrt(4))

    # Screening distance for {01} vs {01, 23}: ||diff||_1 = 2,
    # masses 2 and 4.
    values["distance_one_vs_two_edges"] = float(mp.mpf(2) / mp.sqrt(8))

    # NMI of {a,b|c,d} against {a,c|b,d}: all four contingency cells equal
    # 1/4 = product of marginals, so the mutual information vanishes.
    values["nmi_crossed_pairs"] = 0.0

    out = Path(__file__).parent / "fixtures" / "derived_values.json"
    out.parent.mkdir(exist_ok=True)
    with out.open("w") as fh:
        json.dump(values, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out}")
    for k, v in sorted(values.items()):
        print(f"  {k} = {v!r}")


if __name__ == "__main__":
    main()
