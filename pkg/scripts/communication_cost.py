"""Message counts and modeled latency per round for two- and three-tier topologies.

    python scripts/communication_cost.py --k 100 --q 5 --params 14
"""
from __future__ import annotations

import argparse
import sys

from fedclus.federation import latency_breakdown, ledger_totals, round_messages, three_tier, two_tier, uniform_bandwidth


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--params", type=int, default=14, help="flat parameter count")
    p.add_argument("--bandwidths", type=float, nargs="+", default=[10e6, 100e6], help="bits per second")
    return p.parse_args(argv)


def run(args) -> int:
    for topo in (two_tier(args.k), three_tier(args.k, args.q)):
        msgs = round_messages(topo, range(args.k), args.params, 1)
        tot = ledger_totals(msgs)
        print(f"{topo.tiers}: {tot['messages']} messages, {tot['central_messages']} touch the server, "
              f"{tot['bytes']} bytes")
        for bps in args.bandwidths:
            lat = latency_breakdown(msgs, uniform_bandwidth(bps), topo)
            print(f"  {bps / 1e6:g} Mbit/s: central uplink {lat['central_uplink']:.6f}s, round {lat['total']:.6f}s")
    return 0


if __name__ == "__main__":
    sys.exit(run(parse_args()))
