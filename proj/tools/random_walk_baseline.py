#!/usr/bin/env python3
"""Success rate of a uniform random walk on an episode file.

At every decision the walker picks uniformly among Stop and the neighbors
of its node; choosing Stop ends the episode, as does reaching the decision
limit. The script reports the exact expected success rate (a forward pass
over the walk's state distribution) and, with --trials, a Monte Carlo
estimate as a cross-check. Only the world and episode JSON files are read.
"""

import argparse
import json
import math
import os
import random
import sys


def load_world(path):
    with open(path) as f:
        doc = json.load(f)
    if doc.get("format") != "hnav-world":
        raise ValueError(f"{path}: not a world document")
    pos = {n["id"]: n["position"] for n in doc["nodes"]}
    adj = {n: [] for n in pos}
    for e in doc["edges"]:
        adj[e["a"]].append(e["b"])
        adj[e["b"]].append(e["a"])
    for n in adj:
        adj[n].sort()
    return pos, adj


def success_probability(pos, adj, start, target, radius, max_steps):
    def ok(n):
        return math.dist(pos[n], pos[target]) < radius

    mass = {start: 1.0}
    p = 0.0
    for _ in range(max_steps):
        nxt = {}
        for n, m in mass.items():
            share = m / (len(adj[n]) + 1)
            if ok(n):
                p += share
            for b in adj[n]:
                nxt[b] = nxt.get(b, 0.0) + share
        mass = nxt
    return p + sum(m for n, m in mass.items() if ok(n))


def simulate(pos, adj, start, target, radius, max_steps, rng):
    n = start
    for _ in range(max_steps):
        pick = rng.randrange(len(adj[n]) + 1)
        if pick == len(adj[n]):
            break
        n = adj[n][pick]
    return math.dist(pos[n], pos[target]) < radius


def main(argv):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("episodes", help="episode file")
    ap.add_argument("--max-steps", type=int, default=15)
    ap.add_argument("--trials", type=int, default=0, help="Monte Carlo walks per episode")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="print a JSON summary")
    args = ap.parse_args(argv)

    with open(args.episodes) as f:
        doc = json.load(f)
    if doc.get("format") != "hnav-episodes":
        print(f"{args.episodes}: not an episode document", file=sys.stderr)
        return 2
    base = os.path.dirname(os.path.abspath(args.episodes))
    worlds = [load_world(w if os.path.isabs(w) else os.path.join(base, w)) for w in doc["worlds"]]

    rng = random.Random(args.seed)
    exact = []
    sampled = []
    for ep in doc["episodes"]:
        pos, adj = worlds[ep["world_index"]]
        r = ep["success_radius"]
        exact.append(success_probability(pos, adj, ep["start"], ep["target"], r, args.max_steps))
        if args.trials > 0:
            hits = sum(simulate(pos, adj, ep["start"], ep["target"], r, args.max_steps, rng)
                       for _ in range(args.trials))
            sampled.append(hits / args.trials)

    out = {"episodes": len(exact), "sr": 100.0 * sum(exact) / len(exact)}
    if sampled:
        out["sr_sampled"] = 100.0 * sum(sampled) / len(sampled)
    if args.json:
        print(json.dumps(out))
    else:
        print(f"random walk over {out['episodes']} episodes: SR {out['sr']:.2f}%")
        if sampled:
            print(f"sampled ({args.trials} walks each): SR {out['sr_sampled']:.2f}%")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
