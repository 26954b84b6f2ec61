#!/usr/bin/env python3
"""Misbehaving oracle child: always replies with the wrong request id."""
import json
import sys

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    req = json.loads(line)
    n = req["shape"][0]
    reply = {"id": req["id"] + 1, "probs": [[0.5, 0.5] for _ in range(n)]}
    sys.stdout.write(json.dumps(reply) + "\n")
    sys.stdout.flush()
