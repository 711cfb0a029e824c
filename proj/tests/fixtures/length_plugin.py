#!/usr/bin/env python3
# Toy metric: hypothesis length in characters. Lower is "better".
import json
import sys

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    req = json.loads(line)
    print(json.dumps({"id": req["id"], "score": float(len(req["hypothesis"]))}))
