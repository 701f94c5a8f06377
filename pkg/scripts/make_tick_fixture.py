"""Write the bundled 3-day synthetic minute-bar fixture.

Three 375-minute sessions (09:15-15:29) of a seeded random-walk price, with
one minute (day 2, 11:00) removed to exercise gap filling. No real market
data is shipped; the file is named after the ticker convention only.

    python scripts/make_tick_fixture.py tests/data/INFY_synthetic.csv
"""

import argparse
from datetime import datetime, timedelta

import numpy as np

from bispectral.ingest import TickRecord, write_ticks

DAYS = ("2015-01-05", "2015-01-06", "2015-01-07")
SESSION_MINUTES = 375
MISSING = datetime(2015, 1, 6, 11, 0)


def make_records(seed=2015):
    rng = np.random.default_rng(seed)
    price = 1000.0
    records = []
    for day in DAYS:
        start = datetime.fromisoformat(f"{day} 09:15")
        for i in range(SESSION_MINUTES):
            ts = start + timedelta(minutes=i)
            open_ = price
            close = round(open_ * float(np.exp(rng.normal(0, 5e-4))), 2)
            high = round(max(open_, close) + float(rng.uniform(0, 0.5)), 2)
            low = round(min(open_, close) - float(rng.uniform(0, 0.5)), 2)
            volume = int(rng.integers(100, 5000))
            price = close
            if ts == MISSING:
                continue
            records.append(TickRecord(ts, open_, high, low, close, volume))
    return records


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("path")
    ap.add_argument("--seed", type=int, default=2015)
    args = ap.parse_args()
    write_ticks(make_records(args.seed), args.path)
