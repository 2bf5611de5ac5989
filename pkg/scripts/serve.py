"""Start the HTTP service.

Usage: python scripts/serve.py [--config service.json] [--port 8000]

Reads the service config (JSON or TOML; COACHLOOP_* env vars override),
opens the event log under its data directory, and serves the caregiver API
plus the bot webhook.  If frontend/dist exists it is mounted at /ui.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import uvicorn

from coachloop.api import create_app
from coachloop.config import load_config
from coachloop.service import CoachService


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=None, help="service config file")
    parser.add_argument("--port", type=int, default=None, help="override port")
    args = parser.parse_args()

    config = load_config(args.config)
    service = CoachService.open(config)
    app = create_app(service, ui_dir=Path("frontend") / "dist")
    try:
        uvicorn.run(app, host="127.0.0.1", port=args.port or config.port)
    finally:
        service.close()


if __name__ == "__main__":
    main()
