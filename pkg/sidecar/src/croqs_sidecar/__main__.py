"""Entry point: croqs-sidecar --config sidecar.toml"""
from __future__ import annotations

import argparse
import sys

from .app import create_app
from .config import SidecarConfig, load_config
from .models import SidecarStartupError


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="Serve models over the croqs wire protocol")
    parser.add_argument("--config", help="TOML or JSON config file")
    parser.add_argument("--host", default=None)
    parser.add_argument("--port", type=int, default=None)
    args = parser.parse_args(argv)

    config = load_config(args.config) if args.config else SidecarConfig()
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    try:
        app = create_app(config)
    except SidecarStartupError as exc:
        print(f"refusing to start: {exc}", file=sys.stderr)
        sys.exit(1)

    import uvicorn

    uvicorn.run(app, host=config.host, port=config.port)


if __name__ == "__main__":
    main()
