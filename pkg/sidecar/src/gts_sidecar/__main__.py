"""Serve the sidecar: ``gts-sidecar --config sidecar.json`` or flags."""

from __future__ import annotations

import argparse
import sys

import uvicorn

from .app import create_app
from .config import SidecarConfig, load_config


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gts-sidecar", description=__doc__)
    parser.add_argument("--config", help="JSON config file (SidecarConfig shape)")
    parser.add_argument("--frame-root", help="directory frame refs resolve under")
    parser.add_argument("--host")
    parser.add_argument("--port", type=int)
    args = parser.parse_args(argv)

    if args.config:
        config = load_config(args.config)
        updates = {}
        if args.frame_root:
            updates["frame_root"] = args.frame_root
        if args.host:
            updates["host"] = args.host
        if args.port:
            updates["port"] = args.port
        if updates:
            config = SidecarConfig.model_validate({**config.model_dump(), **updates})
    elif args.frame_root:
        config = SidecarConfig(
            frame_root=args.frame_root,
            host=args.host or "127.0.0.1",
            port=args.port or 8750,
        )
    else:
        parser.error("provide --config or --frame-root")
        return 64

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
