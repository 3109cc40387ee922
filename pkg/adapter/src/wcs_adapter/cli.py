"""wcs-extract: video file in, interchange bundle out."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_adapter_config
from .extract import ExtractionError, extract


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wcs-extract",
        description="Extract a WCS interchange bundle (tracks, frames, flow) from a video.",
    )
    parser.add_argument("video", help="input video file")
    parser.add_argument("-o", "--output", required=True, help="bundle directory")
    parser.add_argument("--config", default=None, help="adapter config JSON")
    parser.add_argument("--video-id", default=None, help="override the bundle video id")
    args = parser.parse_args(argv)
    try:
        config = load_adapter_config(args.config)
        extract(args.video, args.output, config, video_id=args.video_id)
    except (ConfigError, ExtractionError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"wrote bundle to {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
