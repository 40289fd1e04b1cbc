"""Command line entry: `cascadekit-extern serve model.json`."""

import argparse
import sys

from .server import serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cascadekit-extern",
        description="serve a persisted cascadekit model over stdio",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    serve_parser = sub.add_parser(
        "serve", help="answer line-delimited JSON predict requests"
    )
    serve_parser.add_argument("model", help="path to a persisted model document")
    serve_parser.add_argument(
        "--die-after",
        type=int,
        default=None,
        metavar="N",
        help="fault injection: crash after N predict responses "
        "(integration-test aid)",
    )
    args = parser.parse_args(argv)
    return serve(args.model, die_after=args.die_after)


if __name__ == "__main__":
    sys.exit(main())
